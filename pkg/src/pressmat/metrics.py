"""Posture and callus metrics over annotated regions.

All metrics work on cell values inside labelled polygons (cm coordinates):

* mean foot pressure: mean over the region's contact cells (P > threshold)
* centre of pressure:  pressure-weighted centroid of cell centres
* load %:             region pressure sum over the both-feet total
* regional stats:     mean/max over contact cells + load share of the foot

Pressure sums for the load ratios use every cell in the region (no contact
threshold), which keeps left + right = 100 and partition additivity exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import Polygon as ShapelyPolygon

from .pipeline import PressureField

DEFAULT_CONTACT_THRESHOLD = 5.0  # kPa

FOOT_LABELS = ("foot-L", "foot-R")
REQUIRED_LABELS = ("foot-L", "foot-R", "heel-L", "heel-R", "metatarsal-L", "metatarsal-R")


class RegionError(ValueError):
    pass


@dataclass(frozen=True)
class Region:
    """One labelled polygon in cm coordinates."""

    label: str
    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise RegionError(f"region {self.label!r}: polygon needs >= 3 vertices")
        object.__setattr__(self, "vertices", tuple((float(x), float(y)) for x, y in self.vertices))

    def shapely(self) -> ShapelyPolygon:
        return ShapelyPolygon(self.vertices)


def _valid_label(label: str) -> bool:
    return label in REQUIRED_LABELS or label.startswith("callus-")


@dataclass(frozen=True)
class RegionSet:
    """Validated collection of annotation polygons.

    Feet must be disjoint; heel/metatarsal/callus regions must lie within
    their foot.  (Callus side is free: a callus label carries no -L/-R.)
    """

    regions: tuple[Region, ...]

    def __post_init__(self):
        seen = set()
        for region in self.regions:
            if not _valid_label(region.label):
                raise RegionError(f"unknown region label {region.label!r}")
            if region.label in seen:
                raise RegionError(f"duplicate region label {region.label!r}")
            seen.add(region.label)
            poly = region.shapely()
            if not poly.is_valid or poly.area <= 0:
                raise RegionError(f"region {region.label!r}: polygon is degenerate or self-intersecting")
        feet = {lbl: self.get(lbl).shapely() for lbl in FOOT_LABELS if lbl in seen}
        if len(feet) == 2 and feet["foot-L"].intersection(feet["foot-R"]).area > 1e-12:
            raise RegionError("foot-L and foot-R overlap")
        for region in self.regions:
            side = region.label[-2:]
            if side in ("-L", "-R") and region.label not in FOOT_LABELS:
                foot = feet.get("foot" + side)
                if foot is None:
                    raise RegionError(f"region {region.label!r} has no foot{side} to contain it")
                if not foot.covers(region.shapely()):
                    raise RegionError(f"region {region.label!r} is not inside foot{side}")
            elif region.label.startswith("callus-") and feet:
                if not any(f.covers(region.shapely()) for f in feet.values()):
                    raise RegionError(f"region {region.label!r} is not inside either foot")

    def labels(self) -> list[str]:
        return [r.label for r in self.regions]

    def get(self, label: str) -> Region:
        for region in self.regions:
            if region.label == label:
                return region
        raise KeyError(label)

    def __contains__(self, label: str) -> bool:
        return any(r.label == label for r in self.regions)

    # GeoJSON-style serialization
    def to_json(self) -> dict:
        return {
            "type": "FeatureCollection",
            "features": [
                {
                    "type": "Feature",
                    "properties": {"label": r.label},
                    "geometry": {"type": "Polygon",
                                 "coordinates": [[list(v) for v in r.vertices]]},
                }
                for r in self.regions
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "RegionSet":
        if doc.get("type") != "FeatureCollection":
            raise RegionError("expected a GeoJSON-style FeatureCollection")
        regions = []
        for feat in doc.get("features", []):
            geom = feat.get("geometry", {})
            if geom.get("type") != "Polygon":
                raise RegionError("every feature must carry a Polygon geometry")
            ring = [tuple(p) for p in geom["coordinates"][0]]
            if len(ring) > 3 and ring[0] == ring[-1]:
                ring = ring[:-1]  # GeoJSON rings close explicitly
            regions.append(Region(feat["properties"]["label"], tuple(ring)))
        return cls(tuple(regions))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def mask_cells(field: PressureField, polygon) -> np.ndarray:
    """Boolean mask of cells whose centres fall inside the polygon
    (even-odd rule, vectorized crossing count)."""
    vertices = polygon.vertices if isinstance(polygon, Region) else tuple(polygon)
    if len(vertices) < 3:
        raise RegionError("polygon needs >= 3 vertices")
    xs, ys = field.cell_centers()
    px = np.broadcast_to(xs[None, :], field.shape)
    py = np.broadcast_to(ys[:, None], field.shape)
    inside = np.zeros(field.shape, dtype=bool)
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        straddles = (y1 > py) != (y2 > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_cross = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
        inside ^= straddles & (px < x_cross)
    return inside


def _region_mask(field: PressureField, region) -> np.ndarray:
    if isinstance(region, np.ndarray) and region.dtype == bool:
        return region
    return mask_cells(field, region)


def mean_foot_pressure(field: PressureField, region,
                       contact_threshold: float = DEFAULT_CONTACT_THRESHOLD) -> float:
    """Mean pressure over the region's contact cells; 0.0 when nothing
    exceeds the threshold (the no-contact case)."""
    mask = _region_mask(field, region)
    vals = field.values[mask]
    contact = vals[vals > contact_threshold]
    return float(contact.mean()) if contact.size else 0.0


def contact_cell_count(field: PressureField, region,
                       contact_threshold: float = DEFAULT_CONTACT_THRESHOLD) -> int:
    mask = _region_mask(field, region)
    return int((field.values[mask] > contact_threshold).sum())


def center_of_pressure(field: PressureField, region) -> tuple[float, float] | None:
    """Pressure-weighted centroid of cell centres; None when the region
    carries no pressure."""
    mask = _region_mask(field, region)
    weights = field.values * mask
    total = weights.sum()
    if total <= 0:
        return None
    xs, ys = field.cell_centers()
    x = (weights.sum(axis=0) * xs).sum() / total
    y = (weights.sum(axis=1) * ys).sum() / total
    return (float(x), float(y))


def load_percentage(field: PressureField, foot_region, total: float | None = None,
                    other_region=None) -> float | None:
    """Share (0-100) of the both-feet pressure total carried by one foot.

    Pass either the precomputed total or the other foot's region; returns
    None when the total is zero (no contact anywhere).
    """
    mask = _region_mask(field, foot_region)
    own = float(field.values[mask].sum())
    if total is None:
        if other_region is None:
            raise ValueError("need either total or other_region")
        other = float(field.values[_region_mask(field, other_region)].sum())
        total = own + other
    if total <= 0:
        return None
    return 100.0 * own / total


@dataclass(frozen=True)
class RegionalStats:
    mean_kpa: float
    max_kpa: float
    load_pct_of_foot: float
    contact_cells: int


def regional_stats(field: PressureField, subregion, foot_region,
                   contact_threshold: float = DEFAULT_CONTACT_THRESHOLD,
                   validate_containment: bool = True) -> RegionalStats:
    """Mean/max over the subregion's contact cells plus its load share of
    the parent foot (per-foot denominator)."""
    sub_mask = _region_mask(field, subregion)
    foot_mask = _region_mask(field, foot_region)
    if validate_containment and isinstance(subregion, Region) and isinstance(foot_region, Region):
        if not foot_region.shapely().covers(subregion.shapely()):
            raise RegionError(f"region {subregion.label!r} is not inside {foot_region.label!r}")
    vals = field.values[sub_mask]
    contact = vals[vals > contact_threshold]
    foot_sum = float(field.values[foot_mask].sum())
    sub_sum = float(vals.sum())
    return RegionalStats(
        mean_kpa=float(contact.mean()) if contact.size else 0.0,
        max_kpa=float(contact.max()) if contact.size else 0.0,
        load_pct_of_foot=100.0 * sub_sum / foot_sum if foot_sum > 0 else 0.0,
        contact_cells=int(contact.size),
    )


@dataclass(frozen=True)
class FootReport:
    mfp_kpa: float
    load_pct: float
    cop_cm: tuple[float, float] | None
    heel: RegionalStats
    metatarsal: RegionalStats
    contact_cells: int

    @property
    def no_contact(self) -> bool:
        return self.contact_cells == 0


@dataclass(frozen=True)
class MetricsReport:
    """Everything in one Tables I/II-shaped record."""

    left: FootReport
    right: FootReport
    resultant_cop_cm: tuple[float, float] | None
    contact_threshold_kpa: float
    column_labels: tuple[str, str] = ("Left", "Right")

    ROW_ORDER = (
        "MFP",
        "Load %",
        "Mean Heel Pressure",
        "Max Heel Pressure",
        "Load % on Heel",
        "Mean Metatarsal Pressure",
        "Max Metatarsal Pressure",
        "Load % on Metatarsal",
    )

    def rows(self) -> list[tuple[str, float, float]]:
        l, r = self.left, self.right
        return [
            ("MFP", l.mfp_kpa, r.mfp_kpa),
            ("Load %", l.load_pct, r.load_pct),
            ("Mean Heel Pressure", l.heel.mean_kpa, r.heel.mean_kpa),
            ("Max Heel Pressure", l.heel.max_kpa, r.heel.max_kpa),
            ("Load % on Heel", l.heel.load_pct_of_foot, r.heel.load_pct_of_foot),
            ("Mean Metatarsal Pressure", l.metatarsal.mean_kpa, r.metatarsal.mean_kpa),
            ("Max Metatarsal Pressure", l.metatarsal.max_kpa, r.metatarsal.max_kpa),
            ("Load % on Metatarsal", l.metatarsal.load_pct_of_foot, r.metatarsal.load_pct_of_foot),
        ]

    def to_json(self) -> dict:
        def foot(fr: FootReport) -> dict:
            return {
                "mfp_kpa": fr.mfp_kpa,
                "load_pct": fr.load_pct,
                "cop_cm": list(fr.cop_cm) if fr.cop_cm else None,
                "heel": vars(fr.heel).copy(),
                "metatarsal": vars(fr.metatarsal).copy(),
                "contact_cells": fr.contact_cells,
                "no_contact": fr.no_contact,
            }

        return {
            "columns": list(self.column_labels),
            "left": foot(self.left),
            "right": foot(self.right),
            "resultant_cop_cm": list(self.resultant_cop_cm) if self.resultant_cop_cm else None,
            "contact_threshold_kpa": self.contact_threshold_kpa,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "MetricsReport":
        def foot(d: dict) -> FootReport:
            return FootReport(
                mfp_kpa=d["mfp_kpa"],
                load_pct=d["load_pct"],
                cop_cm=tuple(d["cop_cm"]) if d.get("cop_cm") else None,
                heel=RegionalStats(**d["heel"]),
                metatarsal=RegionalStats(**d["metatarsal"]),
                contact_cells=d["contact_cells"],
            )

        return cls(
            left=foot(doc["left"]),
            right=foot(doc["right"]),
            resultant_cop_cm=tuple(doc["resultant_cop_cm"]) if doc.get("resultant_cop_cm") else None,
            contact_threshold_kpa=doc["contact_threshold_kpa"],
            column_labels=tuple(doc.get("columns", ("Left", "Right"))),
        )


def full_report(field: PressureField, region_set: RegionSet,
                contact_threshold: float = DEFAULT_CONTACT_THRESHOLD,
                column_labels: tuple[str, str] = ("Left", "Right")) -> MetricsReport:
    """Populate every Tables I/II row for both feet."""
    missing = [lbl for lbl in REQUIRED_LABELS if lbl not in region_set]
    if missing:
        raise RegionError(f"region set is missing required labels: {', '.join(missing)}")

    masks = {lbl: mask_cells(field, region_set.get(lbl)) for lbl in REQUIRED_LABELS}
    sums = {lbl: float(field.values[masks[lbl]].sum()) for lbl in FOOT_LABELS}
    total = sums["foot-L"] + sums["foot-R"]

    def foot(side: str) -> FootReport:
        foot_lbl = "foot-" + side
        share = 100.0 * sums[foot_lbl] / total if total > 0 else 0.0
        return FootReport(
            mfp_kpa=mean_foot_pressure(field, masks[foot_lbl], contact_threshold),
            load_pct=share,
            cop_cm=center_of_pressure(field, masks[foot_lbl]),
            heel=regional_stats(field, masks["heel-" + side], masks[foot_lbl], contact_threshold),
            metatarsal=regional_stats(field, masks["metatarsal-" + side], masks[foot_lbl],
                                      contact_threshold),
            contact_cells=contact_cell_count(field, masks[foot_lbl], contact_threshold),
        )

    both = masks["foot-L"] | masks["foot-R"]
    return MetricsReport(
        left=foot("L"),
        right=foot("R"),
        resultant_cop_cm=center_of_pressure(field, both),
        contact_threshold_kpa=contact_threshold,
        column_labels=column_labels,
    )


def auto_split_regions(field: PressureField,
                       contact_threshold: float = DEFAULT_CONTACT_THRESHOLD,
                       heel_fraction: float = 0.40,
                       metatarsal_fraction: float = 0.35) -> RegionSet:
    """Convenience initializer: split the contact bounding box at its
    vertical midline into two feet and band each foot into heel (bottom) and
    metatarsal (top) regions.  A seed for manual editing, not a segmenter.
    """
    contact = field.values > contact_threshold
    if not contact.any():
        raise RegionError("no contact cells above threshold; cannot split")
    rows, cols = np.nonzero(contact)
    xs, ys = field.cell_centers()
    x_lo, x_hi = xs[cols.min()], xs[cols.max()]
    x_mid = 0.5 * (x_lo + x_hi)
    eps = 0.5 * field.pitch

    def rect(label, x0, x1, y0, y1):
        return Region(label, ((x0, y0), (x1, y0), (x1, y1), (x0, y1)))

    regions = []
    for side, (x0, x1) in (("L", (x_lo - eps, x_mid)), ("R", (x_mid, x_hi + eps))):
        in_side = contact & (xs[None, :] >= x0) & (xs[None, :] <= x1)
        if not in_side.any():
            raise RegionError(f"no contact cells on the {side} side of the midline")
        side_rows = np.nonzero(in_side)[0]
        y0, y1 = ys[side_rows.min()] - eps, ys[side_rows.max()] + eps
        span = y1 - y0
        regions.append(rect("foot-" + side, x0, x1, y0, y1))
        regions.append(rect("heel-" + side, x0, x1, y0, y0 + heel_fraction * span))
        regions.append(rect("metatarsal-" + side, x0, x1, y1 - metatarsal_fraction * span, y1))
    return RegionSet(tuple(regions))
