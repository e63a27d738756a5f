"""Counts -> kPa calibration: branch averaging, monotone fitting, application.

Calibration follows the bench procedure: sweep known pressures up (loading)
and down (unloading), record the observed counts, resample both branches onto
a common pressure grid, average them pointwise into a mean curve, and fit a
monotone piecewise cubic (Fritsch-Carlson conditions, scipy's PCHIP) through
the averaged points.  The curve is stored as counts -> kPa knots.

Counts below the calibrated range read as 0 kPa: the mat has a nonzero idle
count, so the lowest knot doubles as an explicit no-contact floor.  Counts
above the range clamp to the top knot and raise a saturation flag.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .frames import ADC_MAX, RawFrame
from .simulate import (DividerConfig, SensorModel, adc_quantize,
                       divider_voltage)


class CalibrationError(ValueError):
    pass


def invert_divider(cfg: DividerConfig, count: int) -> float:
    """Sensor resistance implied by an ADC count (inverse of the divider).

    A count of zero means no measurable current: returns ``math.inf`` as the
    open-circuit signal.
    """
    if not 0 <= count <= cfg.adc_max:
        raise ValueError(f"count {count} outside [0, {cfg.adc_max}]")
    if count == 0:
        return math.inf
    v = count / cfg.adc_max * cfg.adc_vref
    return max(cfg.r_fixed * (cfg.v_supply / v - 1.0), 0.0)


@dataclass(frozen=True)
class CalibrationSample:
    applied_pressure: float  # kPa
    observed_count: int
    branch: str  # "loading" | "unloading"

    def __post_init__(self):
        if self.applied_pressure < 0:
            raise CalibrationError(f"pressure {self.applied_pressure} must be >= 0")
        if not 0 <= self.observed_count <= ADC_MAX:
            raise CalibrationError(f"count {self.observed_count} outside [0, {ADC_MAX}]")
        if self.branch not in ("loading", "unloading"):
            raise CalibrationError(f"unknown branch {self.branch!r}")


class CalibrationCurve:
    """Monotone counts -> kPa mapping.

    Evaluation inside the knot range follows the PCHIP interpolant; below it
    the reading is 0 kPa (no-contact floor), above it the top-knot pressure
    with a saturation flag.
    """

    method = "monotone-pchip"

    def __init__(self, knot_counts, knot_kpa, divider: DividerConfig | None = None):
        counts = np.asarray(knot_counts, dtype=float)
        kpa = np.asarray(knot_kpa, dtype=float)
        if counts.size < 2 or counts.size != kpa.size:
            raise CalibrationError("need at least two (count, kPa) knots")
        if np.any(np.diff(counts) <= 0) or np.any(np.diff(kpa) <= 0):
            raise CalibrationError("knots must be strictly increasing in both coordinates")
        self.knot_counts = counts
        self.knot_kpa = kpa
        self.divider = divider
        self._pchip = PchipInterpolator(counts, kpa, extrapolate=False)
        # Integer-count lookup table; identical to evaluating the interpolant,
        # but O(1) per channel in apply().
        lut = np.zeros(ADC_MAX + 1)
        lo, hi = self.valid_range
        inside = np.arange(lo, hi + 1)
        lut[inside] = self._pchip(inside)
        lut[hi + 1:] = kpa[-1]
        self._lut = lut

    @property
    def valid_range(self) -> tuple[int, int]:
        return (int(math.ceil(self.knot_counts[0])), int(math.floor(self.knot_counts[-1])))

    def evaluate(self, counts):
        """kPa for arbitrary (possibly fractional) counts, floored/clamped."""
        c = np.asarray(counts, dtype=float)
        out = self._pchip(np.clip(c, self.knot_counts[0], self.knot_counts[-1]))
        out = np.where(c < self.knot_counts[0], 0.0, out)
        return out if out.shape else float(out)

    def apply(self, frame: RawFrame) -> tuple[np.ndarray, bool]:
        """Calibrate one frame; returns (kPa per channel, saturated flag)."""
        counts = frame.counts
        saturated = bool((counts > self.valid_range[1]).any())
        return self._lut[counts], saturated

    def apply_counts(self, counts: np.ndarray) -> np.ndarray:
        return self._lut[np.asarray(counts, dtype=np.intp)]

    def to_json(self) -> dict:
        doc = {
            "method": self.method,
            "knots": [[float(c), float(p)] for c, p in zip(self.knot_counts, self.knot_kpa)],
            "valid_range": list(self.valid_range),
        }
        if self.divider is not None:
            doc["divider"] = self.divider.to_json()
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "CalibrationCurve":
        if doc.get("method") != cls.method:
            raise CalibrationError(f"unsupported calibration method {doc.get('method')!r}")
        knots = np.asarray(doc["knots"], dtype=float)
        divider = DividerConfig.from_json(doc["divider"]) if "divider" in doc else None
        return cls(knots[:, 0], knots[:, 1], divider)

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def _median3(values: np.ndarray) -> np.ndarray:
    """3-point median prefilter (endpoints kept) to shed isolated outliers."""
    if values.size < 3:
        return values.copy()
    out = values.copy()
    stacked = np.stack([values[:-2], values[1:-1], values[2:]])
    out[1:-1] = np.median(stacked, axis=0)
    return out


def _branch_curve(samples: list[CalibrationSample], branch: str):
    picked = [s for s in samples if s.branch == branch]
    if len(picked) < 4:
        raise CalibrationError(f"{branch} branch needs >= 4 samples, got {len(picked)}")
    picked.sort(key=lambda s: s.applied_pressure)
    pressures = np.array([s.applied_pressure for s in picked], dtype=float)
    counts = _median3(np.array([s.observed_count for s in picked], dtype=float))
    drops = np.flatnonzero(np.diff(counts) < 0)
    if drops.size:
        offenders = [
            f"(P={pressures[i + 1]:g} kPa, count={picked[i + 1].observed_count})"
            for i in drops
        ]
        raise CalibrationError(
            f"{branch} branch not monotone after median prefilter at: " + ", ".join(offenders)
        )
    # Collapse duplicate pressures (repeated applications of the same weight).
    uniq, index = np.unique(pressures, return_inverse=True)
    mean_counts = np.bincount(index, weights=counts) / np.bincount(index)
    return uniq, mean_counts


def build_curve(samples, divider: DividerConfig | None = None,
                grid_points: int = 800) -> CalibrationCurve:
    """Fit the mean calibration curve from loading + unloading samples."""
    samples = list(samples)
    p_load, c_load = _branch_curve(samples, "loading")
    p_unload, c_unload = _branch_curve(samples, "unloading")

    lo = max(p_load[0], p_unload[0])
    hi = min(p_load[-1], p_unload[-1])
    union = max(p_load[-1], p_unload[-1]) - min(p_load[0], p_unload[0])
    if union > 0 and (hi - lo) < 0.5 * union:
        raise CalibrationError(
            f"branches overlap on only {hi - lo:g} kPa of a {union:g} kPa range (< 50%)"
        )

    grid = np.linspace(lo, hi, grid_points)
    mean_counts = 0.5 * (np.interp(grid, p_load, c_load) + np.interp(grid, p_unload, c_unload))

    # The ADC plateaus at low sensitivity; collapse equal-count runs so the
    # knot sequence is strictly increasing (knot pressure = plateau centre).
    knot_counts, index = np.unique(mean_counts, return_inverse=True)
    knot_kpa = np.bincount(index, weights=grid) / np.bincount(index)
    order = np.argsort(knot_counts)
    knot_counts, knot_kpa = knot_counts[order], knot_kpa[order]
    # Taring: the first knot is pinned to the lowest calibrated pressure so
    # the mat's idle count reads exactly that floor (0 kPa when the sweep
    # starts unloaded), not the centre of its quantization plateau.
    knot_kpa[0] = lo
    keep = np.ones(knot_counts.size, dtype=bool)
    keep[1:] = np.diff(knot_kpa) > 0
    return CalibrationCurve(knot_counts[keep], knot_kpa[keep], divider)


def sweep_samples(model: SensorModel | None = None,
                  divider: DividerConfig | None = None,
                  pressures: np.ndarray | None = None) -> list[CalibrationSample]:
    """Generate loading/unloading samples by sweeping the simulated sensor
    with a uniform pressure, the software analogue of the weight-bearing
    calibration base.

    Each weight step is held until the sensor settles, so the recorded
    points sit on the asymptotic branch curves rather than on the blended
    reversal transient (which would make the branches non-monotone).
    """
    model = model or SensorModel()
    divider = divider or DividerConfig()
    if pressures is None:
        pressures = default_calibration_pressures()
    pressures = np.asarray(pressures, dtype=float)

    samples = []
    for branch, sign in (("loading", 1.0), ("unloading", -1.0)):
        r = model.mean_resistance(pressures) * (1.0 + sign * model.hysteresis_band)
        counts = adc_quantize(divider, divider_voltage(divider, r))
        order = range(len(pressures)) if sign > 0 else range(len(pressures) - 1, -1, -1)
        for i in order:
            samples.append(CalibrationSample(float(pressures[i]), int(counts[i]), branch))
    return samples


def default_calibration_pressures() -> np.ndarray:
    """Dense at the low-sensitivity bottom of the range, coarser above."""
    return np.unique(np.concatenate([
        np.arange(0.0, 30.0, 1.0),
        np.arange(30.0, 120.0, 2.0),
        np.arange(120.0, 661.0, 5.0),
    ]))


def samples_from_csv(text: str) -> list[CalibrationSample]:
    """Parse "pressure_kpa,count,branch" CSV rows (header optional)."""
    samples = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.lower().startswith("pressure"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise CalibrationError(f"line {lineno}: expected 3 columns, got {len(parts)}")
        try:
            samples.append(CalibrationSample(float(parts[0]), int(parts[1]), parts[2]))
        except (ValueError, CalibrationError) as exc:
            raise CalibrationError(f"line {lineno}: {exc}") from exc
    return samples


def samples_to_csv(samples) -> str:
    lines = ["pressure_kpa,count,branch"]
    lines += [f"{s.applied_pressure:g},{s.observed_count},{s.branch}" for s in samples]
    return "\n".join(lines) + "\n"
