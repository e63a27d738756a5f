"""Frame stream -> analysis-quality pressure image.

The capture pipeline is fixed: calibrate each frame, reconstruct the dense
grid, average the frames linearly, upsample 10x per axis with a separable
interpolating cubic (Catmull-Rom), then smooth with a renormalized 5x5
Gaussian kernel.  Each stage stamps its provenance tag and refuses input
that has already passed a later stage, so the order is enforceable.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from .calibration import CalibrationCurve
from .geometry import RawGrid, SensorLayout, reconstruct_grid

STAGE_ORDER = ("raw", "averaged", "upsampled", "smoothed")


class PipelineOrderError(ValueError):
    pass


@dataclass
class PressureField:
    """Uniform-grid pressure image in kPa with physical placement metadata.

    ``origin`` is the (x, y) position in cm of cell [0, 0]; cell [r, c] sits
    at ``origin + (c, r) * pitch``.
    """

    values: np.ndarray
    pitch: float  # cm per cell
    origin: tuple[float, float] = (0.0, 0.0)
    provenance: tuple[str, ...] = ("raw",)
    frames_averaged: int = 1
    clamped_cells: int = 0  # negative spline overshoots clipped to zero

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("values must be 2-D")
        if self.pitch <= 0:
            raise ValueError("pitch must be positive")
        unknown = set(self.provenance) - set(STAGE_ORDER)
        if unknown:
            raise ValueError(f"unknown provenance tags {sorted(unknown)}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """(x, y) coordinate vectors of cell centres along cols and rows."""
        rows, cols = self.values.shape
        x = self.origin[0] + np.arange(cols) * self.pitch
        y = self.origin[1] + np.arange(rows) * self.pitch
        return x, y

    def _check_stage(self, stage: str) -> None:
        limit = STAGE_ORDER.index(stage)
        for tag in self.provenance:
            if STAGE_ORDER.index(tag) > limit:
                raise PipelineOrderError(
                    f"cannot apply {stage!r} to a field already {tag!r} "
                    f"(stage order is {' -> '.join(STAGE_ORDER)})"
                )


def as_field(grid) -> PressureField:
    """Adopt a RawGrid (or pass through a PressureField)."""
    if isinstance(grid, PressureField):
        return grid
    if isinstance(grid, RawGrid):
        return PressureField(values=grid.values, pitch=grid.pitch, origin=grid.origin)
    raise TypeError(f"expected RawGrid or PressureField, got {type(grid).__name__}")


def average_frames(fields) -> PressureField:
    """Element-wise mean of n same-shape fields (the 50-frame average)."""
    fields = [as_field(f) for f in fields]
    if not fields:
        raise ValueError("need at least one field to average")
    first = fields[0]
    first._check_stage("averaged")
    for f in fields[1:]:
        f._check_stage("averaged")
        if f.values.shape != first.values.shape or f.pitch != first.pitch:
            raise ValueError("all fields must share shape and pitch")
    mean = np.mean([f.values for f in fields], axis=0)
    provenance = first.provenance + ("averaged",) if "averaged" not in first.provenance \
        else first.provenance
    return PressureField(values=mean, pitch=first.pitch, origin=first.origin,
                         provenance=provenance,
                         frames_averaged=sum(f.frames_averaged for f in fields))


def _catmull_rom_weights(t: np.ndarray) -> np.ndarray:
    """Weights for the 4 taps around each sample offset t in [0, 1)."""
    t2, t3 = t * t, t * t * t
    return np.stack([
        -0.5 * t3 + t2 - 0.5 * t,
        1.5 * t3 - 2.5 * t2 + 1.0,
        -1.5 * t3 + 2.0 * t2 + 0.5 * t,
        0.5 * t3 - 0.5 * t2,
    ])


def _resample_axis(values: np.ndarray, factor: int) -> np.ndarray:
    """Catmull-Rom resample along axis 0, cell-centred, linear-extrapolated
    edges (so constants and ramps are reproduced exactly)."""
    n = values.shape[0]
    out_n = n * factor
    # Cell-centred mapping: output j samples input coordinate (j+0.5)/f - 0.5.
    x = (np.arange(out_n) + 0.5) / factor - 0.5
    base = np.floor(x).astype(int)
    t = x - base
    w = _catmull_rom_weights(t)  # (4, out_n)
    # Pad by linear extrapolation: keeps cubic interpolation exact for
    # linear fields right up to the borders.
    pad_lo = 2 * values[:1] - values[1:3][::-1]
    pad_hi = 2 * values[-1:] - values[-3:-1][::-1]
    padded = np.concatenate([pad_lo, values, pad_hi], axis=0)
    idx = base + 2  # padded offset of tap -1
    taps = [padded[idx + k - 1] for k in range(4)]
    extra = (slice(None),) + (None,) * (values.ndim - 1)
    return sum(w[k][extra] * taps[k] for k in range(4))


def upsample_spline(field: PressureField, factor: int = 10) -> PressureField:
    """Interpolating cubic upsample by an integer factor per axis.

    Input samples are reproduced exactly wherever output cells coincide with
    them; negative overshoot is clamped to zero and counted.  Fields smaller
    than the cubic support fall back to bilinear (recorded in provenance by
    keeping the tag but noting the clamp count only).
    """
    if factor < 1 or int(factor) != factor:
        raise ValueError("factor must be a positive integer")
    field._check_stage("upsampled")
    if factor == 1:
        return replace(field, values=field.values.copy())
    values = field.values
    if min(values.shape) >= 4:
        out = _resample_axis(values, factor)
        out = _resample_axis(out.T, factor).T
    else:
        out = _bilinear_resample(values, factor)
    clamped = int((out < 0).sum())
    if clamped:
        out = np.clip(out, 0.0, None)
    # Cell-centred output: cell [0,0] moves half an input pitch minus half
    # an output pitch from the input origin.
    pitch = field.pitch / factor
    shift = -0.5 * field.pitch + 0.5 * pitch
    origin = (field.origin[0] + shift, field.origin[1] + shift)
    provenance = field.provenance + ("upsampled",) if "upsampled" not in field.provenance \
        else field.provenance
    return PressureField(values=out, pitch=pitch, origin=origin, provenance=provenance,
                         frames_averaged=field.frames_averaged,
                         clamped_cells=field.clamped_cells + clamped)


def _bilinear_resample(values: np.ndarray, factor: int) -> np.ndarray:
    """Fallback for fields too small for a 4-tap cubic."""
    def axis(vals):
        n = vals.shape[0]
        x = np.clip((np.arange(n * factor) + 0.5) / factor - 0.5, 0, n - 1)
        base = np.minimum(np.floor(x).astype(int), n - 2) if n > 1 else np.zeros(len(x), int)
        t = x - base
        extra = (slice(None),) + (None,) * (vals.ndim - 1)
        return (1 - t)[extra] * vals[base] + t[extra] * vals[np.minimum(base + 1, n - 1)]
    return axis(axis(values).T).T


@dataclass(frozen=True)
class SmoothingSpec:
    """5x5 Gaussian smoothing, sigma in grid cells, renormalized to unit sum."""

    kernel_size: int = 5
    sigma: float = 0.8

    def __post_init__(self):
        if self.kernel_size % 2 != 1 or self.kernel_size < 1:
            raise ValueError("kernel_size must be odd and positive")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")


def gaussian_kernel(spec: SmoothingSpec, normalized: bool = True) -> np.ndarray:
    """Sample G(x,y) = exp(-(x^2+y^2)/(2 sigma^2)) / (2 pi sigma^2) at integer
    offsets and (by default) renormalize to unit sum."""
    half = spec.kernel_size // 2
    offsets = np.arange(-half, half + 1)
    xx, yy = np.meshgrid(offsets, offsets)
    kernel = np.exp(-(xx ** 2 + yy ** 2) / (2.0 * spec.sigma ** 2))
    kernel /= 2.0 * np.pi * spec.sigma ** 2
    if normalized:
        kernel = kernel / kernel.sum()
    return kernel


def smooth(field: PressureField, spec: SmoothingSpec | None = None) -> PressureField:
    """Correlate with the unit-sum Gaussian kernel; reflect-101 borders."""
    spec = spec or SmoothingSpec()
    field._check_stage("smoothed")
    if min(field.values.shape) <= spec.kernel_size // 2:
        raise ValueError("field smaller than the smoothing kernel")
    kernel = gaussian_kernel(spec)
    out = ndimage.correlate(field.values, kernel, mode="mirror")
    provenance = field.provenance + ("smoothed",) if "smoothed" not in field.provenance \
        else field.provenance
    return PressureField(values=out, pitch=field.pitch, origin=field.origin,
                         provenance=provenance, frames_averaged=field.frames_averaged,
                         clamped_cells=field.clamped_cells)


def process_capture(frames, curve: CalibrationCurve, layout: SensorLayout | None = None,
                    spec: SmoothingSpec | None = None, factor: int = 10) -> PressureField:
    """Full capture pipeline: calibrate -> reconstruct -> average -> upsample
    -> smooth.  ``frames`` is typically the 50-frame standing capture."""
    layout = layout or SensorLayout()
    frames = list(frames)
    if not frames:
        raise ValueError("no frames to process")
    grids = []
    for frame in frames:
        kpa, _ = curve.apply(frame)
        grids.append(reconstruct_grid(layout, kpa))
    averaged = average_frames(grids)
    return smooth(upsample_spline(averaged, factor=factor), spec)


# -- portable field export ----------------------------------------------------

def field_to_json(field: PressureField) -> dict:
    """Header + base64 row-major float32 payload (self-contained form)."""
    return {
        "dims": list(field.values.shape),
        "pitch_cm": field.pitch,
        "origin_cm": list(field.origin),
        "units": "kPa",
        "provenance": list(field.provenance),
        "frames_averaged": field.frames_averaged,
        "clamped_cells": field.clamped_cells,
        "dtype": "<f4",
        "values_b64": base64.b64encode(
            np.ascontiguousarray(field.values, dtype="<f4").tobytes()).decode("ascii"),
    }


def field_from_json(doc: dict) -> PressureField:
    values = np.frombuffer(base64.b64decode(doc["values_b64"]), dtype=doc["dtype"])
    return PressureField(
        values=values.reshape(doc["dims"]).astype(float),
        pitch=doc["pitch_cm"],
        origin=tuple(doc["origin_cm"]),
        provenance=tuple(doc["provenance"]),
        frames_averaged=doc["frames_averaged"],
        clamped_cells=doc.get("clamped_cells", 0),
    )


def save_field(field: PressureField, path) -> None:
    """Write <path>.json header + <path>.bin row-major float32 sidecar."""
    import pathlib

    path = pathlib.Path(path)
    doc = field_to_json(field)
    raw = base64.b64decode(doc.pop("values_b64"))
    doc["values_file"] = path.with_suffix(".bin").name
    path.with_suffix(".json").write_text(json.dumps(doc, indent=2), encoding="utf-8")
    path.with_suffix(".bin").write_bytes(raw)


def load_field(path) -> PressureField:
    import pathlib

    path = pathlib.Path(path)
    doc = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
    raw = (path.parent / doc.pop("values_file")).read_bytes()
    doc["values_b64"] = base64.b64encode(raw).decode("ascii")
    return field_from_json(doc)


def save_png(field: PressureField, path, vmax: float | None = None) -> None:
    """Render a display-only heatmap PNG (not a data format)."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 4.5))
    extent = (
        field.origin[0] - field.pitch / 2,
        field.origin[0] + (field.values.shape[1] - 0.5) * field.pitch,
        field.origin[1] - field.pitch / 2,
        field.origin[1] + (field.values.shape[0] - 0.5) * field.pitch,
    )
    im = ax.imshow(field.values, origin="lower", cmap="inferno", extent=extent, vmax=vmax)
    ax.set_xlabel("x (cm)")
    ax.set_ylabel("y (cm)")
    fig.colorbar(im, ax=ax, label="kPa")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
