"""Behavioural mat emulator: pressure scenes, piezoresistive transduction
with hysteresis, the potential divider and the 12-bit ADC scan.

The electronics are modelled at the transfer-function level, not the circuit
level: pressure -> sensor resistance (two hysteresis branches blended at
reversals) -> divider voltage -> quantized count.  Everything is
deterministic for a given seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .frames import RawFrame
from .geometry import SensorLayout

SCAN_RATE_HZ = 155.0


@dataclass(frozen=True)
class DividerConfig:
    """Potential divider and ADC front-end constants."""

    r_fixed: float = 240.0  # ohm
    v_supply: float = 3.3  # volt
    adc_bits: int = 12
    adc_vref: float = 3.3  # volt

    def __post_init__(self):
        if self.r_fixed <= 0:
            raise ValueError("r_fixed must be positive")
        if not 0 < self.v_supply <= self.adc_vref:
            # v_supply <= vref keeps the ADC input physically incapable of
            # exceeding full scale (over-voltage protection by construction).
            raise ValueError("require 0 < v_supply <= adc_vref")
        if self.adc_bits != 12:
            raise ValueError("only 12-bit conversion is modelled")

    @property
    def adc_max(self) -> int:
        return (1 << self.adc_bits) - 1

    def to_json(self) -> dict:
        return {
            "r_fixed_ohm": self.r_fixed,
            "v_supply_v": self.v_supply,
            "adc_bits": self.adc_bits,
            "adc_vref_v": self.adc_vref,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "DividerConfig":
        return cls(
            r_fixed=doc["r_fixed_ohm"],
            v_supply=doc["v_supply_v"],
            adc_bits=doc["adc_bits"],
            adc_vref=doc["adc_vref_v"],
        )


@dataclass(frozen=True)
class SensorModel:
    """Piezoresistive element: a convex falling resistance curve with two
    hysteresis branches.

    The mean law is ``R(P) = r_min + (r_max - r_min) / (1 + (P/p_half)**exponent)``.
    The loading branch sits at ``R*(1 + band)``, the unloading branch at
    ``R*(1 - band)``; the per-sensor branch state blends exponentially between
    them over a pressure scale of ``1/blend_rate`` so reversals stay
    continuous.  All defaults are configuration, not physical truth claims.
    """

    r_min: float = 200.0  # ohm
    r_max: float = 30_000.0  # ohm
    p_half: float = 80.0  # kPa at which the variable part halves
    exponent: float = 1.2
    hysteresis_band: float = 0.05  # fraction of mean resistance
    blend_rate: float = 0.08  # 1/kPa

    def __post_init__(self):
        if not 0 < self.r_min < self.r_max:
            raise ValueError("require 0 < r_min < r_max")
        if self.p_half <= 0 or self.exponent <= 0:
            raise ValueError("p_half and exponent must be positive")
        if not 0 <= self.hysteresis_band < 1:
            raise ValueError("hysteresis_band must be in [0, 1)")
        if self.blend_rate <= 0:
            raise ValueError("blend_rate must be positive")

    def mean_resistance(self, pressure):
        """Branch-free resistance law; strictly decreasing in pressure."""
        p = np.asarray(pressure, dtype=float)
        if np.any(p < 0):
            raise ValueError("pressure must be non-negative")
        return self.r_min + (self.r_max - self.r_min) / (1.0 + (p / self.p_half) ** self.exponent)

    def to_json(self) -> dict:
        return {
            "r_min_ohm": self.r_min,
            "r_max_ohm": self.r_max,
            "p_half_kpa": self.p_half,
            "exponent": self.exponent,
            "hysteresis_band": self.hysteresis_band,
            "blend_rate_per_kpa": self.blend_rate,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SensorModel":
        return cls(
            r_min=doc["r_min_ohm"],
            r_max=doc["r_max_ohm"],
            p_half=doc["p_half_kpa"],
            exponent=doc["exponent"],
            hysteresis_band=doc["hysteresis_band"],
            blend_rate=doc["blend_rate_per_kpa"],
        )


class BranchState:
    """Per-sensor hysteresis memory.

    ``blend`` is -1 on the unloading branch, +1 on the loading branch, 0 for
    a fresh sensor (which therefore reads the mean curve, i.e. exactly
    ``r_max`` when unloaded).
    """

    def __init__(self, n_sensors: int):
        self.blend = np.zeros(n_sensors)
        self.last_pressure = np.zeros(n_sensors)

    def copy(self) -> "BranchState":
        out = BranchState(self.blend.size)
        out.blend = self.blend.copy()
        out.last_pressure = self.last_pressure.copy()
        return out

    def advance(self, model: SensorModel, pressure: np.ndarray) -> None:
        """Move each sensor's blend toward the branch implied by its
        pressure-change direction, at a rate set by the pressure travelled."""
        delta = pressure - self.last_pressure
        moving = delta != 0
        if np.any(moving):
            target = np.sign(delta[moving])
            fade = np.exp(-model.blend_rate * np.abs(delta[moving]))
            self.blend[moving] = target + (self.blend[moving] - target) * fade
        self.last_pressure = pressure.copy()


def resistance_of(model: SensorModel, pressure, state: BranchState | None = None):
    """Resistance of each sensor given its pressure and hysteresis state.

    Without a state (or with the band at 0) this is the mean law.
    """
    base = model.mean_resistance(pressure)
    if state is None or model.hysteresis_band == 0:
        return base
    return base * (1.0 + state.blend * model.hysteresis_band)


def divider_voltage(cfg: DividerConfig, r_sensor):
    """Output of the potential divider: v_supply * r_fixed / (r_fixed + r_sensor)."""
    r = np.asarray(r_sensor, dtype=float)
    if np.any(r < 0):
        raise ValueError("sensor resistance must be non-negative")
    with np.errstate(divide="ignore"):
        v = cfg.v_supply * cfg.r_fixed / (cfg.r_fixed + r)
    return np.where(np.isinf(r), 0.0, v)


def adc_quantize(cfg: DividerConfig, volts):
    """Round to the nearest 12-bit count, clamped to [0, 4095]."""
    v = np.asarray(volts, dtype=float)
    counts = np.rint(v / cfg.adc_vref * cfg.adc_max)
    return np.clip(counts, 0, cfg.adc_max).astype(np.uint16)


@dataclass(frozen=True)
class Blob:
    """One anisotropic Gaussian pressure source."""

    label: str
    center: tuple[float, float]  # cm
    amplitude: float  # kPa at the peak
    scales: tuple[float, float]  # Gaussian sigmas along the blob axes, cm
    rotation: float = 0.0  # radians, axis rotation

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "center_cm": list(self.center),
            "amplitude_kpa": self.amplitude,
            "scales_cm": list(self.scales),
            "rotation_rad": self.rotation,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Blob":
        return cls(
            label=doc["label"],
            center=tuple(doc["center_cm"]),
            amplitude=doc["amplitude_kpa"],
            scales=tuple(doc["scales_cm"]),
            rotation=doc.get("rotation_rad", 0.0),
        )


BLOB_LABELS = (
    "heel-L", "heel-R", "met1-2-L", "met1-2-R", "met5-L", "met5-R",
    "midfoot", "callus-hotspot",
)


@dataclass(frozen=True)
class Scene:
    """Synthetic ground-truth pressure field: a sum of labelled blobs, an
    optional postural sway drift and additive sensor noise."""

    blobs: tuple[Blob, ...]
    sway_amplitude: float = 0.0  # cm
    sway_frequency: float = 0.0  # Hz
    noise_sigma: float = 0.0  # kPa
    body_weight_kg: float | None = None  # if set, amplitudes are rescaled

    def __post_init__(self):
        for blob in self.blobs:
            if not math.isfinite(blob.amplitude) or blob.amplitude < 0:
                raise ValueError(f"blob {blob.label!r}: amplitude must be finite and >= 0")
            if min(blob.scales) <= 0:
                raise ValueError(f"blob {blob.label!r}: scales must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.body_weight_kg is not None:
            object.__setattr__(self, "blobs", _scaled_to_weight(self.blobs, self.body_weight_kg))

    def centers_at(self, t: float) -> np.ndarray:
        centers = np.array([b.center for b in self.blobs], dtype=float)
        if self.sway_amplitude and self.sway_frequency:
            phase = 2.0 * math.pi * self.sway_frequency * t
            centers[:, 0] += self.sway_amplitude * math.sin(phase)
            centers[:, 1] += 0.5 * self.sway_amplitude * math.cos(phase)
        return centers

    def to_json(self) -> dict:
        doc = {
            "blobs": [b.to_json() for b in self.blobs],
            "noise_sigma_kpa": self.noise_sigma,
        }
        if self.sway_amplitude:
            doc["sway"] = {"amplitude_cm": self.sway_amplitude, "frequency_hz": self.sway_frequency}
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "Scene":
        sway = doc.get("sway") or {}
        return cls(
            blobs=tuple(Blob.from_json(b) for b in doc.get("blobs", [])),
            sway_amplitude=sway.get("amplitude_cm", 0.0),
            sway_frequency=sway.get("frequency_hz", 0.0),
            noise_sigma=doc.get("noise_sigma_kpa", 0.0),
            body_weight_kg=doc.get("body_weight_kg"),
        )


def _scaled_to_weight(blobs: tuple[Blob, ...], weight_kg: float) -> tuple[Blob, ...]:
    """Rescale blob amplitudes so the analytic field integral carries the
    subject's weight.  1 kPa*cm^2 = 0.1 N."""
    if not blobs:
        return blobs
    target_n = weight_kg * 9.80665
    integral = sum(b.amplitude * 2.0 * math.pi * b.scales[0] * b.scales[1] for b in blobs)
    if integral <= 0:
        raise ValueError("cannot scale a zero-pressure scene to a body weight")
    scale = target_n / (0.1 * integral)
    return tuple(replace(b, amplitude=b.amplitude * scale) for b in blobs)


def render_scene(scene: Scene, t: float, positions: np.ndarray,
                 rng: np.random.Generator | None = None) -> np.ndarray:
    """Evaluate the scene's true pressure at each sensor position.

    Noise (if configured) requires an rng; the result is clipped at zero so
    rendered pressure stays physical.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    pos = np.asarray(positions, dtype=float)
    out = np.zeros(len(pos))
    if scene.blobs:
        centers = scene.centers_at(t)
        for blob, center in zip(scene.blobs, centers):
            dx = pos[:, 0] - center[0]
            dy = pos[:, 1] - center[1]
            c, s = math.cos(blob.rotation), math.sin(blob.rotation)
            u = (c * dx + s * dy) / blob.scales[0]
            v = (-s * dx + c * dy) / blob.scales[1]
            out += blob.amplitude * np.exp(-0.5 * (u * u + v * v))
    if scene.noise_sigma > 0:
        if rng is None:
            raise ValueError("noise_sigma > 0 requires an rng")
        out += rng.normal(0.0, scene.noise_sigma, size=out.shape)
    return np.clip(out, 0.0, None)


class MatSimulator:
    """Single-owner stateful emulator producing RawFrames.

    Holds the per-sensor hysteresis states and the noise RNG; one producer
    should drive it.  The frames it returns are immutable values.
    """

    def __init__(self, scene: Scene, layout: SensorLayout | None = None,
                 model: SensorModel | None = None,
                 divider: DividerConfig | None = None, seed: int = 0,
                 rate_hz: float = SCAN_RATE_HZ):
        self.layout = layout or SensorLayout()
        self.model = model or SensorModel()
        self.divider = divider or DividerConfig()
        self.scene = scene
        self.rate_hz = float(rate_hz)
        self._positions = self.layout.positions()
        self._rng = np.random.default_rng(seed)
        self._state = BranchState(self.layout.channel_count)
        self._seq = 0
        self._last_t = -math.inf

    @property
    def branch_state(self) -> BranchState:
        return self._state

    def frame_time(self, index: int) -> float:
        return index / self.rate_hz

    def scan_frame(self, t: float) -> RawFrame:
        """Render, transduce and digitize one frame at simulated time t."""
        if t < self._last_t:
            raise ValueError(f"clock went backwards: {t} < {self._last_t}")
        self._last_t = t
        pressures = render_scene(self.scene, t, self._positions, self._rng)
        self._state.advance(self.model, pressures)
        r = resistance_of(self.model, pressures, self._state)
        counts = adc_quantize(self.divider, divider_voltage(self.divider, r))
        frame = RawFrame(
            seq=self._seq,
            timestamp_us=round(t * 1_000_000),
            counts=counts,
        )
        self._seq += 1
        return frame

    def run(self, n_frames: int):
        """Yield n frames on the exact simulated 1/rate clock."""
        start = self._seq
        for k in range(n_frames):
            yield self.scan_frame(self.frame_time(start + k))


def load_scene(path_or_doc) -> Scene:
    """Load a Scene from a JSON file path or an already-parsed dict."""
    if isinstance(path_or_doc, dict):
        return Scene.from_json(path_or_doc)
    with open(path_or_doc, "r", encoding="utf-8") as fh:
        return Scene.from_json(json.load(fh))
