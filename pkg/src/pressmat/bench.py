"""Single-threaded end-to-end throughput harness.

Measures the full per-frame chain -- render -> scan -> encode -> decode ->
calibrate -> reconstruct -- against the 155 Hz acquisition budget
(1/155 s = 6.45 ms per frame), reporting achieved fps and per-stage latency
percentiles.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .calibration import CalibrationCurve, build_curve, sweep_samples
from .geometry import SensorLayout, reconstruct_grid
from .protocol import StreamDecoder, encode_frame
from .scenes import normal_stance
from .simulate import SCAN_RATE_HZ, MatSimulator

STAGES = ("scan", "encode", "decode", "calibrate", "reconstruct")


@dataclass
class BenchResult:
    frames: int
    elapsed_s: float
    stage_latencies: dict  # stage -> np.ndarray of seconds

    @property
    def fps(self) -> float:
        return self.frames / self.elapsed_s

    def percentile(self, stage: str, q: float) -> float:
        return float(np.percentile(self.stage_latencies[stage], q))

    def p99_budget_sum(self) -> float:
        return sum(self.percentile(s, 99) for s in STAGES)

    def summary(self) -> str:
        lines = [
            f"frames: {self.frames}   elapsed: {self.elapsed_s:.2f} s   "
            f"fps: {self.fps:.1f} (target >= {SCAN_RATE_HZ:g})",
            f"{'stage':<12s}{'p50 us':>10s}{'p99 us':>10s}",
        ]
        for stage in STAGES:
            lines.append(f"{stage:<12s}{self.percentile(stage, 50) * 1e6:>10.1f}"
                         f"{self.percentile(stage, 99) * 1e6:>10.1f}")
        budget = 1.0 / SCAN_RATE_HZ
        lines.append(f"p99 sum: {self.p99_budget_sum() * 1e3:.3f} ms"
                     f" (frame budget {budget * 1e3:.2f} ms)")
        return "\n".join(lines)


def run_bench(seconds: float = 10.0, seed: int = 0,
              curve: CalibrationCurve | None = None) -> BenchResult:
    """Run the chain flat out for at least ``seconds`` of wall time."""
    layout = SensorLayout()
    sim = MatSimulator(normal_stance(), layout=layout, seed=seed)
    if curve is None:
        curve = build_curve(sweep_samples(sim.model, sim.divider), sim.divider)
    decoder = StreamDecoder()
    latencies = {stage: [] for stage in STAGES}

    frames = 0
    start = time.perf_counter()
    deadline = start + seconds
    while time.perf_counter() < deadline:
        t0 = time.perf_counter()
        frame = sim.scan_frame(sim.frame_time(frames))
        t1 = time.perf_counter()
        wire = encode_frame(frame)
        t2 = time.perf_counter()
        decoded = decoder.feed(wire)
        t3 = time.perf_counter()
        kpa, _ = curve.apply(decoded[0])
        t4 = time.perf_counter()
        reconstruct_grid(layout, kpa)
        t5 = time.perf_counter()
        for stage, dt in zip(STAGES, (t1 - t0, t2 - t1, t3 - t2, t4 - t3, t5 - t4)):
            latencies[stage].append(dt)
        frames += 1
    elapsed = time.perf_counter() - start
    return BenchResult(frames=frames, elapsed_s=elapsed,
                       stage_latencies={k: np.array(v) for k, v in latencies.items()})
