"""Building the counts -> kPa calibration curve.

Replays the bench procedure: sweep known pressures up and down with the
weight-bearing base (here: a uniform pressure on the simulated sensor),
average the loading and unloading branches onto a common grid, and fit a
monotone piecewise cubic through the mean. Then check how well the curve
recovers ground truth, with and without hysteresis.

Run:  python3 demos/03_calibration.py
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from pressmat import (DividerConfig, SensorModel, adc_quantize, build_curve,
                      divider_voltage, sweep_samples)

out_dir = pathlib.Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

divider = DividerConfig()
model = SensorModel()  # default 5% hysteresis band
samples = sweep_samples(model, divider)
loading = [(s.applied_pressure, s.observed_count) for s in samples if s.branch == "loading"]
unloading = [(s.applied_pressure, s.observed_count) for s in samples if s.branch == "unloading"]
print(f"{len(loading)} loading + {len(unloading)} unloading samples")

curve = build_curve(samples, divider)
lo, hi = curve.valid_range
print(f"fitted {len(curve.knot_counts)} knots over counts [{lo}, {hi}] "
      f"-> [{curve.evaluate(lo):.1f}, {curve.evaluate(hi):.1f}] kPa")

fig, ax = plt.subplots(figsize=(7, 5))
ax.plot(*zip(*[(c, p) for p, c in loading]), ".", ms=3, label="loading branch")
ax.plot(*zip(*[(c, p) for p, c in unloading]), ".", ms=3, label="unloading branch")
counts = np.linspace(lo, hi, 400)
ax.plot(counts, curve.evaluate(counts), "k-", lw=1.5, label="fitted mean curve")
ax.set_xlabel("ADC count")
ax.set_ylabel("pressure (kPa)")
ax.legend()
ax.set_title("Loading/unloading branches and the fitted mean")
fig.savefig(out_dir / "03_calibration.png", dpi=120, bbox_inches="tight")
print(f"wrote {out_dir / '03_calibration.png'}")

# Recovery error without hysteresis: the quantization floor dominates.
clean = SensorModel(hysteresis_band=0.0)
curve_clean = build_curve(sweep_samples(clean, divider), divider)
pressures = np.linspace(10, 600, 60)
errors = []
for p in pressures:
    count = int(adc_quantize(divider, divider_voltage(divider, clean.mean_resistance(p))))
    errors.append(abs(curve_clean.evaluate(count) - p))
errors = np.array(errors)
print(f"\nhysteresis off: worst recovery error {errors.max():.2f} kPa "
      f"(tolerance is max(2 kPa, 3%))")
within = errors <= np.maximum(2.0, 0.03 * pressures)
print(f"  {within.sum()}/{len(pressures)} test pressures inside tolerance")
