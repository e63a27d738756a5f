"""The per-sensor signal chain: pressure -> resistance -> voltage -> count.

Traces the piezoresistive law with its hysteresis loop (loading reads a
higher resistance than unloading at the same pressure), the 240-ohm
potential divider that keeps the output inside the 3.3 V rail, and the
12-bit quantization.

Run:  python3 demos/02_signal_chain.py
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from pressmat import (BranchState, DividerConfig, SensorModel, adc_quantize,
                      divider_voltage, resistance_of)

out_dir = pathlib.Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

model = SensorModel()
divider = DividerConfig()
print(f"sensor model: r_max={model.r_max:g} ohm unloaded, r_min={model.r_min:g} ohm "
      f"saturated, half-scale at {model.p_half:g} kPa")
print(f"divider: {divider.r_fixed:g} ohm fixed leg, {divider.v_supply:g} V supply, "
      f"{divider.adc_bits}-bit ADC")

# Sweep a triangle load profile and watch the loop open up.
up = np.linspace(0, 500, 400)
path = np.concatenate([up, up[::-1]])
state = BranchState(1)
resistances = []
for p in path:
    state.advance(model, np.array([p]))
    resistances.append(float(resistance_of(model, np.array([p]), state)[0]))
resistances = np.array(resistances)

fig, axes = plt.subplots(1, 3, figsize=(14, 4))
axes[0].plot(path[:400], resistances[:400] / 1e3, label="loading")
axes[0].plot(path[400:], resistances[400:] / 1e3, label="unloading")
axes[0].set_xlabel("pressure (kPa)")
axes[0].set_ylabel("resistance (k$\\Omega$)")
axes[0].set_yscale("log")
axes[0].legend()
axes[0].set_title("Hysteresis loop")

volts = divider_voltage(divider, resistances)
axes[1].plot(path, volts)
axes[1].set_xlabel("pressure (kPa)")
axes[1].set_ylabel("divider output (V)")
axes[1].set_title("Potential divider")

counts = adc_quantize(divider, volts)
axes[2].plot(path, counts)
axes[2].set_xlabel("pressure (kPa)")
axes[2].set_ylabel("ADC count")
axes[2].set_title("12-bit conversion")
fig.savefig(out_dir / "02_signal_chain.png", dpi=120, bbox_inches="tight")
print(f"wrote {out_dir / '02_signal_chain.png'}")

# Spot values along the chain.
for p in (0.0, 50.0, 150.0, 400.0):
    state = BranchState(1)
    state.advance(model, np.array([p]))
    r = float(resistance_of(model, np.array([p]), state)[0])
    v = float(divider_voltage(divider, r))
    count = int(adc_quantize(divider, v))
    print(f"  {p:6.1f} kPa -> {r:9.1f} ohm -> {v:6.4f} V -> count {count:4d}")

mid = len(up) // 2
width = resistances[mid] - resistances[len(path) - 1 - mid]
print(f"\nloop width at {up[mid]:.0f} kPa: {width:.0f} ohm "
      f"(~2 x band x R_mean = {2 * model.hysteresis_band * float(model.mean_resistance(up[mid])):.0f} ohm)")
