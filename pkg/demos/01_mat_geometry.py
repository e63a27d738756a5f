"""The composite mat: two panels, two interleaved lattices each.

Walks the channel map, shows the quincunx overlay (a sensor of one lattice
sits centred among four sensors of the other), and demonstrates how one
frame's 1024 channel values become a dense 32x64 half-pitch grid with the
holes filled from their diamond of neighbouring sensors.

Run:  python3 demos/01_mat_geometry.py   (writes PNGs to demos/output/)
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from pressmat import CellFill, SensorLayout, reconstruct_grid

out_dir = pathlib.Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

layout = SensorLayout()
print(f"channels: {layout.channel_count}  (2 panels x 2 lattices x 16x16)")
print(f"dense grid: {layout.grid_shape} cells at {layout.grid_pitch} cm pitch")
print(f"mat area: {layout.grid_shape[1] * layout.grid_pitch:g} x "
      f"{layout.grid_shape[0] * layout.grid_pitch:g} cm")

# A few channel addresses and where they sit physically.
for address in [(0, 0, 0, 0), (0, 1, 0, 0), (1, 0, 0, 0), (1, 1, 15, 15)]:
    channel = layout.channel_index(*address)
    print(f"  channel {channel:4d} = panel {address[0]}, lattice {address[1]}, "
          f"row {address[2]:2d}, col {address[3]:2d} -> {layout.channel_to_position(channel)} cm")

# Plot the overlay for one panel corner: lattice 0 squares, lattice 1 dots.
positions = layout.positions()
fig, ax = plt.subplots(figsize=(5, 5))
corner = positions[(positions[:, 0] <= 5) & (positions[:, 1] <= 5)]
on_grid = corner[np.isclose(corner % 1.0, 0).all(axis=1)]
offset = corner[~np.isclose(corner % 1.0, 0).all(axis=1)]
ax.scatter(on_grid[:, 0], on_grid[:, 1], marker="s", s=80, label="lattice 0 (1/cm$^2$)")
ax.scatter(offset[:, 0], offset[:, 1], marker="o", s=40, label="lattice 1 (+0.5, +0.5)")
ax.set_xlabel("x (cm)")
ax.set_ylabel("y (cm)")
ax.legend()
ax.set_title("Quincunx overlay doubles the sensor density")
fig.savefig(out_dir / "01_overlay.png", dpi=120, bbox_inches="tight")
print(f"wrote {out_dir / '01_overlay.png'}")

# Reconstruct a frame with a single loaded sensor: its four hole neighbours
# each receive a quarter of its value (their other contributors are zero).
values = np.zeros(layout.channel_count)
hot = layout.channel_index(0, 0, 8, 8)
values[hot] = 100.0
grid = reconstruct_grid(layout, values)
r, c = layout.grid_cell_of(hot)
print(f"\nsingle 100 kPa sensor at grid cell {(r, c)}:")
print(grid.values[r - 2:r + 3, c - 2:c + 3])
print("direct cells:", int((grid.fill_mask == CellFill.DIRECT).sum()),
      " interpolated:", int((grid.fill_mask == CellFill.INTERPOLATED).sum()))

fig, ax = plt.subplots(figsize=(8, 4))
im = ax.imshow(grid.values[r - 4:r + 5, c - 4:c + 5], origin="lower", cmap="inferno")
ax.set_title("Impulse response of the hole-filling reconstruction")
fig.colorbar(im, ax=ax, label="kPa")
fig.savefig(out_dir / "01_impulse.png", dpi=120, bbox_inches="tight")
print(f"wrote {out_dir / '01_impulse.png'}")
