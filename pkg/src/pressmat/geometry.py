"""Composite mat geometry: interleaved sensor lattices and grid reconstruction.

The mat is built from two panels placed side by side.  Each panel stacks two
16x16 sensor lattices with 1 cm pitch, the second lattice shifted by half a
pitch in both axes so that each of its sensors sits at the centroid of four
sensors of the first lattice (a quincunx).  The union of all sensors lives on
a dense half-pitch grid; half of those grid cells coincide with a physical
sensor and the other half ("holes") are filled by averaging the diagonal
sensor neighbours.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import IntEnum

import numpy as np


class CellFill(IntEnum):
    """Provenance of one cell of a reconstructed grid."""

    OUTSIDE = 0
    DIRECT = 1
    INTERPOLATED = 2


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class SensorLayout:
    """Physical arrangement of the composite mat's sensor channels.

    Coordinates are centimetres.  Channel indices enumerate
    (panel, lattice, row, col) in row-major order, 256 channels per lattice.
    """

    panel_count: int = 2
    lattices_per_panel: int = 2
    lattice_dims: tuple[int, int] = (16, 16)  # (rows, cols)
    lattice_pitch: float = 1.0
    lattice_offset: tuple[float, float] = (0.5, 0.5)  # second lattice shift (x, y)
    panel_origins: tuple[tuple[float, float], ...] = ((0.0, 0.0), (16.0, 0.0))

    def __post_init__(self):
        if self.panel_count != len(self.panel_origins):
            raise LayoutError("panel_origins must list one origin per panel")
        if self.lattices_per_panel != 2:
            raise LayoutError("layout supports exactly two lattices per panel")
        ox, oy = self.lattice_offset
        half = self.lattice_pitch / 2.0
        if (ox, oy) != (half, half):
            raise LayoutError("second lattice must sit at the half-pitch diagonal offset")
        step = self.grid_pitch
        for px, py in self.panel_origins:
            if abs(px / step - round(px / step)) > 1e-9 or abs(py / step - round(py / step)) > 1e-9:
                raise LayoutError("panel origins must lie on the half-pitch grid")

    # -- derived constants ---------------------------------------------------

    @property
    def channels_per_lattice(self) -> int:
        return self.lattice_dims[0] * self.lattice_dims[1]

    @property
    def channel_count(self) -> int:
        return self.panel_count * self.lattices_per_panel * self.channels_per_lattice

    @property
    def grid_pitch(self) -> float:
        """Pitch of the dense reconstruction grid (half the lattice pitch)."""
        return self.lattice_pitch / 2.0

    @property
    def panel_grid_shape(self) -> tuple[int, int]:
        """(rows, cols) of one panel's dense half-pitch grid."""
        return (2 * self.lattice_dims[0], 2 * self.lattice_dims[1])

    @property
    def grid_shape(self) -> tuple[int, int]:
        """(rows, cols) of the composite dense grid covering all panels."""
        rows, cols = self.panel_grid_shape
        rmax = cmax = 0
        for px, py in self.panel_origins:
            r0 = round(py / self.grid_pitch)
            c0 = round(px / self.grid_pitch)
            rmax = max(rmax, r0 + rows)
            cmax = max(cmax, c0 + cols)
        return (rmax, cmax)

    # -- channel addressing --------------------------------------------------

    def split_channel(self, channel: int) -> tuple[int, int, int, int]:
        """Decompose a channel index into (panel, lattice, row, col)."""
        if not 0 <= channel < self.channel_count:
            raise LayoutError(
                f"channel {channel} out of range [0, {self.channel_count})"
            )
        per_lat = self.channels_per_lattice
        panel, rest = divmod(channel, self.lattices_per_panel * per_lat)
        lattice, rest = divmod(rest, per_lat)
        row, col = divmod(rest, self.lattice_dims[1])
        return panel, lattice, row, col

    def channel_index(self, panel: int, lattice: int, row: int, col: int) -> int:
        nrow, ncol = self.lattice_dims
        if not (0 <= panel < self.panel_count and 0 <= lattice < self.lattices_per_panel
                and 0 <= row < nrow and 0 <= col < ncol):
            raise LayoutError(f"invalid address ({panel}, {lattice}, {row}, {col})")
        return ((panel * self.lattices_per_panel + lattice) * self.channels_per_lattice
                + row * ncol + col)

    def channel_to_position(self, channel: int) -> tuple[float, float]:
        """Physical centre (x, y) in cm of a channel's sensor."""
        panel, lattice, row, col = self.split_channel(channel)
        px, py = self.panel_origins[panel]
        x = px + col * self.lattice_pitch + lattice * self.lattice_offset[0]
        y = py + row * self.lattice_pitch + lattice * self.lattice_offset[1]
        return (x, y)

    def positions(self) -> np.ndarray:
        """All sensor positions as a (channel_count, 2) array of (x, y) cm."""
        return self._tables()[0]

    def grid_cell_of(self, channel: int) -> tuple[int, int]:
        """(row, col) of the dense-grid cell holding this channel's sensor."""
        x, y = self.channel_to_position(channel)
        return (round(y / self.grid_pitch), round(x / self.grid_pitch))

    # -- cached lookup tables --------------------------------------------------

    def _tables(self):
        cached = _TABLE_CACHE.get(id(self))
        if cached is not None and cached[0] is self:
            return cached[1]
        per_lat = self.channels_per_lattice
        nrow, ncol = self.lattice_dims
        pos = np.empty((self.channel_count, 2))
        rows = np.empty(self.channel_count, dtype=np.intp)
        cols = np.empty(self.channel_count, dtype=np.intp)
        step = self.grid_pitch
        ch = 0
        for panel in range(self.panel_count):
            px, py = self.panel_origins[panel]
            for lattice in range(self.lattices_per_panel):
                off = lattice * self.lattice_offset[0], lattice * self.lattice_offset[1]
                for row in range(nrow):
                    y = py + row * self.lattice_pitch + off[1]
                    for col in range(ncol):
                        x = px + col * self.lattice_pitch + off[0]
                        pos[ch] = (x, y)
                        rows[ch] = round(y / step)
                        cols[ch] = round(x / step)
                        ch += 1
        shape = self.grid_shape
        direct = np.zeros(shape, dtype=bool)
        direct[rows, cols] = True
        if direct.sum() != self.channel_count:
            raise LayoutError("channels do not map to distinct grid cells")

        # Per-panel neighbour counts for the hole cells.  A hole's nearest
        # sensors are its four grid-axis neighbours (they form a diamond
        # around it; grid-diagonal cells of a hole are holes themselves).
        # Holes only average sensors from their own panel (panels are
        # electrically independent), so the count drops to 2-3 along panel
        # edges and seams.
        counts = np.zeros(shape)
        prow, pcol = self.panel_grid_shape
        panel_slices = []
        for px, py in self.panel_origins:
            r0 = round(py / step)
            c0 = round(px / step)
            sl = (slice(r0, r0 + prow), slice(c0, c0 + pcol))
            panel_slices.append(sl)
            ones = np.pad(direct[sl].astype(float), 1)
            counts[sl] = (ones[:-2, 1:-1] + ones[2:, 1:-1] + ones[1:-1, :-2] + ones[1:-1, 2:])
        tables = (pos, rows, cols, direct, counts, panel_slices)
        _TABLE_CACHE[id(self)] = (self, tables)
        return tables

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "panel_count": self.panel_count,
            "lattices_per_panel": self.lattices_per_panel,
            "lattice_dims": list(self.lattice_dims),
            "lattice_pitch_cm": self.lattice_pitch,
            "lattice_offset_cm": list(self.lattice_offset),
            "panel_origins_cm": [list(p) for p in self.panel_origins],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SensorLayout":
        return cls(
            panel_count=doc["panel_count"],
            lattices_per_panel=doc["lattices_per_panel"],
            lattice_dims=tuple(doc["lattice_dims"]),
            lattice_pitch=doc["lattice_pitch_cm"],
            lattice_offset=tuple(doc["lattice_offset_cm"]),
            panel_origins=tuple(tuple(p) for p in doc["panel_origins_cm"]),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


# Keyed by id(layout); the stored layout reference keeps the key valid.
_TABLE_CACHE: dict[int, tuple[SensorLayout, tuple]] = {}


@dataclass
class RawGrid:
    """Dense half-pitch pressure grid reconstructed from one frame.

    ``values`` holds kPa on the composite grid; ``fill_mask`` records per cell
    whether the value came straight from a sensor or was interpolated.
    """

    values: np.ndarray
    fill_mask: np.ndarray
    pitch: float
    origin: tuple[float, float] = (0.0, 0.0)

    def direct_cells(self) -> np.ndarray:
        return self.fill_mask == CellFill.DIRECT


def channel_to_position(layout: SensorLayout, channel: int) -> tuple[float, float]:
    """Physical centre of a channel's sensor, in cm."""
    return layout.channel_to_position(channel)


def reconstruct_grid(layout: SensorLayout, channel_values) -> RawGrid:
    """Place per-channel values on the dense grid and fill the quincunx holes.

    Cells that coincide with a sensor take its value exactly.  Every other
    cell is the mean of the sensors in the diamond around it (its in-panel
    grid-axis neighbours: 4 in the interior, 2-3 along edges).  The operation
    is linear in the input.
    """
    values = np.asarray(channel_values, dtype=float)
    if values.shape != (layout.channel_count,):
        raise ValueError(
            f"expected {layout.channel_count} channel values, got shape {values.shape}"
        )
    bad = np.flatnonzero(~np.isfinite(values) | (values < 0))
    if bad.size:
        raise ValueError(f"channel {bad[0]}: value {values[bad[0]]} is negative or non-finite")

    _, rows, cols, direct, counts, panel_slices = layout._tables()
    shape = layout.grid_shape
    grid = np.zeros(shape)
    grid[rows, cols] = values

    for sl in panel_slices:
        padded = np.pad(grid[sl], 1)
        sums = padded[:-2, 1:-1] + padded[2:, 1:-1] + padded[1:-1, :-2] + padded[1:-1, 2:]
        holes = ~direct[sl]
        block = grid[sl]
        block[holes] = sums[holes] / counts[sl][holes]

    mask = np.where(direct, np.uint8(CellFill.DIRECT), np.uint8(CellFill.INTERPOLATED))
    return RawGrid(values=grid, fill_mask=mask, pitch=layout.grid_pitch)
