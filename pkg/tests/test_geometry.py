import numpy as np
import pytest

from pressmat.geometry import (CellFill, LayoutError, SensorLayout,
                               channel_to_position, reconstruct_grid)


def brute_force_reconstruct(layout, values):
    """Naive oracle: place each channel on the grid by its position, then
    fill every non-sensor cell with the mean of its in-panel neighbouring
    sensors (scattered-neighbour average, plain double loop)."""
    rows, cols = layout.grid_shape
    grid = np.full((rows, cols), np.nan)
    panel_of = np.full((rows, cols), -1, dtype=int)
    for ch in range(layout.channel_count):
        r, c = layout.grid_cell_of(ch)
        assert np.isnan(grid[r, c]), "two channels share a cell"
        grid[r, c] = values[ch]
        panel_of[r, c] = layout.split_channel(ch)[0]
    prow, pcol = layout.panel_grid_shape
    for r in range(rows):
        for c in range(cols):
            if not np.isnan(grid[r, c]):
                continue
            panel = c // pcol
            neighbours = []
            for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < rows and 0 <= cc < cols and cc // pcol == panel:
                    if not np.isnan(grid[rr, cc]):
                        neighbours.append(grid[rr, cc])
            grid[r, c] = sum(neighbours) / len(neighbours)
    return grid


def test_origin_channel_position(layout):
    assert channel_to_position(layout, 0) == (0.0, 0.0)


def test_offset_lattice_sits_at_half_pitch(layout):
    ch = layout.channel_index(0, 1, 0, 0)
    assert channel_to_position(layout, ch) == (0.5, 0.5)


def test_second_panel_origin(layout):
    ch = layout.channel_index(1, 0, 0, 0)
    assert channel_to_position(layout, ch) == (16.0, 0.0)


def test_all_positions_pairwise_distinct(layout):
    positions = [channel_to_position(layout, ch) for ch in range(layout.channel_count)]
    for i in range(len(positions)):
        for j in range(i + 1, len(positions)):
            assert positions[i] != positions[j]


def test_offset_sensors_are_centroids_of_four_neighbours(layout):
    # Every offset-lattice sensor with four in-lattice neighbours sits at
    # their centroid ("lies among four sensors symmetrically").
    for panel in range(2):
        for row in range(15):
            for col in range(15):
                centre = np.array(channel_to_position(
                    layout, layout.channel_index(panel, 1, row, col)))
                corners = [np.array(channel_to_position(
                    layout, layout.channel_index(panel, 0, row + dr, col + dc)))
                    for dr in (0, 1) for dc in (0, 1)]
                assert np.allclose(centre, np.mean(corners, axis=0))


def test_channel_out_of_range_error(layout):
    with pytest.raises(LayoutError, match=r"1024.*\[0, 1024\)"):
        channel_to_position(layout, 1024)
    with pytest.raises(LayoutError):
        channel_to_position(layout, -1)


def test_channel_count_invariant(layout):
    assert layout.channel_count == 2 * 2 * 16 * 16 == 1024
    assert layout.grid_shape == (32, 64)


def test_constant_field_is_fixed_point(layout):
    grid = reconstruct_grid(layout, np.full(1024, 100.0))
    assert np.array_equal(grid.values, np.full((32, 64), 100.0))
    assert grid.direct_cells().sum() == 1024
    assert ((grid.fill_mask == CellFill.DIRECT) | (grid.fill_mask == CellFill.INTERPOLATED)).all()


def test_single_channel_spreads_quarter_to_hole_neighbours(layout):
    ch = layout.channel_index(0, 0, 8, 8)
    values = np.zeros(1024)
    values[ch] = 40.0
    grid = reconstruct_grid(layout, values)
    r, c = layout.grid_cell_of(ch)
    assert grid.values[r, c] == 40.0
    for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        assert grid.values[r + dr, c + dc] == pytest.approx(10.0)
    direct = grid.direct_cells()
    assert grid.values[direct].sum() == 40.0  # every other direct cell is 0


def test_matches_brute_force_oracle(layout):
    rng = np.random.default_rng(3)
    for _ in range(5):
        values = rng.uniform(0.0, 300.0, 1024)
        fast = reconstruct_grid(layout, values).values
        slow = brute_force_reconstruct(layout, values)
        assert np.abs(fast - slow).max() <= 1e-9


def test_reconstruction_is_linear(layout):
    rng = np.random.default_rng(11)
    u = rng.uniform(0.0, 200.0, 1024)
    v = rng.uniform(0.0, 200.0, 1024)
    a, b = 0.7, 1.9
    combined = reconstruct_grid(layout, a * u + b * v).values
    separate = a * reconstruct_grid(layout, u).values + b * reconstruct_grid(layout, v).values
    scale = np.abs(separate).max()
    assert np.abs(combined - separate).max() <= 1e-12 * max(scale, 1.0)


def test_direct_cells_exact_and_sum_preserved(layout):
    rng = np.random.default_rng(4)
    values = rng.uniform(0.0, 500.0, 1024)
    grid = reconstruct_grid(layout, values)
    grid_rows, grid_cols = _channel_cells(layout)
    assert np.array_equal(grid.values[grid_rows, grid_cols], values)
    assert grid.values[grid.direct_cells()].sum() == values.sum()


def _channel_cells(layout):
    cells = [layout.grid_cell_of(ch) for ch in range(layout.channel_count)]
    return (np.array([r for r, _ in cells]), np.array([c for _, c in cells]))


def test_seam_cells_use_only_same_panel_neighbours(layout):
    # Pressure on the last column of panel 0 must not leak into panel 1.
    values = np.zeros(1024)
    for lattice in (0, 1):
        for row in range(16):
            values[layout.channel_index(0, lattice, row, 15)] = 120.0
    grid = reconstruct_grid(layout, values)
    assert grid.values[:, 32:].max() == 0.0


def test_input_validation(layout):
    with pytest.raises(ValueError, match="1024"):
        reconstruct_grid(layout, np.zeros(1000))
    bad = np.zeros(1024)
    bad[17] = -1.0
    with pytest.raises(ValueError, match="17"):
        reconstruct_grid(layout, bad)
    bad[17] = np.nan
    with pytest.raises(ValueError, match="17"):
        reconstruct_grid(layout, bad)


def test_layout_json_round_trip(layout):
    doc = layout.to_json()
    assert SensorLayout.from_json(doc) == layout
