import numpy as np
import pytest

from pressmat.protocol import encode_frame
from pressmat.simulate import (BranchState, Blob, DividerConfig, MatSimulator,
                               Scene, SensorModel, adc_quantize,
                               divider_voltage, render_scene, resistance_of)

# -- resistance law ------------------------------------------------------------


def test_unloaded_resistance_is_r_max():
    model = SensorModel()
    assert resistance_of(model, 0.0) == model.r_max


def test_resistance_saturates_toward_r_min():
    model = SensorModel()
    pressures = np.array([0.0, 50.0, 200.0, 1000.0, 1e5, 1e7])
    r = resistance_of(model, pressures)
    assert np.all(np.diff(r) < 0)
    assert r[-1] == pytest.approx(model.r_min, rel=1e-3)


def test_negative_pressure_rejected():
    with pytest.raises(ValueError, match="non-negative"):
        resistance_of(SensorModel(), -1.0)


def test_branch_monotone_under_fixed_state():
    model = SensorModel()
    state = BranchState(6)
    state.blend[:] = 0.7
    r = resistance_of(model, np.array([0.0, 10.0, 50.0, 100.0, 300.0, 600.0]), state)
    assert np.all(np.diff(r) < 0)


def test_hysteresis_loop_width():
    # Triangle sweep; at mid-pressure the loop's vertical width should be
    # about 2 * band * R_mean (both branches fully blended by then).
    model = SensorModel(hysteresis_band=0.06)
    state = BranchState(1)
    p_max, p_mid = 500.0, 250.0
    up = np.linspace(0.0, p_max, 401)
    r_up = r_down = None
    for p in up:
        state.advance(model, np.array([p]))
        if abs(p - p_mid) < 1e-9:
            r_up = float(resistance_of(model, np.array([p]), state)[0])
    for p in up[::-1]:
        state.advance(model, np.array([p]))
        if abs(p - p_mid) < 1e-9:
            r_down = float(resistance_of(model, np.array([p]), state)[0])
    width = r_up - r_down
    expected = 2.0 * model.hysteresis_band * float(model.mean_resistance(p_mid))
    assert width == pytest.approx(expected, rel=0.10)
    assert r_down < r_up  # unloading branch reads lower resistance


def test_full_cycle_returns_branch_state_to_rest():
    # After one conditioning cycle the load/unload loop is periodic: the
    # state at the bottom of cycle k+1 equals the state at the bottom of
    # cycle k.
    model = SensorModel()
    state = BranchState(1)
    cycle = np.concatenate([np.linspace(0, 400, 200), np.linspace(400, 0, 200)])
    for p in cycle:
        state.advance(model, np.array([p]))
    rest = state.copy()
    for p in cycle:
        state.advance(model, np.array([p]))
    assert state.blend[0] == pytest.approx(rest.blend[0], abs=1e-9)
    assert state.last_pressure[0] == rest.last_pressure[0]


def test_reversal_is_continuous():
    model = SensorModel(hysteresis_band=0.08)
    state = BranchState(1)
    trace = []
    path = np.concatenate([np.linspace(0, 300, 300), np.linspace(300, 0, 300)])
    for p in path:
        state.advance(model, np.array([p]))
        trace.append(float(resistance_of(model, np.array([p]), state)[0]))
    jumps = np.abs(np.diff(trace))
    step_scale = np.abs(np.diff(model.mean_resistance(path))).max()
    # No step should jump more than a few times the branch-free step size.
    assert jumps.max() < 5 * step_scale


# -- divider + ADC ---------------------------------------------------------------


def test_divider_halves_supply_at_matched_resistance(divider):
    assert divider_voltage(divider, 240.0) == pytest.approx(1.65)


def test_divider_open_circuit_reads_zero(divider):
    assert divider_voltage(divider, np.inf) == 0.0
    assert divider_voltage(divider, 1e12) == pytest.approx(0.0, abs=1e-9)


def test_divider_short_reads_full_supply(divider):
    # The over-voltage cap is the supply itself.
    assert divider_voltage(divider, 0.0) == pytest.approx(3.3)


def test_divider_range(divider):
    rng = np.random.default_rng(0)
    v = divider_voltage(divider, rng.uniform(0, 1e6, 1000))
    assert np.all((v >= 0) & (v <= divider.v_supply))


def test_divider_config_invariants():
    with pytest.raises(ValueError):
        DividerConfig(r_fixed=0.0)
    with pytest.raises(ValueError):
        DividerConfig(v_supply=5.0, adc_vref=3.3)  # would defeat over-voltage protection


def test_adc_quantize_corners(divider):
    assert adc_quantize(divider, 0.0) == 0
    assert adc_quantize(divider, 3.3) == 4095
    assert adc_quantize(divider, 1.65) == 2048  # round(0.5 * 4095)


def test_adc_quantize_clamps(divider):
    assert adc_quantize(divider, -0.5) == 0
    assert adc_quantize(divider, 99.0) == 4095


# -- scene rendering --------------------------------------------------------------


def test_empty_scene_renders_zero(layout):
    out = render_scene(Scene(blobs=()), 0.0, layout.positions())
    assert np.array_equal(out, np.zeros(layout.channel_count))


def test_blob_peak_at_sensor(layout):
    scene = Scene(blobs=(Blob("heel-L", (10.0, 4.0), 150.0, (1.5, 2.0)),))
    out = render_scene(scene, 0.0, layout.positions())
    ch = np.argmax(out)
    x, y = layout.channel_to_position(int(ch))
    assert (x, y) == (10.0, 4.0)
    assert out[ch] == pytest.approx(150.0)


def test_body_weight_auto_scaling():
    # Numerical integration of the rendered field should carry the target
    # weight: 1 kPa*cm^2 = 0.1 N.
    scene = Scene(
        blobs=(Blob("heel-L", (10.0, 8.0), 100.0, (1.2, 1.5)),
               Blob("heel-R", (22.0, 8.0), 140.0, (1.2, 1.5))),
        body_weight_kg=70.0,
    )
    step = 0.1
    xs = np.arange(0.0, 32.0, step)
    ys = np.arange(0.0, 16.0, step)
    gx, gy = np.meshgrid(xs, ys)
    points = np.column_stack([gx.ravel(), gy.ravel()])
    pressure = render_scene(scene, 0.0, points)
    force_n = 0.1 * pressure.sum() * step * step
    assert force_n == pytest.approx(70.0 * 9.80665, rel=0.05)


def test_scene_validation():
    with pytest.raises(ValueError, match="amplitude"):
        Scene(blobs=(Blob("heel-L", (0, 0), -5.0, (1, 1)),))
    with pytest.raises(ValueError, match="scales"):
        Scene(blobs=(Blob("heel-L", (0, 0), 5.0, (0.0, 1)),))


# -- frame scanning ----------------------------------------------------------------


def test_zero_scene_counts_at_no_load_level(divider):
    sim = MatSimulator(Scene(blobs=()), seed=0)
    expected = int(adc_quantize(divider, divider_voltage(divider, sim.model.r_max)))
    frame = sim.scan_frame(0.0)
    assert (frame.counts == expected).all()


def test_constant_scene_is_deterministic():
    scene = Scene(blobs=(Blob("heel-L", (8.0, 8.0), 200.0, (2.0, 2.0)),))
    sim = MatSimulator(scene, seed=42)
    a = sim.scan_frame(sim.frame_time(0))
    b = sim.scan_frame(sim.frame_time(1))
    assert np.array_equal(a.counts, b.counts)
    assert b.seq == a.seq + 1


def test_identical_seeds_give_identical_streams():
    from pressmat.scenes import normal_stance

    scene = normal_stance()
    streams = []
    for _ in range(2):
        sim = MatSimulator(scene, seed=7)
        streams.append(b"".join(encode_frame(f) for f in sim.run(20)))
    assert streams[0] == streams[1]


def test_timestamps_on_exact_155hz_clock():
    sim = MatSimulator(Scene(blobs=()), seed=0)
    frames = list(sim.run(155))
    stamps = np.array([f.timestamp_us for f in frames], dtype=np.int64)
    expected = np.array([round(k * 1_000_000 / 155) for k in range(155)], dtype=np.int64)
    assert np.array_equal(stamps, expected)  # exact rational clock, no drift
    assert frames[-1].timestamp_us == round(154 / 155 * 1e6)


def test_clock_backwards_rejected():
    sim = MatSimulator(Scene(blobs=()), seed=0)
    sim.scan_frame(1.0)
    with pytest.raises(ValueError, match="backwards"):
        sim.scan_frame(0.5)


def test_chain_monotonicity(divider):
    # For a settled branch state, higher true pressure never reads a lower
    # count through the full transduction chain.
    model = SensorModel()
    pressures = np.linspace(0, 650, 500)
    for blend in (-1.0, 0.0, 1.0):
        state = BranchState(pressures.size)
        state.blend[:] = blend
        r = resistance_of(model, pressures, state)
        counts = adc_quantize(divider, divider_voltage(divider, r))
        assert np.all(np.diff(counts.astype(int)) >= 0)


def test_hysteresis_states_move_per_sensor():
    scene = Scene(blobs=(Blob("heel-L", (8.0, 8.0), 300.0, (2.0, 2.0)),))
    sim = MatSimulator(scene, seed=1)
    sim.scan_frame(0.0)
    loaded = sim.branch_state.blend > 0.5
    x, y = sim.layout.channel_to_position(int(np.flatnonzero(loaded)[0]))
    assert abs(x - 8.0) < 6 and abs(y - 8.0) < 6  # only sensors under the blob load up
    assert not loaded.all()


def test_scene_json_round_trip():
    from pressmat.scenes import callus_stance

    scene = callus_stance()
    assert Scene.from_json(scene.to_json()) == scene
