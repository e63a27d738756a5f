import math

import numpy as np
import pytest

from pressmat.pipeline import (PipelineOrderError, PressureField,
                               SmoothingSpec, average_frames, field_from_json,
                               field_to_json, gaussian_kernel, load_field,
                               process_capture, save_field, smooth,
                               upsample_spline)


def make_field(values, pitch=0.5, provenance=("raw",)):
    return PressureField(values=np.asarray(values, dtype=float), pitch=pitch,
                         provenance=provenance)


# -- averaging -------------------------------------------------------------------


def test_average_single_field_is_identity():
    f = make_field(np.arange(24.0).reshape(4, 6))
    out = average_frames([f])
    assert np.array_equal(out.values, f.values)
    assert out.frames_averaged == 1
    assert out.provenance == ("raw", "averaged")


def test_average_constant_fields_exact():
    fields = [make_field(np.full((4, 4), 80.0)) for _ in range(50)]
    out = average_frames(fields)
    assert np.array_equal(out.values, np.full((4, 4), 80.0))
    assert out.frames_averaged == 50


def test_average_reduces_noise_sqrt_n():
    rng = np.random.default_rng(123)
    sigma, n = 8.0, 50
    base = np.full((32, 64), 100.0)
    fields = [make_field(base + rng.normal(0, sigma, base.shape)) for _ in range(n)]
    residual = average_frames(fields).values - base
    assert residual.std() == pytest.approx(sigma / math.sqrt(n), rel=0.20)


def test_average_shape_mismatch_rejected():
    with pytest.raises(ValueError, match="shape"):
        average_frames([make_field(np.zeros((4, 4))), make_field(np.zeros((4, 5)))])


# -- upsampling ------------------------------------------------------------------


def test_upsample_factor_one_is_identity():
    f = make_field(np.random.default_rng(0).uniform(0, 50, (6, 7)))
    out = upsample_spline(f, factor=1)
    assert np.array_equal(out.values, f.values)
    assert out.pitch == f.pitch and out.origin == f.origin


def test_upsample_constant_field():
    out = upsample_spline(make_field(np.full((5, 5), 9.0)), factor=10)
    assert out.shape == (50, 50)
    assert np.abs(out.values - 9.0).max() <= 1e-9


def test_upsample_preserves_linear_ramp():
    # Offset keeps the ramp positive over the half-cell border extension,
    # so the physical non-negativity clamp never fires.
    y, x = np.mgrid[0:10, 0:12]
    f = make_field(3.0 * x + 2.0 * y + 10.0, pitch=0.5)
    out = upsample_spline(f, factor=10)
    assert out.clamped_cells == 0
    xs, ys = out.cell_centers()
    expected = 3.0 * (xs[None, :] / 0.5) + 2.0 * (ys[:, None] / 0.5) + 10.0
    assert np.abs(out.values - expected).max() <= 1e-9


def test_upsample_reproduces_samples_at_odd_factor():
    rng = np.random.default_rng(8)
    values = rng.uniform(0, 200, (7, 9))
    out = upsample_spline(make_field(values), factor=5)
    assert np.abs(out.values[2::5, 2::5] - values).max() <= 1e-12


def test_upsample_dims_and_geometry():
    f = make_field(np.zeros((32, 64)), pitch=0.5)
    out = upsample_spline(f, factor=10)
    assert out.shape == (320, 640)
    assert out.pitch == pytest.approx(0.05)
    # Total physical extent is preserved under cell-centred resampling.
    assert out.origin[0] == pytest.approx(-0.225)
    assert out.cell_centers()[0][-1] == pytest.approx(f.cell_centers()[0][-1] + 0.225)


def test_upsample_clamps_negative_overshoot():
    values = np.zeros((8, 8))
    values[4, 4] = 100.0  # sharp impulse causes cubic undershoot
    out = upsample_spline(make_field(values), factor=4)
    assert out.clamped_cells > 0
    assert out.values.min() >= 0.0


def test_upsample_small_field_falls_back_to_bilinear():
    values = np.array([[0.0, 10.0], [10.0, 20.0]])
    out = upsample_spline(make_field(values), factor=4)
    assert out.shape == (8, 8)
    assert out.values.min() >= 0.0 and out.values.max() <= 20.0


def test_upsample_mass_ratio_on_smooth_interior_fields():
    rng = np.random.default_rng(42)
    y, x = np.mgrid[0:32, 0:64].astype(float)
    for _ in range(3):
        values = np.zeros((32, 64))
        for _ in range(5):
            cx, cy = rng.uniform(14, 50), rng.uniform(10, 22)
            amp, s = rng.uniform(50, 300), rng.uniform(1.5, 3.5)
            values += amp * np.exp(-0.5 * (((x - cx) / s) ** 2 + ((y - cy) / s) ** 2))
        out = upsample_spline(make_field(values), factor=10)
        assert out.values.sum() == pytest.approx(values.sum() * 100, rel=0.005)


# -- Gaussian kernel ----------------------------------------------------------------


def test_kernel_unit_sum():
    kernel = gaussian_kernel(SmoothingSpec())
    assert kernel.shape == (5, 5)
    assert abs(kernel.sum() - 1.0) <= 1e-12


def test_kernel_center_is_strict_max():
    kernel = gaussian_kernel(SmoothingSpec())
    assert kernel[2, 2] > np.delete(kernel.ravel(), 12).max()


def test_kernel_symmetry():
    kernel = gaussian_kernel(SmoothingSpec())
    assert np.array_equal(kernel, kernel.T)
    assert np.array_equal(kernel, kernel[::-1, :])
    assert np.array_equal(kernel, kernel[:, ::-1])


def test_kernel_prenormalization_ratio():
    raw = gaussian_kernel(SmoothingSpec(sigma=0.8), normalized=False)
    # Direct evaluation: G(0,0)/G(2,2) = e^(8 / (2 * 0.64)) = e^6.25.
    assert raw[2, 2] / raw[0, 0] == pytest.approx(math.exp(6.25), rel=1e-12)
    assert raw[2, 2] / raw[0, 0] == pytest.approx(518.01, abs=0.01)


# -- smoothing ----------------------------------------------------------------------


def test_smooth_constant_unchanged():
    f = make_field(np.full((12, 12), 42.0), provenance=("raw", "averaged", "upsampled"))
    out = smooth(f)
    assert np.abs(out.values - 42.0).max() <= 1e-12
    assert out.provenance == ("raw", "averaged", "upsampled", "smoothed")


def test_smooth_impulse_mass_and_pattern():
    values = np.zeros((21, 21))
    values[10, 10] = 6.0
    out = smooth(make_field(values))
    assert abs(out.values.sum() - 6.0) <= 1e-9
    assert np.abs(out.values[8:13, 8:13] - 6.0 * gaussian_kernel(SmoothingSpec())).max() <= 1e-12


def test_smooth_twice_approximates_wider_sigma():
    rng = np.random.default_rng(3)
    y, x = np.mgrid[0:40, 0:40].astype(float)
    values = np.zeros((40, 40))
    for _ in range(4):
        cx, cy, amp = rng.uniform(10, 30), rng.uniform(10, 30), rng.uniform(50, 150)
        values += amp * np.exp(-0.5 * (((x - cx) / 4) ** 2 + ((y - cy) / 4) ** 2))
    f = make_field(values)
    twice = smooth(smooth(f, SmoothingSpec(sigma=0.8)), SmoothingSpec(sigma=0.8))
    once = smooth(f, SmoothingSpec(kernel_size=7, sigma=0.8 * math.sqrt(2)))
    rms = np.sqrt(np.mean((twice.values - once.values) ** 2))
    assert rms <= 0.02 * np.sqrt(np.mean(once.values ** 2))


def test_smooth_rejects_tiny_fields():
    with pytest.raises(ValueError, match="kernel"):
        smooth(make_field(np.zeros((2, 2))))


def test_average_and_smooth_are_linear():
    rng = np.random.default_rng(14)
    a = rng.uniform(0, 100, (12, 12))
    b = rng.uniform(0, 100, (12, 12))
    alpha, beta = 0.6, 2.2

    combo = smooth(make_field(alpha * a + beta * b)).values
    parts = alpha * smooth(make_field(a)).values + beta * smooth(make_field(b)).values
    assert np.abs(combo - parts).max() <= 1e-9 * np.abs(parts).max()

    avg_sum = average_frames([make_field(a + b), make_field(2 * (a + b))]).values
    avg_parts = (average_frames([make_field(a), make_field(2 * a)]).values
                 + average_frames([make_field(b), make_field(2 * b)]).values)
    assert np.abs(avg_sum - avg_parts).max() <= 1e-9 * np.abs(avg_parts).max()


def test_every_stage_output_nonnegative():
    rng = np.random.default_rng(15)
    values = rng.uniform(0, 200, (16, 20)) * (rng.uniform(0, 1, (16, 20)) > 0.4)
    averaged = average_frames([make_field(values), make_field(values * 0.5)])
    upsampled = upsample_spline(averaged, factor=6)  # sharp edges force clamping
    smoothed = smooth(upsampled)
    for stage in (averaged, upsampled, smoothed):
        assert stage.values.min() >= 0.0


# -- stage-order contract --------------------------------------------------------------


def test_stage_order_enforced():
    upsampled = make_field(np.zeros((8, 8)), provenance=("raw", "averaged", "upsampled"))
    with pytest.raises(PipelineOrderError):
        average_frames([upsampled])
    smoothed = make_field(np.zeros((8, 8)), provenance=("raw", "smoothed"))
    with pytest.raises(PipelineOrderError):
        upsample_spline(smoothed, factor=2)
    # Re-smoothing is the same stage, so it stays legal.
    smooth(make_field(np.zeros((12, 12)), provenance=("raw", "smoothed")))


# -- full capture pipeline ---------------------------------------------------------------


def test_process_capture_zero_scene(curve_no_hyst, layout):
    from pressmat.simulate import MatSimulator, Scene

    sim = MatSimulator(Scene(blobs=()), layout=layout, seed=0)
    field = process_capture(list(sim.run(10)), curve_no_hyst, layout)
    assert np.array_equal(field.values, np.zeros((320, 640)))
    assert field.provenance == ("raw", "averaged", "upsampled", "smoothed")
    assert field.frames_averaged == 10


def test_process_capture_centroids_near_scene_feet(curve_default, layout):
    from pressmat.metrics import center_of_pressure, mask_cells
    from pressmat.scenes import normal_stance, scene_foot_centers
    from pressmat.simulate import MatSimulator

    scene = normal_stance()
    sim = MatSimulator(scene, layout=layout, seed=6)
    field = process_capture(list(sim.run(50)), curve_default, layout)
    truth = scene_foot_centers(scene)
    halves = {
        "L": ((-1.0, -1.0), (16.0, -1.0), (16.0, 17.0), (-1.0, 17.0)),
        "R": ((16.0, -1.0), (33.0, -1.0), (33.0, 17.0), (16.0, 17.0)),
    }
    for side, polygon in halves.items():
        cop = center_of_pressure(field, mask_cells(field, polygon))
        assert cop is not None
        assert math.hypot(cop[0] - truth[side][0], cop[1] - truth[side][1]) <= 1.0


# -- export ---------------------------------------------------------------------------------


def test_field_json_round_trip():
    f = make_field(np.random.default_rng(0).uniform(0, 300, (20, 30)).astype(np.float32),
                   provenance=("raw", "averaged"))
    doc = field_to_json(f)
    back = field_from_json(doc)
    assert np.allclose(back.values, f.values, atol=1e-6)
    assert back.pitch == f.pitch and back.provenance == f.provenance


def test_field_sidecar_round_trip(tmp_path):
    f = make_field(np.random.default_rng(1).uniform(0, 300, (16, 24)).astype(np.float32))
    save_field(f, tmp_path / "capture")
    assert (tmp_path / "capture.json").exists()
    assert (tmp_path / "capture.bin").stat().st_size == 16 * 24 * 4
    back = load_field(tmp_path / "capture")
    assert np.allclose(back.values, f.values, atol=1e-6)


def test_png_export(tmp_path):
    from pressmat.pipeline import save_png

    f = make_field(np.random.default_rng(2).uniform(0, 300, (32, 64)))
    save_png(f, tmp_path / "map.png")
    data = (tmp_path / "map.png").read_bytes()
    assert data[:8] == b"\x89PNG\r\n\x1a\n"
