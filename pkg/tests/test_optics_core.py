import math
from decimal import Decimal, localcontext

import numpy as np
import pytest

from holopatch.core.errors import PatchFormatError
from holopatch.models import OpticalConfig, TargetPoint
from holopatch.optics.core import (
    TWO_PI,
    PhaseMask,
    QuantizedMask,
    axial_phase,
    checkerboard,
    dequantize,
    fov_axial,
    fov_axial_approx,
    fov_lateral,
    lateral_phase,
    patch_format,
    pixel_axes,
    quantize,
    spot_axial,
    spot_lateral,
    steering_phase,
    vertex,
    wrap,
)


@pytest.mark.parametrize(
    "F, T, N, expected",
    [
        (128, 1, 1, (1, 128, 1)),
        (128, 4, 1, (2, 64, 4)),
        (128, 5, 1, (3, 42, 5)),
        (128, 16, 4, (2, 64, 4)),
        (128, 17, 4, (3, 42, 5)),
        (64, 64, 1, (8, 8, 64)),
    ],
)
def test_patch_format(F, T, N, expected):
    assert tuple(patch_format(F, T, N)) == expected


def test_patch_format_rejects_bad_inputs():
    with pytest.raises(PatchFormatError):
        patch_format(128, 2, 3)
    with pytest.raises(PatchFormatError):
        patch_format(4, 9, 1)
    with pytest.raises(PatchFormatError):
        patch_format(128, 0, 1)


def test_patch_border_and_blocks():
    fmt = patch_format(68, 9, 1)
    assert fmt.patch_side == 22
    assert fmt.border(68) == 1
    rows, cols = fmt.block(68, 2, 1)
    assert (rows.start, rows.stop) == (45, 67)
    assert (cols.start, cols.stop) == (23, 45)


def test_field_of_view_scales(cfg):
    assert fov_lateral(cfg) == pytest.approx(4.256e-3, rel=1e-12)
    assert spot_lateral(cfg, 128) == pytest.approx(fov_lateral(cfg) / 128)
    exact, approx = fov_axial(cfg, 64), fov_axial_approx(cfg, 64)
    assert exact < approx
    assert exact == pytest.approx(approx, rel=1e-3)
    assert spot_axial(cfg, 64) == pytest.approx(2 * approx / 64)


def test_pixel_axes_are_centered(cfg16):
    x, y = pixel_axes(cfg16)
    assert x[0] == pytest.approx(-7.5 * cfg16.pitch)
    assert x.sum() == pytest.approx(0.0, abs=1e-18)
    assert y[0] > 0 > y[-1]


def test_vertex():
    cfg = OpticalConfig()
    assert vertex(cfg, TargetPoint(dx=1e-3, dy=0.0, dz=0.0)) is None
    vx, vy = vertex(cfg, TargetPoint(dx=1e-4, dy=-2e-4, dz=1e-3))
    assert vx == pytest.approx(1e-4 * 0.1 / 1e-3)
    assert vy == pytest.approx(-2e-4 * 0.1 / 1e-3)


def test_steering_phase_splits_into_lateral_and_axial(cfg16):
    x, y = pixel_axes(cfg16)
    target = TargetPoint(dx=3e-4, dy=-1e-4, dz=2e-3)
    total = steering_phase(cfg16, target, x[None, :], y[:, None])
    parts = lateral_phase(cfg16, target, x[None, :], y[:, None]) + axial_phase(cfg16, target, x[None, :], y[:, None])
    np.testing.assert_allclose(total, parts, rtol=1e-12, atol=1e-12)


def test_lateral_steering_is_a_linear_ramp(cfg16):
    x, y = pixel_axes(cfg16)
    target = TargetPoint(dx=2e-4, dy=0.0, dz=0.0)
    phase = steering_phase(cfg16, target, x[None, :], y[:, None])
    step = -2 * math.pi * target.dx * cfg16.pitch / (cfg16.wavelength * cfg16.focal_length)
    np.testing.assert_allclose(np.diff(phase, axis=1), step, rtol=1e-9)
    np.testing.assert_allclose(np.diff(phase, axis=0), 0.0, atol=1e-12)


def test_wrap_range():
    values = wrap(np.array([-1e-18, -TWO_PI, 0.0, TWO_PI, 7.0, -0.5]))
    assert np.all(values >= 0.0)
    assert np.all(values < TWO_PI)


def test_checkerboard():
    board = checkerboard(3, 4)
    assert board[0, 0] == 0.0 and board[0, 1] == math.pi and board[1, 0] == math.pi
    assert set(np.unique(board)) == {0.0, math.pi}


def test_quantize_levels(cfg16):
    F = cfg16.pixel_count
    mask = quantize(PhaseMask(np.full((F, F), math.pi), cfg16), bits=8)
    assert mask.levels.dtype == np.uint8
    assert np.all(mask.levels == 128)
    deep = quantize(PhaseMask(np.full((F, F), TWO_PI - 1e-12), cfg16), bits=10)
    assert deep.levels.dtype == np.uint16
    assert deep.levels.max() == 1023


def test_dequantize_stays_wrapped(cfg16):
    F = cfg16.pixel_count
    rng = np.random.default_rng(0)
    mask = quantize(PhaseMask(rng.uniform(-10, 10, size=(F, F)), cfg16), bits=4)
    phase = dequantize(mask).values
    assert phase.min() >= 0.0 and phase.max() < TWO_PI


def test_quantized_mask_validation(cfg16):
    with pytest.raises(ValueError):
        QuantizedMask(np.full((4, 4), 16, dtype=np.uint8), bits=4)
    with pytest.raises(ValueError):
        QuantizedMask(np.zeros((4, 5), dtype=np.uint8))
    with pytest.raises(ValueError):
        PhaseMask(np.zeros((4, 4)), cfg16)


def test_optical_config_validation():
    with pytest.raises(ValueError):
        OpticalConfig(pixel_count=31)
    with pytest.raises(ValueError):
        OpticalConfig(wavelength=30e-6, pitch=12.5e-6)
    with pytest.raises(ValueError):
        TargetPoint(dx=float("nan"), dy=0.0, dz=0.0)


def test_axial_fov_example():
    cfg = OpticalConfig(pitch=50e-6)
    assert fov_axial(cfg, 64) == pytest.approx(0.1330, rel=1e-3)
    assert fov_axial(cfg, 256) == pytest.approx(fov_axial(cfg, 64) / 4)


def test_steering_phase_is_odd_in_the_target(cfg64):
    x, y = pixel_axes(cfg64)
    rng = np.random.default_rng(7)
    for dx, dy, dz in rng.uniform(-2e-3, 2e-3, size=(5, 3)):
        target = TargetPoint(dx=dx, dy=dy, dz=dz)
        mirrored = TargetPoint(dx=-dx, dy=-dy, dz=-dz)
        np.testing.assert_allclose(
            steering_phase(cfg64, mirrored, x[None, :], y[:, None]),
            -steering_phase(cfg64, target, x[None, :], y[:, None]),
            rtol=1e-15,
            atol=1e-12,
        )


def test_steering_gradient_vanishes_at_the_vertex(cfg):
    target = TargetPoint(dx=2e-5, dy=-3e-5, dz=1e-3)
    vx, vy = vertex(cfg, target)
    h = 1e-6

    def slope(x0, y0):
        gx = (steering_phase(cfg, target, x0 + h, y0) - steering_phase(cfg, target, x0 - h, y0)) / (2 * h)
        gy = (steering_phase(cfg, target, x0, y0 + h) - steering_phase(cfg, target, x0, y0 - h)) / (2 * h)
        return float(np.hypot(gx, gy))

    # a millimeter away the parabola is steep
    assert slope(vx, vy) < 1e-6 * slope(vx + 1e-3, vy + 1e-3)


def test_axial_phase_against_decimal_arithmetic(cfg):
    target = TargetPoint(dx=0.0, dy=0.0, dz=10e-3)
    phase = float(steering_phase(cfg, target, 1e-3, 0.0))
    with localcontext() as ctx:
        ctx.prec = 50
        pi = Decimal("3.14159265358979323846264338327950288419716939937510")
        lam, f = Decimal(repr(cfg.wavelength)), Decimal(repr(cfg.focal_length))
        expected = pi * Decimal("10e-3") * Decimal("1e-3") ** 2 / (lam * f * f)
    assert abs(phase - float(expected)) / float(expected) < 1e-9


def test_scale_ratios_over_random_configs():
    rng = np.random.default_rng(11)
    for _ in range(50):
        pitch = rng.uniform(2e-6, 40e-6)
        cfg = OpticalConfig(
            wavelength=rng.uniform(400e-9, min(1.6e-6, 1.9 * pitch)),
            focal_length=rng.uniform(0.02, 0.5),
            pitch=pitch,
            pixel_count=2 * int(rng.integers(2, 513)),
        )
        patch_side = int(rng.integers(2, cfg.pixel_count + 1))
        assert fov_lateral(cfg) / spot_lateral(cfg, patch_side) == pytest.approx(patch_side, rel=1e-12)
        assert fov_axial_approx(cfg, patch_side) / spot_axial(cfg, patch_side) == pytest.approx(
            patch_side / 2, rel=1e-12
        )
        lam, p = cfg.wavelength, cfg.pitch
        assert fov_axial(cfg, patch_side) / fov_axial_approx(cfg, patch_side) == pytest.approx(
            4 * p * p / (lam * lam + 4 * p * p), rel=1e-12
        )
