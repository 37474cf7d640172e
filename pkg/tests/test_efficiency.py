import math

import numpy as np
import pytest

from holopatch.models import OpticalConfig, TargetPoint
from holopatch.optics.core import fov_axial, fov_lateral, vertex
from holopatch.optics.efficiency import (
    EfficiencySample,
    axis_factors,
    corner_case_efficiency,
    patch_mean_efficiency,
    regional_efficiency,
    sample,
    sinc_squared,
)


def test_sinc_squared():
    assert sinc_squared(0.0) == 1.0
    assert sinc_squared(1e-6) == pytest.approx(1.0, abs=1e-12)
    assert sinc_squared(math.pi) == pytest.approx(0.0, abs=1e-30)
    assert sinc_squared(math.pi / 2) == pytest.approx(4 / math.pi ** 2)


def test_lateral_fov_edge_is_four_over_pi_squared(cfg):
    edge = fov_lateral(cfg) / 2
    for target in (TargetPoint(dx=edge, dy=0.0, dz=0.0), TargetPoint(dx=0.0, dy=-edge, dz=0.0)):
        eta = regional_efficiency(cfg, target, (0.0, 0.0))
        assert abs(eta - 4 / math.pi ** 2) / (4 / math.pi ** 2) < 1e-9


def test_on_axis_target_is_lossless(cfg):
    assert regional_efficiency(cfg, TargetPoint(dx=0.0, dy=0.0, dz=0.0), (1e-4, -3e-4)) == 1.0


def test_focal_plane_efficiency_ignores_location(cfg):
    target = TargetPoint(dx=1.2e-3, dy=-0.4e-3, dz=0.0)
    values = [regional_efficiency(cfg, target, loc) for loc in [(0.0, 0.0), (5e-4, 5e-4), (-7e-4, 2e-4)]]
    assert values[0] == pytest.approx(values[1]) == pytest.approx(values[2])


def test_defocused_target_is_lossless_at_its_vertex(cfg):
    target = TargetPoint(dx=2e-5, dy=-1e-5, dz=0.25 * fov_axial(cfg, 128))
    assert regional_efficiency(cfg, target, vertex(cfg, target)) == pytest.approx(1.0, abs=1e-12)
    assert regional_efficiency(cfg, target, (0.0, 0.0)) < 1.0


def test_axis_factors_multiply_to_efficiency(cfg):
    target = TargetPoint(dx=1e-3, dy=5e-4, dz=1e-3)
    fx, fy = axis_factors(cfg, target, (3e-4, -2e-4))
    assert fx * fy == pytest.approx(regional_efficiency(cfg, target, (3e-4, -2e-4)))


def test_patch_mean_efficiency_drops_with_depth(cfg):
    depths = np.linspace(0.0, 0.45, 5) * fov_axial(cfg, 64)
    values = [patch_mean_efficiency(cfg, TargetPoint(dx=0.0, dy=0.0, dz=float(dz)), 64) for dz in depths]
    assert values[0] == pytest.approx(1.0)
    assert all(a > b for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("patch_side", [32, 64, 128])
def test_corner_case_efficiency_stays_above_floor(patch_side):
    eta = corner_case_efficiency(OpticalConfig(), patch_side, 0.9, 0.75)
    assert 0.075 < eta < 0.1


def test_corner_case_efficiency_rejects_bad_ratios(cfg):
    with pytest.raises(ValueError):
        corner_case_efficiency(cfg, 64, 1.2, 0.5)


def test_efficiency_sample(cfg):
    s = sample(cfg, TargetPoint(dx=1e-3, dy=0.0, dz=0.0), (0.0, 0.0))
    assert 0.0 < s.eta < 1.0
    with pytest.raises(ValueError):
        EfficiencySample(location=(0.0, 0.0), target=TargetPoint(dx=0.0, dy=0.0, dz=0.0), eta=1.5)


@pytest.mark.parametrize("patch_side", [16, 42, 128])
def test_corner_case_efficiency_never_rises_with_either_ratio(patch_side):
    cfg = OpticalConfig()
    ratios = np.linspace(0.0, 1.0, 11)
    table = np.array([[corner_case_efficiency(cfg, patch_side, a, b) for b in ratios] for a in ratios])
    assert table[0, 0] == pytest.approx(1.0)
    assert np.all(np.diff(table, axis=0) <= 1e-15)
    assert np.all(np.diff(table, axis=1) <= 1e-15)
