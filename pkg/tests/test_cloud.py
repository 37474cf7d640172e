import itertools

import numpy as np
import pytest

from holopatch.core.errors import CapacityError
from holopatch.optics.core import fov_axial, fov_lateral, patch_format, spot_axial, spot_lateral
from holopatch.algorithms.assignment import assign
from holopatch.optics.efficiency import corner_case_efficiency
from holopatch.simulation.cloud import depth_planes, generate_cloud, weak_targets


def test_depth_planes_are_odd_and_symmetric(cfg):
    for patch_side in (8, 32, 128):
        planes = depth_planes(cfg, patch_side, 0.75)
        assert len(planes) % 2 == 1
        assert 0.0 in planes
        np.testing.assert_allclose(planes, -np.array(planes[::-1]), atol=1e-15)
        np.testing.assert_allclose(np.diff(planes), spot_axial(cfg, patch_side), rtol=1e-12)
        assert max(abs(p) for p in planes) <= 0.75 * fov_axial(cfg, patch_side) / 2


def test_generated_cloud_respects_bounds_and_spacing(cfg64):
    T, N = 12, 2
    cloud = generate_cloud(cfg64, T, N, seed=21)
    fmt = patch_format(64, T, N)
    xyz = cloud.as_array()
    assert len(cloud) == T
    assert cloud.seed == 21
    assert np.all(np.abs(xyz[:, :2]) < 0.9 * fov_lateral(cfg64) / 2)
    planes = depth_planes(cfg64, fmt.patch_side, 0.75)
    assert all(np.isclose(planes, dz).any() for dz in xyz[:, 2])
    gap = spot_lateral(cfg64, fmt.patch_side)
    for a, b in itertools.combinations(xyz, 2):
        if a[2] == b[2]:
            assert np.hypot(a[0] - b[0], a[1] - b[1]) >= gap


def test_generation_is_seeded(cfg64):
    first = generate_cloud(cfg64, 6, seed=3).as_array()
    np.testing.assert_array_equal(first, generate_cloud(cfg64, 6, seed=3).as_array())
    assert not np.array_equal(first, generate_cloud(cfg64, 6, seed=4).as_array())


def test_impossible_density_raises(cfg):
    cfg32 = cfg.with_pixel_count(32)
    # three planes, room for one target each
    with pytest.raises(CapacityError):
        generate_cloud(cfg32, 16, lateral_ratio=0.05, seed=0)


def test_ratio_validation(cfg64):
    with pytest.raises(ValueError):
        generate_cloud(cfg64, 4, lateral_ratio=0.0)
    with pytest.raises(ValueError):
        depth_planes(cfg64, 32, 1.5)


@pytest.mark.parametrize("T", [4, 16])
def test_every_target_clears_the_corner_efficiency(cfg, T):
    floor = corner_case_efficiency(cfg, patch_format(128, T).patch_side, 0.9, 0.75)
    for seed in range(4):
        cloud = generate_cloud(cfg, T, seed=seed)
        assert min(p.eta for p in assign(cfg, cloud).pairs) >= floor


def test_weak_targets(cfg64):
    xyz = generate_cloud(cfg64, 9, seed=2, min_efficiency=0.0).as_array()
    assert weak_targets(cfg64, xyz, 1, 0.0) == []
    assert weak_targets(cfg64, xyz, 1, 1.01) == list(range(9))
