import numpy as np

from holopatch.algorithms.patch_engine import compute_masks
from holopatch.models import PointCloud, TargetPoint
from holopatch.optics.core import PhaseMask, checkerboard, fov_axial, fov_lateral, quantize
from holopatch.simulation.cloud import generate_cloud


def test_single_target_equals_full_frame_synthesis(cfg):
    target = TargetPoint(dx=0.3 * fov_lateral(cfg) / 2, dy=-0.2 * fov_lateral(cfg) / 2, dz=0.2 * fov_axial(cfg, 128) / 2)
    masks, assignment, _ = compute_masks(cfg, PointCloud(points=[target]), 1, bits=8)
    expected = quantize(PhaseMask.full_frame(cfg, target), 8)
    assert len(masks) == 1
    assert assignment.fmt.grid_side == 1
    np.testing.assert_array_equal(masks[0].levels, expected.levels)


def test_each_patch_is_a_window_of_full_frame_synthesis(cfg64):
    cloud = generate_cloud(cfg64, 4, seed=11)
    masks, assignment, _ = compute_masks(cfg64, cloud, 1)
    for pair in assignment.pairs:
        rows, cols = assignment.fmt.block(64, pair.slot.grid_row, pair.slot.grid_col)
        full = quantize(PhaseMask.full_frame(cfg64, cloud.points[pair.target_index]), 8)
        np.testing.assert_array_equal(masks[0].levels[rows, cols], full.levels[rows, cols])


def test_idle_patches_and_border_hold_the_checkerboard(cfg64):
    board = quantize(PhaseMask(checkerboard(64, 64), cfg64), 8).levels
    cloud = generate_cloud(cfg64, 3, seed=4)
    masks, assignment, _ = compute_masks(cfg64, cloud, 1)
    (idle,) = assignment.unassigned_slots
    rows, cols = assignment.fmt.block(64, idle.grid_row, idle.grid_col)
    np.testing.assert_array_equal(masks[0].levels[rows, cols], board[rows, cols])

    # F = 68 with a 3 x 3 grid of 22-pixel patches leaves one border pixel per side
    cfg68 = cfg64.with_pixel_count(68)
    masks, assignment, _ = compute_masks(cfg68, generate_cloud(cfg68, 9, seed=4), 1)
    assert assignment.fmt.border(68) == 1
    board = quantize(PhaseMask(checkerboard(68, 68), cfg68), 8).levels
    np.testing.assert_array_equal(masks[0].levels[0], board[0])
    np.testing.assert_array_equal(masks[0].levels[:, -1], board[:, -1])


def test_frames_and_timing(cfg64):
    cloud = generate_cloud(cfg64, 8, 2, seed=3)
    masks, assignment, timing = compute_masks(cfg64, cloud, 2, bits=6)
    assert len(masks) == 2
    assert all(m.bits == 6 and m.levels.max() < 64 for m in masks)
    assert [len(t) for t in assignment.frame_targets()] == [4, 4]
    assert timing.algorithm == "np"
    assert timing.total_ms >= timing.assignment_ms >= 0.0
    assert timing.iterations == 0


def test_deterministic(cfg64):
    cloud = generate_cloud(cfg64, 5, seed=9)
    first, _, _ = compute_masks(cfg64, cloud, 1)
    second, _, _ = compute_masks(cfg64, cloud, 1, workers=2)
    np.testing.assert_array_equal(first[0].levels, second[0].levels)
