import numpy as np
import pytest

from holopatch.algorithms.gerchberg_saxton import gs_cloud, gs_compute, gs_decomposed, gs_step, initial_phase
from holopatch.models import GsConfig, OpticalConfig
from holopatch.optics.core import patch_format
from holopatch.pipeline import evaluate_masks
from holopatch.simulation.cloud import generate_cloud
from holopatch.simulation.wave import build_target_volume, field_from_phase, render_volume

from conftest import cloud_of, on_grid


def test_initial_phase_is_seeded():
    np.testing.assert_array_equal(initial_phase(8, 3), initial_phase(8, 3))
    assert not np.array_equal(initial_phase(8, 3), initial_phase(8, 4))
    phase = initial_phase(8, 0)
    assert phase.min() >= 0.0 and phase.max() < 2 * np.pi


def test_gs_mask_shape_and_determinism(cfg16):
    cloud = generate_cloud(cfg16, 2, seed=1)
    gs = GsConfig(sampling=1, iterations=5, seed=2)
    mask, timing = gs_cloud(cfg16, cloud, gs)
    again, _ = gs_cloud(cfg16, cloud, gs)
    assert mask.levels.shape == (16, 16)
    assert mask.bits == 8
    np.testing.assert_array_equal(mask.levels, again.levels)
    assert timing.algorithm == "gsx1"
    assert timing.iterations == 5
    assert timing.total_ms >= timing.synthesis_ms > 0.0


def test_gs_focuses_a_single_spot(cfg16):
    target = on_grid(cfg16, 5, -4)
    cloud = cloud_of(target)
    mask, _ = gs_cloud(cfg16, cloud, GsConfig(sampling=1, iterations=20))
    rendered = render_volume([mask], cfg16, [0.0], s=3)
    row, col = np.unravel_index(np.argmax(rendered.grids[0]), rendered.grids[0].shape)
    assert abs(col - (rendered.center + 5)) <= 1
    assert abs(row - (rendered.center + 4)) <= 1


def test_gs_supersampled(cfg16):
    cloud = generate_cloud(cfg16, 2, seed=6)
    mask, timing = gs_cloud(cfg16, cloud, GsConfig(sampling=3, iterations=2))
    assert mask.levels.shape == (16, 16)
    assert timing.algorithm == "gsx3"


def test_gs_rejects_mismatched_targets(cfg16):
    cloud = generate_cloud(cfg16, 1, seed=0)
    cropped = build_target_volume(cfg16, cloud, 16, s=1, crop=True)
    with pytest.raises(ValueError):
        gs_compute(cfg16, cropped, GsConfig(iterations=1))
    full = build_target_volume(cfg16, cloud, 16, s=1, crop=False)
    with pytest.raises(ValueError):
        gs_compute(cfg16, full, GsConfig(sampling=3, iterations=1))


def test_decomposed_gs_returns_one_mask_per_frame(cfg16):
    cloud = generate_cloud(cfg16, 4, 2, seed=8)
    masks, timing = gs_decomposed(cfg16, cloud, 2, GsConfig(iterations=3))
    assert len(masks) == 2
    assert timing.iterations == 6
    assert timing.algorithm == "gsx1-dec"
    assert not np.array_equal(masks[0].levels, masks[1].levels)


def test_slm_plane_stays_pixelated_and_padded(cfg16):
    s, F = 3, cfg16.pixel_count
    cloud = generate_cloud(cfg16, 2, seed=4)
    target = build_target_volume(cfg16, cloud, patch_format(F, 2).patch_side, s=s, crop=False)
    phase = initial_phase(F, 0)
    side = s * F
    for _ in range(3):
        phase = gs_step(phase, cfg16, target)
        assert phase.shape == (F, F)
        field = field_from_phase(phase, s)
        inner = field[side:2 * side, side:2 * side]
        np.testing.assert_allclose(np.abs(inner), 1.0, rtol=1e-12)
        blocks = inner.reshape(F, s, F, s)
        assert np.all(blocks == blocks[:, :1, :, :1])
        field[side:2 * side, side:2 * side] = 0.0
        assert not np.any(field)


def test_fifty_iterations_beat_one():
    cfg = OpticalConfig(pixel_count=32)
    patch_side = patch_format(32, 4).patch_side
    wins = 0
    for seed in range(10):
        cloud = generate_cloud(cfg, 4, seed=seed)
        contrasts = []
        for iterations in (1, 50):
            mask, _ = gs_cloud(cfg, cloud, GsConfig(iterations=iterations, seed=seed), patch_side)
            contrasts.append(evaluate_masks([mask], cloud, cfg, patch_side, eval_sampling=2).row["contrast"])
        wins += contrasts[1] >= contrasts[0]
    assert wins >= 9
