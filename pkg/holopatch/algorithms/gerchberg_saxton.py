"""
Multi-plane Gerchberg-Saxton baseline.

Superposition variant: every iteration propagates the SLM field to each
target plane, imposes the target amplitude sqrt(I) on the whole plane,
back-propagates and sums the plane fields at the SLM. Each physical pixel
then takes the argument of the mean of its s x s computational samples.
"""

from __future__ import annotations

import time
from typing import List, Optional, Tuple

import numpy as np

from holopatch.core.log import get_logger
from holopatch.core.settings import worker_count
from holopatch.models import GsConfig, OpticalConfig, PointCloud
from holopatch.optics.core import PhaseMask, QuantizedMask, TWO_PI, patch_format, quantize
from holopatch.simulation.wave import (
    PAD_FACTOR,
    IntensityVolume,
    back_propagate,
    build_target_volume,
    field_from_phase,
    propagate_field,
)

from .assignment import assign
from .patch_engine import TimingReport

logger = get_logger(__name__)


def initial_phase(F: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, TWO_PI, size=(F, F))


def gs_step(
    phase: np.ndarray,
    cfg: OpticalConfig,
    target: IntensityVolume,
    amplitudes: Optional[np.ndarray] = None,
    workers: Optional[int] = None,
) -> np.ndarray:
    """One superposition GS iteration; returns the new F x F pixel phase."""
    F = cfg.pixel_count
    s = target.samples_per_slm_pixel
    if amplitudes is None:
        amplitudes = np.sqrt(target.grids)
    slm = field_from_phase(phase, s)
    acc = np.zeros_like(slm)
    for k, dz in enumerate(target.depths):
        plane = propagate_field(slm, cfg, float(dz), workers)
        plane = amplitudes[k] * np.exp(1j * np.angle(plane))
        acc += back_propagate(plane, cfg, float(dz), workers)
    side = s * F
    block = acc[side:2 * side, side:2 * side].reshape(F, s, F, s).mean(axis=(1, 3))
    return np.angle(block)


def _check_target(cfg: OpticalConfig, target: IntensityVolume) -> None:
    n = PAD_FACTOR * target.samples_per_slm_pixel * cfg.pixel_count
    if target.depths.size == 0:
        raise ValueError("target volume has no planes")
    if target.grids.shape[1:] != (n, n):
        raise ValueError(
            f"target volume must be the full {n}x{n} simulation grid, got {target.grids.shape[1:]}"
        )
    if not np.any(target.grids > 0):
        raise ValueError("target volume is empty")


def gs_compute(
    cfg: OpticalConfig,
    target: IntensityVolume,
    gs: GsConfig,
    workers: Optional[int] = None,
) -> Tuple[QuantizedMask, TimingReport]:
    """Quantized GS mask for a target volume built at the GS sampling (uncropped)."""
    if target.samples_per_slm_pixel != gs.sampling:
        raise ValueError(
            f"target volume sampled at {target.samples_per_slm_pixel}, GS runs at {gs.sampling}"
        )
    _check_target(cfg, target)
    n_workers = worker_count(workers)

    start = time.perf_counter()
    amplitudes = np.sqrt(target.grids)
    phase = initial_phase(cfg.pixel_count, gs.seed)
    for it in range(gs.iterations):
        phase = gs_step(phase, cfg, target, amplitudes, n_workers)
        if (it + 1) % 10 == 0:
            logger.debug("GS iteration %d/%d", it + 1, gs.iterations)
    mask = quantize(PhaseMask(phase, cfg), gs.bits)
    elapsed = (time.perf_counter() - start) * 1e3

    timing = TimingReport(
        algorithm=f"gsx{gs.sampling}",
        total_ms=elapsed,
        synthesis_ms=elapsed,
        iterations=gs.iterations,
        workers=n_workers,
    )
    return mask, timing


def gs_cloud(
    cfg: OpticalConfig,
    cloud: PointCloud,
    gs: GsConfig,
    patch_side: Optional[int] = None,
    workers: Optional[int] = None,
) -> Tuple[QuantizedMask, TimingReport]:
    """GS on the disk target volume of a cloud; disks sized for the single-frame patch format."""
    if patch_side is None:
        patch_side = patch_format(cfg.pixel_count, len(cloud), 1).patch_side
    start = time.perf_counter()
    target = build_target_volume(cfg, cloud, patch_side, s=gs.sampling, crop=False)
    mask, timing = gs_compute(cfg, target, gs, workers)
    timing.total_ms = (time.perf_counter() - start) * 1e3
    return mask, timing


def gs_decomposed(
    cfg: OpticalConfig,
    cloud: PointCloud,
    N: int,
    gs: GsConfig,
    workers: Optional[int] = None,
) -> Tuple[List[QuantizedMask], TimingReport]:
    """Time-multiplexed GS: split the cloud into frames by patch assignment, then GS per frame.

    Frame f is seeded with gs.seed + f.
    """
    start = time.perf_counter()
    assignment = assign(cfg, cloud, N)
    assigned = time.perf_counter()
    patch_side = assignment.fmt.patch_side
    masks: List[QuantizedMask] = []
    for frame, indices in enumerate(assignment.frame_targets()):
        frame_gs = gs.model_copy(update={"seed": gs.seed + frame})
        mask, _ = gs_cloud(cfg, cloud.subset(sorted(indices)), frame_gs, patch_side, workers)
        masks.append(mask)
    done = time.perf_counter()
    timing = TimingReport(
        algorithm=f"gsx{gs.sampling}-dec",
        total_ms=(done - start) * 1e3,
        assignment_ms=(assigned - start) * 1e3,
        synthesis_ms=(done - assigned) * 1e3,
        iterations=gs.iterations * N,
        workers=worker_count(workers),
    )
    return masks, timing
