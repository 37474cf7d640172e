"""
Non-iterative patch hologram engine.

Partition the SLM into a g x g grid of patches, assign each target to a
(frame, patch) slot, write the target's 3D steering phase into its patch
at absolute SLM coordinates, fill the rest with a 0/pi checkerboard and
quantize each frame.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import List, Optional, Tuple

import numpy as np

from holopatch.core.log import get_logger
from holopatch.core.settings import worker_count
from holopatch.models import OpticalConfig, PointCloud, TargetPoint
from holopatch.optics.core import (
    PatchFormat,
    PhaseMask,
    QuantizedMask,
    checkerboard,
    pixel_axes,
    quantize,
    steering_phase,
)

from .assignment import AssignedPair, PatchAssignment, assign

logger = get_logger(__name__)


@dataclass
class TimingReport:
    """Wall time from target coordinates to quantized masks, milliseconds."""

    algorithm: str
    total_ms: float
    assignment_ms: float = 0.0
    synthesis_ms: float = 0.0
    iterations: int = 0
    workers: int = 1

    def to_dict(self) -> dict:
        return asdict(self)


def _write_patch(
    frame: np.ndarray,
    cfg: OpticalConfig,
    fmt: PatchFormat,
    pair: AssignedPair,
    target: TargetPoint,
    xs: np.ndarray,
    ys: np.ndarray,
) -> None:
    rows, cols = fmt.block(cfg.pixel_count, pair.slot.grid_row, pair.slot.grid_col)
    frame[rows, cols] = steering_phase(cfg, target, xs[None, cols], ys[rows, None])


def synthesize_frames(
    cfg: OpticalConfig,
    cloud: PointCloud,
    assignment: PatchAssignment,
    workers: int = 1,
) -> List[np.ndarray]:
    """Unwrapped phase frames (F x F); idle patches and the border keep the checkerboard."""
    F = cfg.pixel_count
    fmt = assignment.fmt
    xs, ys = pixel_axes(cfg)
    frames = [checkerboard(F, F) for _ in range(assignment.frames)]
    jobs = [(frames[p.slot.frame_index], p, cloud.points[p.target_index]) for p in assignment.pairs]
    if workers > 1 and len(jobs) > 1:
        # patches are pixel-disjoint, so concurrent writes never overlap
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda job: _write_patch(job[0], cfg, fmt, job[1], job[2], xs, ys), jobs))
    else:
        for frame, pair, target in jobs:
            _write_patch(frame, cfg, fmt, pair, target, xs, ys)
    return frames


def compute_masks(
    cfg: OpticalConfig,
    cloud: PointCloud,
    N: int = 1,
    bits: int = 8,
    workers: Optional[int] = 1,
    lateral_ratio: float = 1.0,
    axial_ratio: float = 1.0,
) -> Tuple[List[QuantizedMask], PatchAssignment, TimingReport]:
    """N quantized masks for `cloud`, the assignment used and the timing report.

    Bounds are checked against the ratio-scaled volume of the resulting
    patch size; defaults accept the full addressable volume.
    """
    n_workers = worker_count(workers)
    start = time.perf_counter()
    assignment = assign(cfg, cloud, N, lateral_ratio, axial_ratio)
    assigned = time.perf_counter()
    frames = synthesize_frames(cfg, cloud, assignment, n_workers)
    masks = [quantize(PhaseMask(frame, cfg), bits) for frame in frames]
    done = time.perf_counter()

    timing = TimingReport(
        algorithm="np",
        total_ms=(done - start) * 1e3,
        assignment_ms=(assigned - start) * 1e3,
        synthesis_ms=(done - assigned) * 1e3,
        workers=n_workers,
    )
    logger.debug(
        "np: F=%d T=%d N=%d in %.3f ms (assignment %.3f ms)",
        cfg.pixel_count, len(cloud), N, timing.total_ms, timing.assignment_ms,
    )
    return masks, assignment, timing
