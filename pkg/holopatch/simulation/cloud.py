"""Seeded random point clouds on discrete depth planes."""

from __future__ import annotations

import math
from typing import List, Optional

import numpy as np

from holopatch.core.errors import CapacityError
from holopatch.core.log import get_logger
from holopatch.models import OpticalConfig, PointCloud
from holopatch.optics.core import fov_axial, fov_lateral, patch_format, spot_axial, spot_lateral
from holopatch.optics.efficiency import corner_case_efficiency

from .wave import output_pitch

logger = get_logger(__name__)

MAX_ATTEMPTS = 100_000


def depth_planes(cfg: OpticalConfig, patch_side: int, axial_ratio: float) -> List[float]:
    """Odd number of planes spaced by the axial spot size, symmetric about the focal plane."""
    if not 0.0 <= axial_ratio <= 1.0:
        raise ValueError("axial_ratio must lie in [0, 1]")
    step = spot_axial(cfg, patch_side)
    span = axial_ratio * fov_axial(cfg, patch_side)
    count = math.floor(span / step + 1e-9) + 1
    if count % 2 == 0:
        count -= 1
    half = (count - 1) // 2
    return [(k - half) * step for k in range(count)]


def weak_targets(cfg: OpticalConfig, xyz: np.ndarray, N: int, floor: float) -> List[int]:
    """Targets whose assigned patch efficiency falls below `floor`."""
    # deferred: the algorithms package imports the wave simulator from this package
    from holopatch.algorithms.assignment import assign

    result = assign(cfg, PointCloud.from_array(xyz), N)
    return sorted(p.target_index for p in result.pairs if p.eta < floor)


def generate_cloud(
    cfg: OpticalConfig,
    T: int,
    N: int = 1,
    lateral_ratio: float = 0.9,
    axial_ratio: float = 0.75,
    seed: int = 0,
    granularity: Optional[float] = None,
    min_efficiency: Optional[float] = None,
) -> PointCloud:
    """T non-overlapping targets inside the ratio-limited volume of the (F, T, N) patch format.

    Lateral positions lie on a grid of `granularity` meters (default: one
    rendered sample) strictly inside the lateral bounds; same-plane targets
    are at least one lateral spot width apart. Planes are one axial spot
    width apart, so targets on different planes never overlap.

    Every target must also reach `min_efficiency` on the patch the
    assignment gives it (default: the corner-case efficiency of the
    ratio-limited volume, pass 0 to disable). Targets left below it are
    redrawn until none is; redraws count against the attempt budget.
    """
    if not 0.0 < lateral_ratio <= 1.0:
        raise ValueError("lateral_ratio must lie in (0, 1]")
    fmt = patch_format(cfg.pixel_count, T, N)
    depths = np.array(depth_planes(cfg, fmt.patch_side, axial_ratio))
    min_gap = spot_lateral(cfg, fmt.patch_side)
    step = granularity or output_pitch(cfg)
    half = lateral_ratio * fov_lateral(cfg) / 2.0
    m_max = math.ceil(half / step) - 1
    if m_max < 0:
        raise CapacityError("placement grid is coarser than the lateral range")
    if min_efficiency is None:
        min_efficiency = corner_case_efficiency(cfg, fmt.patch_side, lateral_ratio, axial_ratio)

    rng = np.random.default_rng(seed)
    points = np.zeros((T, 3))
    planes = np.full(T, -1, dtype=int)
    attempts = 0

    def place(i: int) -> None:
        nonlocal attempts
        while True:
            if attempts >= MAX_ATTEMPTS:
                raise CapacityError(
                    f"placed {int((planes >= 0).sum())} of {T} targets after {MAX_ATTEMPTS} attempts "
                    f"(F={cfg.pixel_count}, F_patch={fmt.patch_side}, {depths.size} planes)"
                )
            attempts += 1
            k = int(rng.integers(depths.size))
            mx, my = rng.integers(-m_max, m_max + 1, size=2)
            dx, dy = float(mx) * step, float(my) * step
            same = planes == k
            same[i] = False
            if same.any() and np.hypot(points[same, 0] - dx, points[same, 1] - dy).min() < min_gap:
                continue
            points[i] = (dx, dy, depths[k])
            planes[i] = k
            return

    for i in range(T):
        place(i)
    redrawn = 0
    if min_efficiency > 0.0:
        weak = weak_targets(cfg, points, N, min_efficiency)
        while weak:
            for i in weak:
                planes[i] = -1
            for i in weak:
                place(i)
            redrawn += len(weak)
            weak = weak_targets(cfg, points, N, min_efficiency)

    logger.debug(
        "generated %d targets on %d planes in %d attempts, %d redrawn below eta=%.3f (seed %d)",
        T, depths.size, attempts, redrawn, min_efficiency, seed,
    )
    return PointCloud.from_array(points, seed=seed)
