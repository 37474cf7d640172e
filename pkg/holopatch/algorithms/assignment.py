"""
Target-to-(frame, patch) assignment.

The loss of placing target t on slot s is 1 - eta(t, center_s). All frames
share one patch geometry, so frame balancing is expressed inside the single
global linear sum assignment: each frame receives a fixed number of
frame-bound dummy rows that soak up the slots it must leave idle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from holopatch.core.errors import AssignmentError, VolumeBoundsError
from holopatch.core.log import get_logger
from holopatch.models import OpticalConfig, PointCloud
from holopatch.optics.core import PatchFormat, fov_axial, fov_lateral, patch_format, pixel_axes
from holopatch.optics.efficiency import efficiency_grid

logger = get_logger(__name__)

# relative slack on the volume bounds for targets generated exactly on the edge
_BOUNDS_RTOL = 1e-9


@dataclass(frozen=True)
class PatchSlot:
    frame_index: int
    grid_row: int
    grid_col: int
    center: Tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "frame": self.frame_index,
            "row": self.grid_row,
            "col": self.grid_col,
            "center": list(self.center),
        }


@dataclass
class CostMatrix:
    values: np.ndarray
    slots: List[PatchSlot] = field(default_factory=list)
    fmt: Optional[PatchFormat] = None
    frames: int = 1

    def __post_init__(self) -> None:
        if self.values.ndim != 2:
            raise AssignmentError("cost matrix must be 2D")
        rows, cols = self.values.shape
        if rows > cols:
            raise AssignmentError(f"more targets ({rows}) than slots ({cols})")
        if self.slots and len(self.slots) != cols:
            raise AssignmentError("slot list does not match cost matrix columns")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class AssignedPair:
    target_index: int
    slot: PatchSlot
    eta: float


@dataclass
class PatchAssignment:
    pairs: List[AssignedPair]
    unassigned_slots: List[PatchSlot]
    fmt: Optional[PatchFormat] = None
    frames: int = 1

    @property
    def total_loss(self) -> float:
        return float(sum(1.0 - p.eta for p in self.pairs))

    @property
    def total_efficiency(self) -> float:
        return float(sum(p.eta for p in self.pairs))

    def by_frame(self) -> Dict[int, List[AssignedPair]]:
        frames: Dict[int, List[AssignedPair]] = {f: [] for f in range(self.frames)}
        for pair in self.pairs:
            frames.setdefault(pair.slot.frame_index, []).append(pair)
        return frames

    def frame_targets(self) -> List[List[int]]:
        """Target indices per frame, in slot order."""
        out = []
        for f, pairs in sorted(self.by_frame().items()):
            ordered = sorted(pairs, key=lambda p: (p.slot.grid_row, p.slot.grid_col))
            out.append([p.target_index for p in ordered])
        return out

    def to_dict(self) -> dict:
        return {
            "frames": self.frames,
            "grid_side": self.fmt.grid_side if self.fmt else None,
            "patch_side": self.fmt.patch_side if self.fmt else None,
            "pairs": [
                {"target": p.target_index, **p.slot.to_dict(), "eta": p.eta}
                for p in sorted(self.pairs, key=lambda p: p.target_index)
            ],
            "total_loss": self.total_loss,
        }


# ---- geometry ----

def patch_slots(cfg: OpticalConfig, fmt: PatchFormat, frames: int) -> List[PatchSlot]:
    """All slots, frame-major then row-major; centers are the geometric centers of the pixel blocks."""
    F = cfg.pixel_count
    xs, ys = pixel_axes(cfg)
    slots: List[PatchSlot] = []
    for frame in range(frames):
        for i in range(fmt.grid_side):
            for j in range(fmt.grid_side):
                rows, cols = fmt.block(F, i, j)
                cx = 0.5 * (xs[cols.start] + xs[cols.stop - 1])
                cy = 0.5 * (ys[rows.start] + ys[rows.stop - 1])
                slots.append(PatchSlot(frame, i, j, (float(cx), float(cy))))
    return slots


def check_volume(
    cfg: OpticalConfig,
    cloud: PointCloud,
    patch_side: int,
    lateral_ratio: float = 1.0,
    axial_ratio: float = 1.0,
) -> None:
    half_xy = lateral_ratio * fov_lateral(cfg) / 2.0 * (1.0 + _BOUNDS_RTOL)
    half_z = axial_ratio * fov_axial(cfg, patch_side) / 2.0 * (1.0 + _BOUNDS_RTOL)
    offending, details = [], []
    for i, pt in enumerate(cloud.points):
        problems = []
        if abs(pt.dx) > half_xy:
            problems.append(f"|dx|={abs(pt.dx):.3e}")
        if abs(pt.dy) > half_xy:
            problems.append(f"|dy|={abs(pt.dy):.3e}")
        if abs(pt.dz) > half_z:
            problems.append(f"|dz|={abs(pt.dz):.3e}")
        if problems:
            offending.append(i)
            details.append(f"target {i}: " + ", ".join(problems))
    if offending:
        raise VolumeBoundsError(offending, details)


def frame_counts(T: int, N: int) -> List[int]:
    """Targets per frame: ceil(T/N) for the first T mod N frames (or all), floor(T/N) after."""
    base, extra = divmod(T, N)
    if extra == 0:
        return [base] * N
    return [base + 1] * extra + [base] * (N - extra)


# ---- cost matrix ----

def build_cost_matrix(
    cfg: OpticalConfig,
    cloud: PointCloud,
    N: int = 1,
    lateral_ratio: float = 1.0,
    axial_ratio: float = 1.0,
) -> CostMatrix:
    fmt = patch_format(cfg.pixel_count, len(cloud), N)
    check_volume(cfg, cloud, fmt.patch_side, lateral_ratio, axial_ratio)
    slots = patch_slots(cfg, fmt, N)
    xyz = cloud.as_array()
    centers = np.array([s.center for s in slots])
    eta = efficiency_grid(
        cfg,
        xyz[:, 0:1],
        xyz[:, 1:2],
        xyz[:, 2:3],
        centers[None, :, 0],
        centers[None, :, 1],
    )
    return CostMatrix(values=1.0 - eta, slots=slots, fmt=fmt, frames=N)


# ---- solver ----

def _canonicalize(costs: np.ndarray, cols: np.ndarray, group_of: np.ndarray) -> np.ndarray:
    """Among equal-cost optima prefer, row by row, the lowest column index.

    Applies cost-neutral swaps between rows and cost-neutral moves onto
    lower idle columns of the same group until none is left. Every step
    lowers the column vector lexicographically, so the loop terminates.
    """
    cols = cols.copy()
    n_rows = cols.size
    changed = True
    while changed:
        changed = False
        for i in range(n_rows):
            ci = cols[i]
            others = np.arange(i + 1, n_rows)
            if others.size:
                cj = cols[others]
                before = costs[i, ci] + costs[others, cj]
                after = costs[i, cj] + costs[others, ci]
                ok = (after == before) & (cj < ci)
                if ok.any():
                    j = others[ok][np.argmin(cj[ok])]
                    cols[i], cols[j] = cols[j], cols[i]
                    changed = True
                    continue
            idle = np.flatnonzero((group_of == group_of[ci]) & (np.arange(group_of.size) < ci))
            idle = idle[~np.isin(idle, cols)]
            if idle.size:
                same = idle[costs[i, idle] == costs[i, ci]]
                if same.size:
                    cols[i] = same.min()
                    changed = True
    return cols


def solve_lsa(values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Exact rectangular linear sum assignment (rows <= cols) with deterministic tie-breaking."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise AssignmentError("cost matrix must be 2D")
    if np.isnan(values).any():
        raise AssignmentError("cost matrix contains NaN")
    n_rows, n_cols = values.shape
    if n_rows > n_cols:
        raise AssignmentError(f"more rows ({n_rows}) than columns ({n_cols})")
    if n_rows == 0:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    rows, cols = linear_sum_assignment(values)
    cols = _canonicalize(values, cols, np.zeros(n_cols, dtype=int))
    return rows, cols


def solve_assignment(costs: CostMatrix, counts: Optional[Sequence[int]] = None) -> PatchAssignment:
    """Minimum total loss injective mapping of targets onto slots.

    With `counts` (targets per frame) the frames are balanced: frame f ends
    up with exactly counts[f] targets.
    """
    values = np.asarray(costs.values, dtype=float)
    if np.isnan(values).any():
        raise AssignmentError("cost matrix contains NaN")
    n_real, n_slots = values.shape
    slots = costs.slots or [PatchSlot(0, 0, j, (0.0, 0.0)) for j in range(n_slots)]

    if counts is None:
        rows, cols = solve_lsa(values)
    else:
        frame_of = np.array([s.frame_index for s in slots])
        per_frame = np.bincount(frame_of, minlength=len(counts))
        if sum(counts) != n_real or any(c > cap for c, cap in zip(counts, per_frame)):
            raise AssignmentError("frame counts inconsistent with cost matrix")
        dummy_frames = np.concatenate(
            [np.full(cap - c, f, dtype=int) for f, (c, cap) in enumerate(zip(counts, per_frame))]
        )
        dummies = np.where(frame_of[None, :] == dummy_frames[:, None], 0.0, np.inf)
        augmented = np.vstack([values, dummies]) if dummies.size else values
        rows, cols = linear_sum_assignment(augmented)
        # rows come back sorted; keep the real ones, dummies just fill what is left
        rows, cols = rows[:n_real], cols[:n_real]
        # a real row may only move onto an idle slot of its own frame,
        # the displaced dummy takes the vacated one at zero cost
        cols = _canonicalize(values, cols, frame_of)

    used = set(int(c) for c in cols)
    pairs = [
        AssignedPair(int(r), slots[int(c)], float(1.0 - values[r, c]))
        for r, c in zip(rows, cols)
    ]
    unassigned = [s for j, s in enumerate(slots) if j not in used]
    return PatchAssignment(pairs=pairs, unassigned_slots=unassigned, fmt=costs.fmt, frames=costs.frames)


def canonical_order(cloud: PointCloud) -> np.ndarray:
    """Deterministic target order (dz, then dx, then dy) so results ignore input order."""
    xyz = cloud.as_array()
    return np.lexsort((xyz[:, 1], xyz[:, 0], xyz[:, 2]))


def assign(
    cfg: OpticalConfig,
    cloud: PointCloud,
    N: int = 1,
    lateral_ratio: float = 1.0,
    axial_ratio: float = 1.0,
) -> PatchAssignment:
    """Cost matrix + solve; with N > 1 this single solve is the inter-frame decomposition."""
    order = canonical_order(cloud)
    costs = build_cost_matrix(cfg, cloud.subset(order), N, lateral_ratio, axial_ratio)
    result = solve_assignment(costs, frame_counts(len(cloud), N))
    result.pairs = sorted(
        (AssignedPair(int(order[p.target_index]), p.slot, p.eta) for p in result.pairs),
        key=lambda p: p.target_index,
    )
    logger.debug(
        "assigned %d targets to %d slots (g=%d, F_patch=%d, N=%d), total loss %.4f",
        len(cloud), len(costs.slots), costs.fmt.grid_side, costs.fmt.patch_side, N, result.total_loss,
    )
    return result
