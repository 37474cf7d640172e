from .assignment import (
    AssignedPair,
    CostMatrix,
    PatchAssignment,
    PatchSlot,
    assign,
    build_cost_matrix,
    solve_assignment,
    solve_lsa,
)
from .gerchberg_saxton import gs_cloud, gs_compute, gs_decomposed
from .patch_engine import TimingReport, compute_masks

__all__ = [
    "AssignedPair",
    "CostMatrix",
    "PatchAssignment",
    "PatchSlot",
    "TimingReport",
    "assign",
    "build_cost_matrix",
    "compute_masks",
    "gs_cloud",
    "gs_compute",
    "gs_decomposed",
    "solve_assignment",
    "solve_lsa",
]
