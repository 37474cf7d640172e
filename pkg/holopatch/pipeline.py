"""
Single-run plumbing shared by the CLI and the sweep runner: dispatch an
algorithm on a cloud, then render and score its masks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from holopatch.algorithms import PatchAssignment, TimingReport, compute_masks, gs_cloud, gs_decomposed
from holopatch.core.log import get_logger
from holopatch.models import OpticalConfig, PointCloud, RunSettings
from holopatch.optics.core import QuantizedMask, patch_format
from holopatch.simulation.wave import IntensityVolume, build_target_volume, crop_volume, render_volume

from evaluation.metrics import score_volume
from evaluation.spots import SpotReport, analyze_spots

logger = get_logger(__name__)

CSV_COLUMNS = [
    "F",
    "T",
    "N",
    "algorithm",
    "seed",
    "contrast",
    "accuracy",
    "efficiency",
    "identified_frac",
    "mean_pos_err",
    "compute_ms",
]

GS_SAMPLING = {"gsx1": 1, "gsx3": 3, "gsx1-dec": 1, "gsx3-dec": 3}


@dataclass
class RunResult:
    algorithm: str
    masks: List[QuantizedMask]
    timing: TimingReport
    patch_side: int
    assignment: Optional[PatchAssignment] = None

    def sidecar(self, settings: RunSettings) -> Dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "seed": settings.seed,
            "F": settings.F,
            "T": settings.T,
            "N": settings.N,
            "patch_side": self.patch_side,
            "iterations": self.timing.iterations,
            "assignment": self.assignment.to_dict() if self.assignment else None,
            "timing": self.timing.to_dict(),
        }


@dataclass
class Evaluation:
    row: Dict[str, Any]
    spots: Dict[str, Any] = field(default_factory=dict)
    rendered: Optional[IntensityVolume] = None
    target: Optional[IntensityVolume] = None
    report: Optional[SpotReport] = None


def run_patch_side(settings: RunSettings) -> int:
    """Patch side of the run's (F, T, N) format; sets spot sizes for targets and metrics."""
    return patch_format(settings.F, settings.T, settings.N).patch_side


def run_algorithm(settings: RunSettings, cloud: PointCloud, workers: Optional[int] = 1) -> RunResult:
    cfg = settings.optical_config()
    patch_side = run_patch_side(settings)
    algo = settings.algo
    if algo == "np":
        masks, assignment, timing = compute_masks(cfg, cloud, settings.N, settings.bits, workers)
        return RunResult(algo, masks, timing, patch_side, assignment)
    gs = settings.gs_config(GS_SAMPLING[algo])
    if algo.endswith("-dec"):
        masks, timing = gs_decomposed(cfg, cloud, settings.N, gs, workers)
        return RunResult(algo, masks, timing, patch_side)
    mask, timing = gs_cloud(cfg, cloud, gs, patch_side, workers)
    return RunResult(algo, [mask], timing, patch_side)


def evaluate_masks(
    masks: Sequence[QuantizedMask],
    cloud: PointCloud,
    cfg: OpticalConfig,
    patch_side: int,
    eval_sampling: int = 5,
    inject_target: bool = False,
    workers: Optional[int] = None,
    crop: bool = False,
) -> Evaluation:
    """Render masks on the target planes and score them; `inject_target` scores G = I.

    Metrics cover the full rendered extent, so light sent into the higher
    orders counts as background; `crop` restricts them to the central
    lateral FoV. Spot analysis and the returned volumes always use the
    central FoV.
    """
    target = build_target_volume(cfg, cloud, patch_side, s=eval_sampling, crop=False)
    if inject_target:
        rendered = target
    else:
        rendered = render_volume(masks, cfg, target.depths, s=eval_sampling, crop=False, workers=workers)
    central_target = crop_volume(target, cfg)
    central = central_target if inject_target else crop_volume(rendered, cfg)
    if crop:
        scores = score_volume(central.grids, central_target.grids)
    else:
        scores = score_volume(rendered.grids, target.grids)
    del rendered, target
    report = analyze_spots(central, cloud, patch_side, cfg)
    row = {
        "contrast": scores.contrast,
        "accuracy": scores.accuracy,
        "efficiency": scores.efficiency,
        "identified_frac": report.identified_fraction,
        "mean_pos_err": report.mean_position_error,
    }
    spots = report.to_dict()
    spots["fill_fraction"] = scores.fill_fraction
    return Evaluation(row=row, spots=spots, rendered=central, target=central_target, report=report)


def make_row(settings: RunSettings, algorithm: str, metrics: Dict[str, Any], compute_ms: float) -> Dict[str, Any]:
    row = {
        "F": settings.F,
        "T": settings.T,
        "N": settings.N,
        "algorithm": algorithm,
        "seed": settings.seed,
        "compute_ms": compute_ms,
    }
    row.update(metrics)
    return {k: row.get(k, math.nan) for k in CSV_COLUMNS}


def run_and_evaluate(settings: RunSettings, cloud: PointCloud, workers: Optional[int] = 1) -> Evaluation:
    result = run_algorithm(settings, cloud, workers)
    evaluation = evaluate_masks(
        result.masks, cloud, settings.optical_config(), result.patch_side, settings.eval_sampling
    )
    evaluation.row = make_row(settings, result.algorithm, evaluation.row, result.timing.total_ms)
    logger.debug("%s F=%d T=%d N=%d seed=%d: %s", result.algorithm, settings.F, settings.T, settings.N, settings.seed, evaluation.row)
    return evaluation
