"""
Sweep Runner
============

Runs the (F, T, N) x seed x algorithm cross product on matched random
clouds, writes one CSV row per run, then aggregates per cell (mean,
standard deviation, 95% confidence interval of the mean) and NP-vs-GS
ratios.

Usage:
    from evaluation.sweep_runner import SweepPlan, run_sweep
    outcome = run_sweep(SweepPlan.from_preset("desk"), "runs/desk")
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, field_validator
from scipy import stats
from tqdm import tqdm

from holopatch.artifacts import atomic_write_bytes, write_json
from holopatch.core.errors import HolopatchError
from holopatch.core.log import get_logger
from holopatch.core.settings import optics_defaults, sweep_preset, worker_count
from holopatch.models import ALGORITHMS, RunSettings
from holopatch.pipeline import CSV_COLUMNS, make_row, run_algorithm, run_and_evaluate
from holopatch.simulation.cloud import generate_cloud

logger = get_logger(__name__)

METRICS = ["contrast", "accuracy", "efficiency", "identified_frac", "mean_pos_err", "compute_ms"]
RUN_COLUMNS = CSV_COLUMNS + ["status", "message"]
CELL_KEYS = ["F", "T", "N", "algorithm"]

_OPTICS = optics_defaults()


class SweepPlan(BaseModel):
    F: List[int]
    T: List[int]
    N: List[int] = [1]
    seeds: int = Field(default=25, ge=1)
    seed_offset: int = 0
    algorithms: List[str] = ["np", "gsx1", "gsx3"]
    lateral_ratio: float = Field(default=0.9, gt=0, le=1)
    axial_ratio: float = Field(default=0.75, gt=0, le=1)
    iters: int = Field(default=50, ge=1)
    bits: int = Field(default=8, ge=1, le=16)
    eval_sampling: int = Field(default=5, ge=1)
    wavelength: float = _OPTICS.get("wavelength", 532e-9)
    focal: float = _OPTICS.get("focal_length", 0.1)
    pitch: float = _OPTICS.get("pitch", 12.5e-6)

    @field_validator("algorithms")
    @classmethod
    def _known(cls, v: List[str]) -> List[str]:
        unknown = [a for a in v if a not in ALGORITHMS]
        if unknown:
            raise ValueError(f"unknown algorithm(s): {', '.join(unknown)}")
        return v

    @classmethod
    def from_preset(cls, name: str, **overrides: Any) -> "SweepPlan":
        data = sweep_preset(name)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def distributions(self) -> List[Tuple[int, int, int, int]]:
        """(F, T, N, seed) for every matched cloud."""
        seeds = range(self.seed_offset, self.seed_offset + self.seeds)
        return list(itertools.product(self.F, self.T, self.N, seeds))

    def run_count(self) -> int:
        return len(self.distributions()) * len(self.algorithms)

    def settings(self, F: int, T: int, N: int, seed: int, algo: str) -> RunSettings:
        return RunSettings(
            wavelength=self.wavelength,
            focal=self.focal,
            pitch=self.pitch,
            F=F,
            T=T,
            N=N,
            algo=algo,
            seed=seed,
            iters=self.iters,
            bits=self.bits,
            lateral_ratio=self.lateral_ratio,
            axial_ratio=self.axial_ratio,
            eval_sampling=self.eval_sampling,
        )


def _error_row(F: int, T: int, N: int, seed: int, algo: str, message: str) -> Dict[str, Any]:
    row = {k: math.nan for k in CSV_COLUMNS}
    row.update({"F": F, "T": T, "N": N, "algorithm": algo, "seed": seed, "status": "error", "message": message})
    return row


def run_distribution(plan: SweepPlan, F: int, T: int, N: int, seed: int) -> List[Dict[str, Any]]:
    """One matched cloud evaluated across every algorithm of the plan."""
    try:
        base = plan.settings(F, T, N, seed, plan.algorithms[0])
        cloud = generate_cloud(base.optical_config(), T, N, plan.lateral_ratio, plan.axial_ratio, seed)
    except (HolopatchError, ValueError) as e:
        logger.warning("cloud generation failed (F=%d T=%d N=%d seed=%d): %s", F, T, N, seed, e)
        return [_error_row(F, T, N, seed, algo, str(e)) for algo in plan.algorithms]

    rows = []
    for algo in plan.algorithms:
        try:
            evaluation = run_and_evaluate(plan.settings(F, T, N, seed, algo), cloud)
            rows.append({**evaluation.row, "status": "ok", "message": ""})
        except (HolopatchError, ValueError) as e:
            logger.warning("run failed (F=%d T=%d N=%d seed=%d %s): %s", F, T, N, seed, algo, e)
            rows.append(_error_row(F, T, N, seed, algo, str(e)))
    return rows


def _run_distribution_job(args: Tuple[dict, int, int, int, int]) -> List[Dict[str, Any]]:
    plan_data, F, T, N, seed = args
    return run_distribution(SweepPlan(**plan_data), F, T, N, seed)


def collect_runs(plan: SweepPlan, workers: int = 1, progress: bool = True) -> pd.DataFrame:
    jobs = plan.distributions()
    rows: List[Dict[str, Any]] = []
    bar = tqdm(total=len(jobs), desc="sweep", unit="cloud", disable=not progress)
    if workers > 1:
        payload = [(plan.model_dump(), *job) for job in jobs]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_distribution_job, p) for p in payload]
            for fut in as_completed(futures):
                rows.extend(fut.result())
                bar.update(1)
    else:
        for F, T, N, seed in jobs:
            rows.extend(run_distribution(plan, F, T, N, seed))
            bar.update(1)
    bar.close()
    df = pd.DataFrame(rows, columns=RUN_COLUMNS)
    return df.sort_values(CELL_KEYS + ["seed"], kind="stable").reset_index(drop=True)


# ---- aggregation ----

def confidence_halfwidth(std: float, n: int, level: float = 0.95) -> float:
    if n < 2 or not np.isfinite(std):
        return math.nan
    return float(stats.t.ppf(0.5 + level / 2.0, n - 1) * std / math.sqrt(n))


def summarize(runs: pd.DataFrame) -> pd.DataFrame:
    """Per-cell mean, std and 95% CI half-width of every metric over successful runs."""
    ok = runs[runs["status"] == "ok"] if "status" in runs else runs
    records = []
    for key, group in ok.groupby(CELL_KEYS, sort=True):
        record = dict(zip(CELL_KEYS, key))
        record["runs"] = len(group)
        for metric in METRICS:
            values = group[metric].astype(float).to_numpy()
            values = values[~np.isnan(values)]
            mean = float(np.mean(values)) if values.size else math.nan
            std = float(np.std(values, ddof=1)) if values.size > 1 and np.all(np.isfinite(values)) else math.nan
            record[f"{metric}_mean"] = mean
            record[f"{metric}_std"] = std
            record[f"{metric}_ci95"] = confidence_halfwidth(std, values.size)
        records.append(record)
    return pd.DataFrame.from_records(records)


def ratios(summary: pd.DataFrame, reference: str = "np") -> pd.DataFrame:
    """Per cell, reference-algorithm mean divided by each other algorithm's mean."""
    rows = []
    if summary.empty:
        return pd.DataFrame()
    metrics = ["contrast", "accuracy", "efficiency", "compute_ms"]
    for (F, T, N), cell in summary.groupby(["F", "T", "N"], sort=True):
        ref = cell[cell["algorithm"] == reference]
        if ref.empty:
            continue
        for _, other in cell[cell["algorithm"] != reference].iterrows():
            row = {"F": F, "T": T, "N": N, "versus": other["algorithm"]}
            for metric in metrics:
                denom = other[f"{metric}_mean"]
                row[f"{metric}_ratio"] = float(ref.iloc[0][f"{metric}_mean"] / denom) if denom else math.nan
            rows.append(row)
    return pd.DataFrame(rows)


def contrast_slope(summary: pd.DataFrame, F: int, Ts: Sequence[int], algorithm: str = "np", N: int = 1) -> float:
    """Log-log slope of mean contrast over T (decades per decade)."""
    if summary.empty:
        return math.nan
    cell = summary[(summary["F"] == F) & (summary["N"] == N) & (summary["algorithm"] == algorithm)]
    cell = cell[cell["T"].isin(list(Ts))].sort_values("T")
    if len(cell) < 2:
        return math.nan
    x = np.log10(cell["T"].to_numpy(dtype=float))
    y = np.log10(cell["contrast_mean"].to_numpy(dtype=float))
    if not np.all(np.isfinite(y)):
        return math.nan
    return float(np.polyfit(x, y, 1)[0])


def plot_summary(summary: pd.DataFrame, out_dir: Path) -> List[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    paths = []
    for metric, ylabel in (("contrast", "contrast"), ("compute_ms", "compute time (ms)")):
        fig, ax = plt.subplots(figsize=(6, 4))
        for (F, N, algo), cell in summary.groupby(["F", "N", "algorithm"], sort=True):
            cell = cell.sort_values("T")
            means = cell[f"{metric}_mean"].to_numpy(dtype=float)
            if not np.any(np.isfinite(means)):
                continue
            label = f"{algo} F={F}" + (f" N={N}" if N != 1 else "")
            ax.errorbar(cell["T"], means, yerr=cell[f"{metric}_ci95"].fillna(0.0), marker="o", capsize=3, label=label)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("targets T")
        ax.set_ylabel(ylabel)
        ax.legend(fontsize=7)
        fig.tight_layout()
        path = out_dir / f"{metric}_vs_T.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)
    return paths


def _write_csv(path: Path, df: pd.DataFrame) -> Path:
    return atomic_write_bytes(path, df.to_csv(index=False).encode("utf-8"))


def _records(df: pd.DataFrame) -> List[Dict[str, Any]]:
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
        if isinstance(v, np.generic):
            return clean(v.item())
        return v

    return [{k: clean(v) for k, v in rec.items()} for rec in df.to_dict(orient="records")]


@dataclass
class SweepOutcome:
    runs: pd.DataFrame
    summary: pd.DataFrame
    ratios: pd.DataFrame
    files: Dict[str, Path] = field(default_factory=dict)

    @property
    def failures(self) -> int:
        return int((self.runs["status"] != "ok").sum())


def run_sweep(
    plan: SweepPlan,
    out_dir: str | Path,
    workers: Optional[int] = 1,
    plot: bool = False,
    progress: bool = True,
) -> SweepOutcome:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n_workers = worker_count(workers)
    started = time.perf_counter()

    runs = collect_runs(plan, n_workers, progress)
    summary = summarize(runs)
    ratio_table = ratios(summary)
    files = {
        "runs": _write_csv(out / "runs.csv", runs),
        "summary": _write_csv(out / "summary.csv", summary),
    }
    if not ratio_table.empty:
        files["ratios"] = _write_csv(out / "ratios.csv", ratio_table)

    report = {
        "metadata": {
            "timestamp": datetime.now().isoformat(),
            "duration_s": time.perf_counter() - started,
            "workers": n_workers,
            # timings from concurrent runs compete for cores
            "timing_mode": "single" if n_workers == 1 else "parallel (non-comparative)",
        },
        "plan": plan.model_dump(),
        "runs": len(runs),
        "failures": int((runs["status"] != "ok").sum()),
        "failed_runs": _records(runs[runs["status"] != "ok"][["F", "T", "N", "algorithm", "seed", "message"]]),
        "cells": _records(summary),
        "ratios": _records(ratio_table),
    }
    files["report"] = write_json(out / "summary.json", report)
    if plot and not summary.empty:
        for path in plot_summary(summary, out):
            files[path.stem] = path
    return SweepOutcome(runs=runs, summary=summary, ratios=ratio_table, files=files)


# ---- bench ----

def run_bench(
    plan: SweepPlan,
    repeats: int = 1,
    progress: bool = False,
) -> pd.DataFrame:
    """Single-threaded input-to-mask timing only (no rendering), best of `repeats` per run."""
    rows = []
    jobs = plan.distributions()
    for F, T, N, seed in tqdm(jobs, desc="bench", unit="cloud", disable=not progress):
        base = plan.settings(F, T, N, seed, plan.algorithms[0])
        cloud = generate_cloud(base.optical_config(), T, N, plan.lateral_ratio, plan.axial_ratio, seed)
        for algo in plan.algorithms:
            settings = plan.settings(F, T, N, seed, algo)
            best = min(run_algorithm(settings, cloud, workers=1).timing.total_ms for _ in range(max(1, repeats)))
            rows.append(make_row(settings, algo, {}, best))
    df = pd.DataFrame(rows)
    return df[["F", "T", "N", "algorithm", "seed", "compute_ms"]]


def bench_table(df: pd.DataFrame) -> pd.DataFrame:
    """Mean compute time per cell and the slowdown of each algorithm relative to np."""
    table = df.groupby(CELL_KEYS, sort=True)["compute_ms"].mean().unstack("algorithm")
    if "np" in table:
        for algo in [c for c in table.columns if c != "np"]:
            table[f"{algo}/np"] = table[algo] / table["np"]
    return table.reset_index()
