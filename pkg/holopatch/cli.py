"""
holopatch command line: mask, evaluate, sweep, gen-cloud, bench.

Usage:
    python -m holopatch gen-cloud --F 128 --T 16 --seed 3 --out runs/demo
    python -m holopatch mask --cloud runs/demo/cloud.json --algo np --out runs/demo
    python -m holopatch evaluate --masks runs/demo
    python -m holopatch sweep --preset desk --plot
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import ValidationError

from holopatch.artifacts import atomic_write_bytes, read_cloud, read_masks, write_cloud, write_json, write_masks, write_volume
from holopatch.core.errors import ConfigError, HolopatchError
from holopatch.core.log import configure_logging, get_logger
from holopatch.core.settings import OUT_DIR, load_config_file
from holopatch.models import ALGORITHMS, PointCloud, RunSettings
from holopatch.pipeline import CSV_COLUMNS, evaluate_masks, make_row, run_algorithm, run_patch_side
from holopatch.simulation.cloud import generate_cloud

from evaluation.sweep_runner import SweepPlan, bench_table, contrast_slope, run_bench, run_sweep

logger = get_logger(__name__)

# flag -> RunSettings field
_RUN_FLAGS = {
    "lambda": "wavelength",
    "focal": "focal",
    "pitch": "pitch",
    "F": "F",
    "T": "T",
    "N": "N",
    "algo": "algo",
    "seed": "seed",
    "iters": "iters",
    "sampling": "sampling",
    "bits": "bits",
    "lateral_ratio": "lateral_ratio",
    "axial_ratio": "axial_ratio",
    "eval_sampling": "eval_sampling",
    "out": "out",
}


# ---- settings ----

def _config_values(args: argparse.Namespace) -> Dict[str, Any]:
    """--config file contents keyed by RunSettings field."""
    config_path = getattr(args, "config", None)
    if not config_path:
        return {}
    try:
        data = load_config_file(config_path)
    except OSError as e:
        raise ConfigError(f"cannot read config {config_path}: {e}") from e
    return {_RUN_FLAGS.get(key, key): value for key, value in data.items()}


def resolve_settings(args: argparse.Namespace) -> RunSettings:
    """Config file values, overridden by explicitly given flags."""
    merged = _config_values(args)
    for flag, fieldname in _RUN_FLAGS.items():
        if flag in vars(args):
            merged[fieldname] = getattr(args, flag)
    known = set(RunSettings.model_fields)
    unknown = sorted(k for k in merged if k not in known)
    if unknown:
        raise ConfigError(f"unknown setting(s): {', '.join(unknown)}")
    return RunSettings(**merged)


def _out_dir(settings: RunSettings) -> Path:
    return Path(settings.out or OUT_DIR)


def _load_or_generate_cloud(settings: RunSettings, cloud_path: Optional[str]) -> PointCloud:
    cfg = settings.optical_config()
    if cloud_path:
        doc = read_cloud(cloud_path)
        if doc.config != cfg or doc.T != settings.T:
            raise ConfigError(
                f"cloud file {cloud_path} was made for F={doc.F}, T={doc.T}; run uses F={settings.F}, T={settings.T}"
            )
        return doc.cloud()
    return generate_cloud(cfg, settings.T, settings.N, settings.lateral_ratio, settings.axial_ratio, settings.seed)


def _settings_from_cloud(args: argparse.Namespace) -> argparse.Namespace:
    """F, T and the optics default to the cloud file's when a cloud is given."""
    cloud_path = getattr(args, "cloud", None)
    if not cloud_path:
        return args
    doc = read_cloud(cloud_path)
    defaults = {
        "lambda": doc.config.wavelength,
        "focal": doc.config.focal_length,
        "pitch": doc.config.pitch,
        "F": doc.F,
        "T": doc.T,
    }
    if doc.seed is not None:
        defaults["seed"] = doc.seed
    for flag, value in defaults.items():
        if flag not in vars(args):
            setattr(args, flag, value)
    return args


# ---- commands ----

def cmd_gen_cloud(args: argparse.Namespace) -> int:
    settings = resolve_settings(args)
    cfg = settings.optical_config()
    cloud = generate_cloud(cfg, settings.T, settings.N, settings.lateral_ratio, settings.axial_ratio, settings.seed)
    path = Path(args.output) if args.output else _out_dir(settings) / "cloud.json"
    write_cloud(path, cloud, cfg, settings.N, (settings.lateral_ratio, settings.axial_ratio))
    print(f"✅ {len(cloud)} targets (seed {settings.seed})")
    print(f"📁 Cloud saved: {path}")
    return 0


def cmd_mask(args: argparse.Namespace) -> int:
    settings = resolve_settings(_settings_from_cloud(args))
    if settings.algo in ("gsx1", "gsx3") and settings.N > 1:
        logger.info("%s computes a single frame; N=%d only sets the target spot size", settings.algo, settings.N)
    cfg = settings.optical_config()
    cloud = _load_or_generate_cloud(settings, args.cloud)
    result = run_algorithm(settings, cloud, workers=1)

    out = _out_dir(settings)
    sidecar = write_masks(out, result.masks, cfg, result.sidecar(settings))
    write_cloud(out / "cloud.json", cloud, cfg, settings.N, (settings.lateral_ratio, settings.axial_ratio))
    print(f"✅ {result.algorithm}: {len(result.masks)} mask(s) in {result.timing.total_ms:.3f} ms")
    print(f"📁 Masks saved: {sidecar}")
    return 0


def append_csv_row(path: Path, row: Dict[str, Any]) -> Path:
    exists = path.is_file() and path.stat().st_size > 0
    text = pd.DataFrame([row], columns=CSV_COLUMNS).to_csv(index=False, header=not exists)
    previous = path.read_bytes() if exists else b""
    return atomic_write_bytes(path, previous + text.encode("utf-8"))


def cmd_evaluate(args: argparse.Namespace) -> int:
    masks, sidecar = read_masks(args.masks)
    mask_dir = Path(args.masks) if Path(args.masks).is_dir() else Path(args.masks).parent
    cloud_path = args.cloud or str(mask_dir / "cloud.json")
    doc = read_cloud(cloud_path)
    cfg = masks[0].config
    if doc.config != cfg:
        raise ConfigError("cloud and masks were made for different optical configurations")

    for key in ("F", "T", "N", "seed"):
        if key not in vars(args) and key in sidecar:
            setattr(args, key, sidecar[key])
    if "algo" not in vars(args) and sidecar.get("algorithm"):
        args.algo = sidecar["algorithm"]
    args.__dict__.setdefault("lambda", cfg.wavelength)
    args.__dict__.setdefault("focal", cfg.focal_length)
    args.__dict__.setdefault("pitch", cfg.pitch)
    settings = resolve_settings(args)

    patch_side = sidecar.get("patch_side") or run_patch_side(settings)
    evaluation = evaluate_masks(
        masks, doc.cloud(), cfg, patch_side, settings.eval_sampling, inject_target=args.inject_target
    )
    compute_ms = float(sidecar.get("timing", {}).get("total_ms", float("nan")))
    row = make_row(settings, settings.algo, evaluation.row, compute_ms)

    csv_path = Path(args.csv) if args.csv else mask_dir / "metrics.csv"
    append_csv_row(csv_path, row)
    write_json(mask_dir / "spots.json", {"row": row, **evaluation.spots})
    if args.volume:
        write_volume(mask_dir / "volume", evaluation.rendered)
    print(
        f"📊 contrast {row['contrast']:.4g}  accuracy {row['accuracy']:.4f}  "
        f"efficiency {row['efficiency']:.4f}  identified {row['identified_frac']:.0%}"
    )
    print(f"📁 Metrics appended: {csv_path}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    overrides = {
        "F": args.F_list,
        "T": args.T_list,
        "N": args.N_list,
        "seeds": args.seeds,
        "algorithms": args.algos,
        "iters": getattr(args, "iters", None),
        "bits": getattr(args, "bits", None),
        "eval_sampling": getattr(args, "eval_sampling", None),
        "lateral_ratio": getattr(args, "lateral_ratio", None),
        "axial_ratio": getattr(args, "axial_ratio", None),
        "wavelength": getattr(args, "lambda", None),
        "focal": getattr(args, "focal", None),
        "pitch": getattr(args, "pitch", None),
    }
    for key, value in _config_values(args).items():
        if overrides.get(key) is None and key in SweepPlan.model_fields:
            overrides[key] = value
    plan = SweepPlan.from_preset(args.preset, **overrides)
    out = Path(getattr(args, "out", None) or os.path.join(OUT_DIR, f"sweep-{args.preset}"))
    print(f"🔬 Sweep '{args.preset}': {plan.run_count()} runs")
    outcome = run_sweep(plan, out, workers=args.workers, plot=args.plot)
    for _, cell in outcome.summary.iterrows():
        print(
            f"  F={cell['F']:<4} T={cell['T']:<4} N={cell['N']:<3} {cell['algorithm']:<9}"
            f" contrast {cell['contrast_mean']:.4g} ± {cell['contrast_ci95']:.2g}"
            f"  {cell['compute_ms_mean']:.3g} ms"
        )
    for F in plan.F:
        slope = contrast_slope(outcome.summary, F, plan.T)
        if slope == slope:
            print(f"  📈 F={F}: np contrast slope {slope:.2f} decades/decade")
    if outcome.failures:
        print(f"❌ {outcome.failures} run(s) failed; see {outcome.files['report']}")
    print(f"📁 Results saved: {out}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    plan = SweepPlan(
        F=args.F_list or [128],
        T=args.T_list or [16],
        N=args.N_list or [1],
        seeds=args.seeds or 3,
        algorithms=args.algos or ["np", "gsx1", "gsx3"],
        iters=getattr(args, "iters", 50),
    )
    print(f"⏱️  Bench: {plan.run_count()} single-threaded runs")
    runs = run_bench(plan, repeats=args.repeats, progress=True)
    table = bench_table(runs)
    print(table.to_string(index=False, float_format=lambda v: f"{v:.4g}"))
    out = Path(getattr(args, "out", None) or os.path.join(OUT_DIR, "bench"))
    path = atomic_write_bytes(out / "bench.csv", runs.to_csv(index=False).encode("utf-8"))
    print(f"📁 Timings saved: {path}")
    return 0


# ---- parser ----

def _optics_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--config", help="JSON or YAML file mirroring the flags (flags win)")
    p.add_argument("--lambda", type=float, help="wavelength in meters")
    p.add_argument("--focal", type=float, help="lens focal length in meters")
    p.add_argument("--pitch", type=float, help="SLM pixel pitch in meters")
    p.add_argument("--iters", type=int, help="GS iterations")
    p.add_argument("--sampling", type=int, help="GS computational pixels per SLM pixel (overrides gsx1/gsx3)")
    p.add_argument("--bits", type=int, help="phase quantization bits")
    p.add_argument("--lateral-ratio", dest="lateral_ratio", type=float, help="fraction of the lateral FoV used")
    p.add_argument("--axial-ratio", dest="axial_ratio", type=float, help="fraction of the axial FoV used")
    p.add_argument("--eval-sampling", dest="eval_sampling", type=int, help="simulation pixels per SLM pixel for metrics")
    p.add_argument("--out", help="output directory")
    return p


def _run_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--F", type=int, help="SLM pixels per side")
    p.add_argument("--T", type=int, help="target count")
    p.add_argument("--N", type=int, help="frame count")
    p.add_argument("--algo", choices=ALGORITHMS, help="hologram algorithm")
    p.add_argument("--seed", type=int, help="random seed")
    return p


def _grid_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--F", dest="F_list", type=int, nargs="+", help="SLM sizes")
    p.add_argument("--T", dest="T_list", type=int, nargs="+", help="target counts")
    p.add_argument("--N", dest="N_list", type=int, nargs="+", help="frame counts")
    p.add_argument("--seeds", type=int, help="clouds per cell")
    p.add_argument("--algos", nargs="+", choices=ALGORITHMS, help="algorithms to compare")
    return p


def build_parser() -> argparse.ArgumentParser:
    optics, run, grid = _optics_parent(), _run_parent(), _grid_parent()
    parser = argparse.ArgumentParser(prog="holopatch", description="Patch-based point-cloud holography toolkit")
    parser.add_argument("--debug", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-cloud", parents=[optics, run], help="generate a random point cloud")
    p.add_argument("--output", help="cloud file path (default <out>/cloud.json)")
    p.set_defaults(func=cmd_gen_cloud)

    p = sub.add_parser("mask", parents=[optics, run], help="compute phase masks")
    p.add_argument("--cloud", help="cloud file; generated from --seed when omitted")
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("evaluate", parents=[optics, run], help="render masks and append a metrics row")
    p.add_argument("--masks", required=True, help="mask directory or its masks.json")
    p.add_argument("--cloud", help="cloud file (default <masks>/cloud.json)")
    p.add_argument("--csv", help="metrics CSV to append to (default <masks>/metrics.csv)")
    p.add_argument("--volume", action="store_true", help="also export the rendered volume as PGMs")
    p.add_argument("--inject-target", dest="inject_target", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", parents=[optics, grid], help="run a parameter sweep")
    p.add_argument("--preset", default="desk", help="preset from configs/sweeps.yaml")
    p.add_argument("--workers", type=int, default=1, help="parallel clouds (capped by HOLOPATCH_THREADS)")
    p.add_argument("--plot", action="store_true", help="write summary plots")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", parents=[optics, grid], help="single-threaded compute-time comparison")
    p.add_argument("--repeats", type=int, default=3, help="best-of repeats per run")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(True if args.debug else None)
    try:
        return args.func(args)
    except (HolopatchError, ValidationError, ValueError, OSError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
