from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Dict

import yaml
from dotenv import load_dotenv

from .errors import ConfigError


def get_project_root() -> str:
    """Absolute path to the repository root (two levels above this file's package)."""
    current_file = os.path.abspath(__file__)
    # holopatch/core/settings.py -> repo root
    return os.path.dirname(os.path.dirname(os.path.dirname(current_file)))


PROJECT_ROOT = get_project_root()

# Load .env from repo root if present
env_path = os.path.join(PROJECT_ROOT, ".env")
if os.path.isfile(env_path):
    load_dotenv(env_path)
else:
    load_dotenv()


def _env_flag(name: str, default: str = "0") -> bool:
    return os.getenv(name, default) not in ("", "0", "false", "False")


# ---- Config ----
THREADS = max(1, int(os.getenv("HOLOPATCH_THREADS", "1")))
DEBUG = _env_flag("HOLOPATCH_DEBUG")
OUT_DIR = os.getenv("HOLOPATCH_OUT", "runs")

# Used when configs/*.yaml is missing
_FALLBACK_CONFIGS: Dict[str, Dict[str, Any]] = {
    "optics": {
        "optics": {
            "wavelength": 532e-9,
            "focal_length": 0.1,
            "pitch": 12.5e-6,
            "pixel_count": 128,
        },
        "ratios": {"lateral": 0.9, "axial": 0.75},
        "experimental": {"lateral": 0.8, "axial": 0.5},
        "bits": 8,
        "eval_sampling": 5,
        "gs_iterations": 50,
    },
    "sweeps": {
        "desk": {
            "F": [32, 64, 128],
            "T": [1, 4, 16],
            "N": [1],
            "seeds": 25,
            "algorithms": ["np", "gsx1", "gsx3"],
        },
    },
}


def worker_count(requested: int | None = None) -> int:
    """Requested worker count capped by HOLOPATCH_THREADS."""
    if requested is None:
        return THREADS
    return max(1, min(int(requested), THREADS))


def load_yaml_config(name: str) -> Dict[str, Any]:
    """Load configs/<name>.yaml, falling back to the built-in defaults."""
    path = os.path.join(PROJECT_ROOT, "configs", f"{name}.yaml")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except FileNotFoundError:
        data = {}
    if not data:
        data = json.loads(json.dumps(_FALLBACK_CONFIGS.get(name, {})))
    return data


def load_config_file(path: str | Path) -> Dict[str, Any]:
    """Read a JSON or YAML run config. Keys use flag names with '-' mapped to '_'."""
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must contain a mapping")
    return {str(k).replace("-", "_"): v for k, v in data.items()}


def optics_defaults() -> Dict[str, Any]:
    return dict(load_yaml_config("optics").get("optics", {}))


def sweep_preset(name: str) -> Dict[str, Any]:
    presets = load_yaml_config("sweeps")
    if name not in presets:
        raise ConfigError(f"unknown sweep preset '{name}' (known: {', '.join(sorted(presets))})")
    return dict(presets[name])
