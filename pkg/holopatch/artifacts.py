"""
On-disk formats.

- masks: one binary PGM (P5) per frame, gray value = quantized level,
  plus `masks.json` {config, bits, seed, algorithm, assignment, timing, files}
- volumes: one 16-bit PGM per plane, linearly scaled, a maximum-intensity
  projection, and `volume.json` {depths, pitch, scale, files, mip}
- clouds: JSON {config, F, T, N, ratios, seed, points}

Every file is written to a temporary sibling and moved into place.
"""

from __future__ import annotations

import io
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from PIL import Image
from pydantic import ValidationError

from holopatch.core.errors import ArtifactError
from holopatch.models import CloudFile, OpticalConfig, PointCloud
from holopatch.optics.core import QuantizedMask
from holopatch.simulation.wave import IntensityVolume

PathLike = Union[str, Path]

MASK_SIDECAR = "masks.json"
VOLUME_MANIFEST = "volume.json"


def atomic_write_bytes(path: PathLike, data: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path: PathLike, data: Any) -> Path:
    text = json.dumps(data, indent=2, default=_json_default)
    return atomic_write_bytes(path, (text + "\n").encode("utf-8"))


def read_json(path: PathLike) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise ArtifactError(f"file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ArtifactError(f"invalid JSON in {path}: {e}") from e


def _json_default(obj: Any) -> Any:
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "model_dump"):
        return obj.model_dump()
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


# ---- PGM ----

def _encode_pgm(levels: np.ndarray, sixteen_bit: bool) -> bytes:
    if sixteen_bit:
        # mode "I" is written as big-endian 16-bit P5 with maxval 65535
        img = Image.fromarray(levels.astype(np.int32))
    else:
        img = Image.fromarray(levels.astype(np.uint8))
    buf = io.BytesIO()
    img.save(buf, format="PPM")
    return buf.getvalue()


def write_pgm(path: PathLike, levels: np.ndarray, sixteen_bit: bool = False) -> Path:
    return atomic_write_bytes(path, _encode_pgm(np.asarray(levels), sixteen_bit))


def read_pgm(path: PathLike) -> np.ndarray:
    try:
        with Image.open(path) as img:
            return np.asarray(img).astype(np.int64)
    except FileNotFoundError as e:
        raise ArtifactError(f"file not found: {path}") from e
    except OSError as e:
        raise ArtifactError(f"cannot read PGM {path}: {e}") from e


# ---- masks ----

def mask_filename(frame: int) -> str:
    return f"mask_frame{frame:02d}.pgm"


def write_masks(
    out_dir: PathLike,
    masks: Sequence[QuantizedMask],
    config: OpticalConfig,
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write one PGM per frame and the sidecar; returns the sidecar path."""
    out = Path(out_dir)
    files = []
    for frame, mask in enumerate(masks):
        name = mask_filename(frame)
        write_pgm(out / name, mask.levels, sixteen_bit=mask.bits > 8)
        files.append(name)
    sidecar = {
        "config": config.model_dump(),
        "bits": masks[0].bits if masks else 8,
        "frames": len(files),
        "files": files,
    }
    sidecar.update(metadata or {})
    return write_json(out / MASK_SIDECAR, sidecar)


def read_masks(path: PathLike) -> Tuple[List[QuantizedMask], Dict[str, Any]]:
    """Masks and sidecar from a mask directory or its sidecar file."""
    path = Path(path)
    sidecar_path = path / MASK_SIDECAR if path.is_dir() else path
    sidecar = read_json(sidecar_path)
    try:
        config = OpticalConfig(**sidecar["config"])
        bits = int(sidecar["bits"])
        files = list(sidecar["files"])
    except (KeyError, TypeError, ValidationError) as e:
        raise ArtifactError(f"malformed mask sidecar {sidecar_path}: {e}") from e
    masks = []
    for name in files:
        levels = read_pgm(sidecar_path.parent / name)
        if levels.shape != (config.pixel_count, config.pixel_count):
            raise ArtifactError(f"{name} is {levels.shape}, expected {config.pixel_count}x{config.pixel_count}")
        dtype = np.uint8 if bits <= 8 else np.uint16
        try:
            masks.append(QuantizedMask(levels.astype(dtype), bits, config))
        except ValueError as e:
            raise ArtifactError(f"{name}: {e}") from e
    return masks, sidecar


# ---- clouds ----

def write_cloud(
    path: PathLike,
    cloud: PointCloud,
    config: OpticalConfig,
    N: int = 1,
    ratios: Tuple[float, float] = (0.9, 0.75),
) -> Path:
    doc = CloudFile(
        config=config,
        F=config.pixel_count,
        T=len(cloud),
        N=N,
        ratios=ratios,
        seed=cloud.seed,
        points=[p.as_tuple() for p in cloud.points],
    )
    return atomic_write_bytes(path, (doc.model_dump_json(indent=2) + "\n").encode("utf-8"))


def read_cloud(path: PathLike) -> CloudFile:
    try:
        return CloudFile.model_validate(read_json(path))
    except ValidationError as e:
        raise ArtifactError(f"invalid cloud file {path}: {e}") from e


# ---- volumes ----

def write_volume(out_dir: PathLike, volume: IntensityVolume, prefix: str = "plane") -> Path:
    """16-bit PGM per plane plus an x-y maximum-intensity projection, one shared scale."""
    out = Path(out_dir)
    top = float(volume.grids.max())
    scale = 65535.0 / top if top > 0 else 0.0
    files = []
    for k, grid in enumerate(volume.grids):
        name = f"{prefix}{k:03d}.pgm"
        write_pgm(out / name, np.rint(grid * scale), sixteen_bit=True)
        files.append(name)
    mip_name = f"{prefix}_mip.pgm"
    write_pgm(out / mip_name, np.rint(volume.grids.max(axis=0) * scale), sixteen_bit=True)
    manifest = {
        "depths": volume.depths.tolist(),
        "pitch": volume.pitch,
        "center": volume.center,
        "samples_per_slm_pixel": volume.samples_per_slm_pixel,
        "scale": scale,
        "files": files,
        "mip": mip_name,
    }
    return write_json(out / VOLUME_MANIFEST, manifest)
