"""
Efficiency roll-off profiles: simulated single-spot power against the
regional efficiency model, along one lateral axis and along depth.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
import pandas as pd

from holopatch.algorithms.patch_engine import compute_masks
from holopatch.models import OpticalConfig, PointCloud, TargetPoint
from holopatch.optics.core import fov_axial, fov_lateral
from holopatch.optics.efficiency import patch_mean_efficiency, regional_efficiency
from holopatch.simulation.wave import IntensityVolume, output_pitch, render_volume

# +/- samples around the expected spot center summed as spot power
SPOT_WINDOW = 2


def spot_power(volume: IntensityVolume, dx: float, dy: float, plane: int = 0, half: int = SPOT_WINDOW) -> float:
    """Sum of G over a (2*half+1)^2 window centered on the sample nearest (dx, dy)."""
    col = volume.center + int(round(dx / volume.pitch))
    row = volume.center - int(round(dy / volume.pitch))
    grid = volume.grids[plane]
    return float(grid[max(row - half, 0):row + half + 1, max(col - half, 0):col + half + 1].sum())


def _single_spot(cfg: OpticalConfig, target: TargetPoint, s: int, bits: int) -> float:
    masks, _, _ = compute_masks(cfg, PointCloud(points=[target]), 1, bits)
    volume = render_volume(masks, cfg, [target.dz], s=s)
    return spot_power(volume, target.dx, target.dy)


def lateral_positions(cfg: OpticalConfig, count: int = 9, span: float = 0.9) -> np.ndarray:
    """`count` positions across +/- span * FoV/2, snapped to rendered samples."""
    pitch = output_pitch(cfg)
    raw = np.linspace(-span, span, count) * fov_lateral(cfg) / 2.0
    return np.round(raw / pitch) * pitch


def lateral_profile(
    cfg: OpticalConfig,
    positions: Optional[Sequence[float]] = None,
    s: int = 5,
    bits: int = 8,
) -> pd.DataFrame:
    """Focal-plane spot power along x, normalized to the on-axis spot."""
    xs = lateral_positions(cfg) if positions is None else np.asarray(positions, dtype=float)
    reference = _single_spot(cfg, TargetPoint(dx=0.0, dy=0.0, dz=0.0), s, bits)
    rows = []
    for dx in xs:
        simulated = _single_spot(cfg, TargetPoint(dx=float(dx), dy=0.0, dz=0.0), s, bits) / reference
        predicted = regional_efficiency(cfg, TargetPoint(dx=float(dx), dy=0.0, dz=0.0), (0.0, 0.0))
        rows.append(
            {
                "axis": "x",
                "position": float(dx),
                "position_fov": float(dx) / fov_lateral(cfg),
                "simulated": simulated,
                "predicted": predicted,
            }
        )
    df = pd.DataFrame(rows)
    df["rel_error"] = (df["simulated"] - df["predicted"]).abs() / df["predicted"]
    return df


def axial_profile(
    cfg: OpticalConfig,
    count: int = 9,
    span: float = 0.9,
    s: int = 5,
    bits: int = 8,
) -> pd.DataFrame:
    """On-axis spot power across depth for a full-aperture mask, normalized to dz = 0.

    The prediction is the aperture-averaged regional efficiency.
    """
    F = cfg.pixel_count
    depths = np.linspace(-span, span, count) * fov_axial(cfg, F) / 2.0
    reference = _single_spot(cfg, TargetPoint(dx=0.0, dy=0.0, dz=0.0), s, bits)
    rows = []
    for dz in depths:
        target = TargetPoint(dx=0.0, dy=0.0, dz=float(dz))
        rows.append(
            {
                "axis": "z",
                "position": float(dz),
                "position_fov": float(dz) / fov_axial(cfg, F),
                "simulated": _single_spot(cfg, target, s, bits) / reference,
                "predicted": patch_mean_efficiency(cfg, target, F),
            }
        )
    df = pd.DataFrame(rows)
    df["rel_error"] = (df["simulated"] - df["predicted"]).abs() / df["predicted"]
    return df
