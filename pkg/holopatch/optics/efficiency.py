"""
Regional diffraction efficiency of a pixelated steering mask.

The efficiency at SLM location (x0, y0) is a product of two squared sinc
factors whose arguments are half the local phase step between adjacent
pixels. For a target at depth dz the step grows linearly with the distance
to the parabola vertex (dx*f/dz, dy*f/dz); at dz = 0 it is the constant
lateral step pi*p*d/(lambda*f).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from holopatch.models import OpticalConfig, TargetPoint

from .core import fov_axial, fov_lateral, pixel_axes

# below this the Taylor series is exact to double precision
_SINC_SERIES_LIMIT = 1e-4
# |dz| below FOCAL_PLANE_EPS * f is treated as the focal plane
FOCAL_PLANE_EPS = 1e-12


def sinc_squared(u) -> np.ndarray:
    """(sin u / u)^2 with the removable singularity at u = 0 handled by series."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < _SINC_SERIES_LIMIT
    safe = np.where(small, 1.0, u)
    u2 = u * u
    ratio = np.where(small, 1.0 - u2 / 6.0 + u2 * u2 / 120.0, np.sin(safe) / safe)
    return ratio * ratio


@dataclass(frozen=True)
class EfficiencySample:
    location: Tuple[float, float]
    target: TargetPoint
    eta: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"efficiency {self.eta} outside [0, 1]")


def step_arguments(cfg: OpticalConfig, dx, dy, dz, x0, y0) -> Tuple[np.ndarray, np.ndarray]:
    """Per-axis sinc arguments; all inputs broadcast (targets vs locations)."""
    lam, f, p = cfg.wavelength, cfg.focal_length, cfg.pitch
    dx = np.asarray(dx, dtype=float)
    dy = np.asarray(dy, dtype=float)
    dz = np.asarray(dz, dtype=float)
    dz = np.where(np.abs(dz) < FOCAL_PLANE_EPS * f, 0.0, dz)
    # pi*p*dz/(lam f^2) * (x0 - dx f/dz), multiplied through by dz so dz = 0
    # reduces to the lateral form -pi*p*dx/(lam f) without a division
    scale = np.pi * p / (lam * f * f)
    ux = scale * (dz * x0 - dx * f)
    uy = scale * (dz * y0 - dy * f)
    return ux, uy


def efficiency_grid(cfg: OpticalConfig, dx, dy, dz, x0, y0) -> np.ndarray:
    ux, uy = step_arguments(cfg, dx, dy, dz, x0, y0)
    return sinc_squared(ux) * sinc_squared(uy)


def regional_efficiency(cfg: OpticalConfig, target: TargetPoint, location: Tuple[float, float]) -> float:
    x0, y0 = location
    return float(efficiency_grid(cfg, target.dx, target.dy, target.dz, x0, y0))


def sample(cfg: OpticalConfig, target: TargetPoint, location: Tuple[float, float]) -> EfficiencySample:
    return EfficiencySample(location=tuple(location), target=target, eta=regional_efficiency(cfg, target, location))


def axis_factors(cfg: OpticalConfig, target: TargetPoint, location: Tuple[float, float]) -> Tuple[float, float]:
    ux, uy = step_arguments(cfg, target.dx, target.dy, target.dz, *location)
    return float(sinc_squared(ux)), float(sinc_squared(uy))


def patch_mean_efficiency(cfg: OpticalConfig, target: TargetPoint, patch_side: int) -> float:
    """Mean regional efficiency over the pixel centers of a patch centered on the optical axis."""
    xs, ys = pixel_axes(cfg, patch_side)
    ux, _ = step_arguments(cfg, target.dx, 0.0, target.dz, xs, 0.0)
    _, uy = step_arguments(cfg, 0.0, target.dy, target.dz, 0.0, ys)
    # separable: mean of a product over the grid is the product of axis means
    return float(sinc_squared(ux).mean() * sinc_squared(uy).mean())


def corner_case_efficiency(cfg: OpticalConfig, patch_side: int, lateral_ratio: float, axial_ratio: float) -> float:
    """Worst-case efficiency over the corners of the ratio-limited volume.

    Lateral and axial roll-offs compound: the lateral factor is the
    regional efficiency at the patch center for a focal-plane target on the
    lateral corner, the axial factor is the patch-averaged efficiency of an
    on-axis target on the axial corner.

    Scoring the corner target against the farthest patch center instead
    depends on the patch grid and can land on a sinc zero, since the
    assignment never pairs a corner target with that patch; it bounds
    nothing the pipeline delivers.
    """
    if not (0.0 <= lateral_ratio <= 1.0 and 0.0 <= axial_ratio <= 1.0):
        raise ValueError("ratios must lie in [0, 1]")
    half_xy = lateral_ratio * fov_lateral(cfg) / 2.0
    half_z = axial_ratio * fov_axial(cfg, patch_side) / 2.0
    worst = 1.0
    for sx, sy, sz in itertools.product((-1.0, 1.0), repeat=3):
        lateral = regional_efficiency(cfg, TargetPoint(dx=sx * half_xy, dy=sy * half_xy, dz=0.0), (0.0, 0.0))
        axial = patch_mean_efficiency(cfg, TargetPoint(dx=0.0, dy=0.0, dz=sz * half_z), patch_side)
        worst = min(worst, lateral * axial)
    return worst
