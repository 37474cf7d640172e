"""
Physical scales, pixel coordinates, 3D steering phase and phase quantization.

Conventions: pixel (r, c) of an F x F SLM has its center at
x = (c - (F-1)/2) * p, y = ((F-1)/2 - r) * p, so rows run top to bottom
and y points up. Phases are stored wrapped to [0, 2*pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from holopatch.core.errors import PatchFormatError
from holopatch.models import OpticalConfig, TargetPoint

TWO_PI = 2.0 * np.pi


class PatchFormat(NamedTuple):
    grid_side: int
    patch_side: int
    targets_per_frame: int

    def border(self, pixel_count: int) -> int:
        """Rows/columns left over on each side of the centered g*F_patch region."""
        return (pixel_count - self.grid_side * self.patch_side) // 2

    def block(self, pixel_count: int, row: int, col: int) -> Tuple[slice, slice]:
        """Pixel slices (rows, cols) of patch (row, col)."""
        off = self.border(pixel_count)
        fp = self.patch_side
        return (
            slice(off + row * fp, off + (row + 1) * fp),
            slice(off + col * fp, off + (col + 1) * fp),
        )


def patch_format(F: int, T: int, N: int = 1) -> PatchFormat:
    if F < 1 or T < 1 or N < 1:
        raise PatchFormatError(f"F, T and N must be >= 1 (got F={F}, T={T}, N={N})")
    if N > T:
        raise PatchFormatError(f"frame count N={N} exceeds target count T={T}")
    k = -(-T // N)
    g = math.isqrt(k - 1) + 1
    f_patch = F // g
    if f_patch < 2:
        raise PatchFormatError(f"patch side {f_patch} px too small to steer (F={F}, grid {g}x{g})")
    return PatchFormat(g, f_patch, k)


# ---- degrees of freedom ----

def fov_lateral(cfg: OpticalConfig) -> float:
    return cfg.wavelength * cfg.focal_length / cfg.pitch


def fov_axial(cfg: OpticalConfig, patch_side: int) -> float:
    """Full axial span, centered on dz = 0 (exact form)."""
    lam, f, p = cfg.wavelength, cfg.focal_length, cfg.pitch
    return 16.0 * f * f * lam / (patch_side * (lam * lam + 4.0 * p * p))


def fov_axial_approx(cfg: OpticalConfig, patch_side: int) -> float:
    lam, f, p = cfg.wavelength, cfg.focal_length, cfg.pitch
    return 4.0 * f * f * lam / (patch_side * p * p)


def spot_lateral(cfg: OpticalConfig, patch_side: int) -> float:
    return cfg.wavelength * cfg.focal_length / (cfg.pitch * patch_side)


def spot_axial(cfg: OpticalConfig, patch_side: int) -> float:
    lam, f, p = cfg.wavelength, cfg.focal_length, cfg.pitch
    return 8.0 * f * f * lam / (patch_side * patch_side * p * p)


# ---- coordinates ----

def pixel_axes(cfg: OpticalConfig, pixel_count: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """(x per column, y per row) of pixel centers in meters."""
    F = cfg.pixel_count if pixel_count is None else pixel_count
    idx = np.arange(F, dtype=float)
    half = (F - 1) / 2.0
    return (idx - half) * cfg.pitch, (half - idx) * cfg.pitch


def vertex(cfg: OpticalConfig, target: TargetPoint) -> Optional[Tuple[float, float]]:
    """SLM location where the steering parabola is flat; None for focal-plane targets."""
    if target.dz == 0.0:
        return None
    f = cfg.focal_length
    return (target.dx * f / target.dz, target.dy * f / target.dz)


# ---- phase synthesis ----

def steering_phase(cfg: OpticalConfig, target: TargetPoint, x, y) -> np.ndarray:
    """Unwrapped lateral + axial steering phase at pixel positions (x, y), piston dropped.

    x and y broadcast against each other, e.g. x[None, :] and y[:, None] for a block.
    """
    lam, f = cfg.wavelength, cfg.focal_length
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    curvature = target.dz / f
    return (np.pi / (lam * f)) * (
        curvature * x * x - 2.0 * target.dx * x + curvature * y * y - 2.0 * target.dy * y
    )


def lateral_phase(cfg: OpticalConfig, target: TargetPoint, x, y) -> np.ndarray:
    return steering_phase(cfg, TargetPoint(dx=target.dx, dy=target.dy, dz=0.0), x, y)


def axial_phase(cfg: OpticalConfig, target: TargetPoint, x, y) -> np.ndarray:
    return steering_phase(cfg, TargetPoint(dx=0.0, dy=0.0, dz=target.dz), x, y)


def wrap(phase) -> np.ndarray:
    wrapped = np.mod(phase, TWO_PI)
    # np.mod can round a tiny negative value up to exactly 2*pi
    return np.where(wrapped >= TWO_PI, 0.0, wrapped)


def checkerboard(rows: int, cols: int) -> np.ndarray:
    """Binary 0/pi checkerboard with a 2-pixel period; sends idle light to the FoV corners."""
    r = np.arange(rows)[:, None]
    c = np.arange(cols)[None, :]
    return np.pi * ((r + c) % 2).astype(float)


@dataclass
class PhaseMask:
    values: np.ndarray
    config: OpticalConfig

    def __post_init__(self) -> None:
        F = self.config.pixel_count
        if self.values.shape != (F, F):
            raise ValueError(f"phase mask must be {F}x{F}, got {self.values.shape}")
        self.values = wrap(self.values)

    @classmethod
    def full_frame(cls, cfg: OpticalConfig, target: TargetPoint) -> "PhaseMask":
        x, y = pixel_axes(cfg)
        return cls(steering_phase(cfg, target, x[None, :], y[:, None]), cfg)


@dataclass
class QuantizedMask:
    levels: np.ndarray
    bits: int = 8
    config: Optional[OpticalConfig] = None

    def __post_init__(self) -> None:
        if not 1 <= self.bits <= 16:
            raise ValueError("bits must be in [1, 16]")
        if self.levels.ndim != 2 or self.levels.shape[0] != self.levels.shape[1]:
            raise ValueError("quantized mask must be a square 2D array")
        if self.levels.size and int(self.levels.max()) >= (1 << self.bits):
            raise ValueError(f"level out of range for {self.bits} bits")

    @property
    def side(self) -> int:
        return self.levels.shape[0]

    def phase(self) -> np.ndarray:
        return self.levels.astype(float) * (TWO_PI / (1 << self.bits))


def quantize(mask: PhaseMask, bits: int = 8) -> QuantizedMask:
    if not 1 <= bits <= 16:
        raise ValueError("bits must be in [1, 16]")
    n_levels = 1 << bits
    levels = np.floor(wrap(mask.values) / TWO_PI * n_levels)
    levels = np.clip(levels, 0, n_levels - 1)
    dtype = np.uint8 if bits <= 8 else np.uint16
    return QuantizedMask(levels.astype(dtype), bits, mask.config)


def dequantize(qmask: QuantizedMask, cfg: Optional[OpticalConfig] = None) -> PhaseMask:
    cfg = cfg or qmask.config
    if cfg is None:
        raise ValueError("dequantize needs an OpticalConfig")
    return PhaseMask(qmask.phase(), cfg)
