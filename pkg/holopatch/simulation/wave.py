"""
Supersampled, zero-padded Fourier-optics simulation of a 2f system.

An F x F mask sampled at s x s computational pixels per SLM pixel sits in
the central third of a 3sF x 3sF array. A plane at depth dz is reached by
multiplying with the conjugate defocus term and applying a unitary,
centered 2D DFT. The rear-plane sample pitch is lambda*f/(3*F*p): padding
sets the pitch, supersampling widens the rendered extent to s lateral
FoVs (the higher orders of the pixelated SLM).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft

from holopatch.core.errors import CapacityError, MetricError
from holopatch.core.settings import worker_count
from holopatch.models import OpticalConfig, PointCloud
from holopatch.optics.core import QuantizedMask, spot_lateral

PAD_FACTOR = 3
# membership tolerance when matching target depths to plane depths
_DEPTH_RTOL = 1e-9


@dataclass
class IntensityVolume:
    """Stack of lateral intensity grids at increasing depths.

    `center` is the (row, col) index of the optical axis: column j sits at
    x = (j - center) * pitch and row i at y = (center - i) * pitch.
    """

    depths: np.ndarray
    grids: np.ndarray
    pitch: float
    samples_per_slm_pixel: int
    center: int

    def __post_init__(self) -> None:
        self.depths = np.asarray(self.depths, dtype=float)
        self.grids = np.asarray(self.grids, dtype=float)
        if self.grids.ndim != 3 or self.grids.shape[0] != self.depths.size:
            raise ValueError("grids must be (planes, rows, cols) with one depth per plane")
        if self.depths.size > 1 and np.any(np.diff(self.depths) <= 0):
            raise ValueError("depths must be strictly increasing")
        if self.grids.size and self.grids.min() < 0:
            raise ValueError("intensities must be non-negative")

    @property
    def planes(self) -> List[Tuple[float, np.ndarray]]:
        return list(zip(self.depths.tolist(), self.grids))

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.grids.shape

    @property
    def lateral_extent(self) -> float:
        return self.grids.shape[-1] * self.pitch

    def axes(self) -> Tuple[np.ndarray, np.ndarray]:
        """(x per column, y per row) in meters."""
        idx = np.arange(self.grids.shape[-1], dtype=float)
        return (idx - self.center) * self.pitch, (self.center - idx) * self.pitch

    def plane_index(self, dz: float) -> int:
        hits = np.flatnonzero(np.isclose(self.depths, dz, rtol=_DEPTH_RTOL, atol=1e-15))
        if hits.size == 0:
            raise KeyError(f"no plane at dz={dz:.4e}")
        return int(hits[0])

    def stack(self) -> np.ndarray:
        return self.grids

    def total_power(self) -> float:
        return float(self.grids.sum())


# ---- grids ----

def output_pitch(cfg: OpticalConfig) -> float:
    return cfg.wavelength * cfg.focal_length / (PAD_FACTOR * cfg.pixel_count * cfg.pitch)


def computational_axes(cfg: OpticalConfig, s: int) -> Tuple[np.ndarray, np.ndarray]:
    """(x per column, y per row) of the 3sF computational samples, pitch p/s."""
    n = PAD_FACTOR * s * cfg.pixel_count
    idx = np.arange(n, dtype=float)
    half = (n - 1) / 2.0
    step = cfg.pitch / s
    return (idx - half) * step, (half - idx) * step


def crop_window(cfg: OpticalConfig, s: int) -> slice:
    """Central 3F - 1 output samples: one lateral FoV minus its two edge samples.

    The edges hold the +/- FoV/2 orders of the idle checkerboard, which
    are outside the addressable volume.
    """
    center = PAD_FACTOR * s * cfg.pixel_count // 2
    half = PAD_FACTOR * cfg.pixel_count // 2 - 1
    return slice(center - half, center + half + 1)


def crop_volume(volume: IntensityVolume, cfg: OpticalConfig) -> IntensityVolume:
    """Central lateral FoV (crop_window) of a full-extent volume, as a copy."""
    s = volume.samples_per_slm_pixel
    n = PAD_FACTOR * s * cfg.pixel_count
    if volume.grids.shape[1:] != (n, n):
        raise ValueError(f"volume of lateral shape {volume.grids.shape[1:]} is not the full {n}x{n} grid")
    window = crop_window(cfg, s)
    return IntensityVolume(
        volume.depths, volume.grids[:, window, window].copy(), volume.pitch, s, n // 2 - window.start
    )


def _samples(cfg: OpticalConfig, field: np.ndarray) -> int:
    n = field.shape[0]
    if field.ndim != 2 or field.shape[1] != n or n % (PAD_FACTOR * cfg.pixel_count):
        raise ValueError(f"field of shape {field.shape} is not a 3sF x 3sF grid for F={cfg.pixel_count}")
    return n // (PAD_FACTOR * cfg.pixel_count)


def field_from_phase(phase: np.ndarray, s: int) -> np.ndarray:
    """Unit-amplitude SLM field, each pixel replicated s x s, centered in a 3sF zero array."""
    if s < 1:
        raise ValueError("sampling must be >= 1")
    block = np.exp(1j * phase)
    if s > 1:
        block = np.repeat(np.repeat(block, s, axis=0), s, axis=1)
    side = block.shape[0]
    field = np.zeros((PAD_FACTOR * side, PAD_FACTOR * side), dtype=complex)
    field[side:2 * side, side:2 * side] = block
    return field


def field_from_mask(mask: QuantizedMask, s: int) -> np.ndarray:
    return field_from_phase(mask.phase(), s)


def defocus(cfg: OpticalConfig, s: int, dz: float) -> Tuple[np.ndarray, np.ndarray]:
    """Separable factors (per row, per column) of exp(-i*pi*dz/(lambda f^2) * (x^2 + y^2))."""
    x, y = computational_axes(cfg, s)
    k = -np.pi * dz / (cfg.wavelength * cfg.focal_length ** 2)
    return np.exp(1j * k * y * y)[:, None], np.exp(1j * k * x * x)[None, :]


def propagate_field(field: np.ndarray, cfg: OpticalConfig, dz: float, workers: Optional[int] = None) -> np.ndarray:
    """Complex field at the plane dz behind the rear focal plane."""
    s = _samples(cfg, field)
    if dz != 0.0:
        rows, cols = defocus(cfg, s, dz)
        field = field * rows * cols
    return fft.fftshift(fft.ifft2(fft.ifftshift(field), norm="ortho", workers=worker_count(workers)))


def back_propagate(plane_field: np.ndarray, cfg: OpticalConfig, dz: float, workers: Optional[int] = None) -> np.ndarray:
    """Exact inverse of propagate_field."""
    s = _samples(cfg, plane_field)
    field = fft.fftshift(fft.fft2(fft.ifftshift(plane_field), norm="ortho", workers=worker_count(workers)))
    if dz != 0.0:
        rows, cols = defocus(cfg, s, dz)
        field = field * np.conj(rows) * np.conj(cols)
    return field


def propagate_to_plane(field: np.ndarray, cfg: OpticalConfig, dz: float, workers: Optional[int] = None) -> np.ndarray:
    out = propagate_field(field, cfg, dz, workers)
    return out.real ** 2 + out.imag ** 2


def _plane_depths(depths: Iterable[float]) -> np.ndarray:
    d = np.unique(np.asarray(list(depths), dtype=float))
    if d.size == 0:
        raise ValueError("at least one depth plane is required")
    return d


def render_volume(
    masks: Sequence[QuantizedMask],
    cfg: OpticalConfig,
    depths: Iterable[float],
    s: int = 5,
    crop: bool = True,
    workers: Optional[int] = None,
) -> IntensityVolume:
    """Time-averaged intensity of the frames on each depth plane.

    Each frame is normalized to unit input power before averaging, so the
    full (uncropped) plane of the result carries unit power.
    """
    if not masks:
        raise ValueError("render_volume needs at least one mask")
    d = _plane_depths(depths)
    n = PAD_FACTOR * s * cfg.pixel_count
    window = crop_window(cfg, s) if crop else slice(0, n)
    size = window.stop - window.start
    acc = np.zeros((d.size, size, size))
    power = float((s * cfg.pixel_count) ** 2)
    for mask in masks:
        field = field_from_mask(mask, s)
        for k, dz in enumerate(d):
            acc[k] += propagate_to_plane(field, cfg, float(dz), workers)[window, window]
    acc /= power * len(masks)
    center = n // 2 - window.start
    return IntensityVolume(d, acc, output_pitch(cfg), s, center)


def disk_mask(x: np.ndarray, y: np.ndarray, cx: float, cy: float, diameter: float) -> np.ndarray:
    """Boolean grid of samples strictly inside the disk."""
    r2 = (diameter / 2.0) ** 2
    return ((x[None, :] - cx) ** 2 + (y[:, None] - cy) ** 2) < r2


def build_target_volume(
    cfg: OpticalConfig,
    cloud: PointCloud,
    patch_side: int,
    depths: Optional[Iterable[float]] = None,
    s: int = 5,
    crop: bool = True,
) -> IntensityVolume:
    """Binary target volume: a disk of diameter w_xy(F_patch) per target on its plane.

    Only planes that hold at least one target are kept.
    """
    xyz = cloud.as_array()
    d = _plane_depths(xyz[:, 2] if depths is None else depths)
    plane_of = []
    for dz in xyz[:, 2]:
        hits = np.flatnonzero(np.isclose(d, dz, rtol=_DEPTH_RTOL, atol=1e-15))
        if hits.size == 0:
            raise ValueError(f"target depth {dz:.4e} is not one of the volume planes")
        plane_of.append(int(hits[0]))
    used = sorted(set(plane_of))
    remap = {k: i for i, k in enumerate(used)}

    n = PAD_FACTOR * s * cfg.pixel_count
    window = crop_window(cfg, s) if crop else slice(0, n)
    size = window.stop - window.start
    center = n // 2 - window.start
    pitch = output_pitch(cfg)
    idx = np.arange(size, dtype=float)
    x, y = (idx - center) * pitch, (center - idx) * pitch
    diameter = spot_lateral(cfg, patch_side)

    grids = np.zeros((len(used), size, size))
    for t, ((dx, dy, _), k) in enumerate(zip(xyz, plane_of)):
        disk = disk_mask(x, y, dx, dy, diameter)
        plane = grids[remap[k]]
        if np.any(plane[disk] > 0):
            raise CapacityError(f"disk of target {t} overlaps another target on plane dz={d[k]:.4e}")
        if not disk.any():
            raise MetricError(f"disk of target {t} has no samples inside the rendered window")
        plane[disk] = 1.0
    return IntensityVolume(d[used], grids, pitch, s, center)
