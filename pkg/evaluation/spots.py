"""
Spot identification and quantification on rendered volumes.

Local maxima of G are matched to targets by a linear sum assignment on
FWHM-normalized distance. A target counts as identified when its matched
peak lies within 3 expected FWHMs of it along every axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.ndimage import maximum_filter

from holopatch.algorithms.assignment import solve_lsa
from holopatch.models import OpticalConfig, PointCloud
from holopatch.optics.core import spot_axial, spot_lateral
from holopatch.simulation.wave import IntensityVolume, disk_mask

PEAK_FLOOR = 0.01
LATERAL_FWHM_FACTOR = 1.02
AXIAL_FWHM_FACTOR = 0.9
IDENTIFY_FWHMS = 3.0


@dataclass
class SpotResult:
    target_index: int
    identified: bool
    peak: Optional[Tuple[float, float, float]] = None
    error: Optional[Tuple[float, float, float]] = None
    fwhm_x: float = math.nan
    fwhm_y: float = math.nan
    fwhm_z: float = math.nan
    irradiance: float = math.nan

    @property
    def lateral_error(self) -> float:
        if self.error is None:
            return math.nan
        return math.hypot(self.error[0], self.error[1])

    def to_dict(self) -> dict:
        def clean(v):
            return None if isinstance(v, float) and math.isnan(v) else v

        return {
            "target": self.target_index,
            "identified": self.identified,
            "peak": list(self.peak) if self.peak else None,
            "error": list(self.error) if self.error else None,
            "lateral_error": clean(self.lateral_error),
            "fwhm_x": clean(self.fwhm_x),
            "fwhm_y": clean(self.fwhm_y),
            "fwhm_z": clean(self.fwhm_z),
            "irradiance": clean(self.irradiance),
        }


@dataclass
class SpotReport:
    results: List[SpotResult] = field(default_factory=list)
    peak_count: int = 0
    expected_fwhm: Tuple[float, float] = (math.nan, math.nan)

    @property
    def identified_fraction(self) -> float:
        if not self.results:
            return 0.0
        return sum(r.identified for r in self.results) / len(self.results)

    @property
    def mean_position_error(self) -> float:
        """Mean lateral error of identified targets, meters (nan if none)."""
        errors = [r.lateral_error for r in self.results if r.identified]
        return float(np.mean(errors)) if errors else math.nan

    def within(self, distance: float) -> float:
        """Fraction of targets whose matched peak lies within `distance` laterally."""
        if not self.results:
            return 0.0
        return sum(r.error is not None and r.lateral_error <= distance for r in self.results) / len(self.results)

    def to_dict(self) -> dict:
        return {
            "peak_count": self.peak_count,
            "expected_fwhm_xy": self.expected_fwhm[0],
            "expected_fwhm_z": self.expected_fwhm[1],
            "identified_fraction": self.identified_fraction,
            "targets": [r.to_dict() for r in self.results],
        }


def find_peaks(G: IntensityVolume, floor: float = PEAK_FLOOR) -> np.ndarray:
    """(plane, row, col) indices of local maxima over 3x3 samples and adjacent planes."""
    data = G.grids
    top = data.max()
    if top <= 0:
        return np.zeros((0, 3), dtype=int)
    local = maximum_filter(data, size=(3, 3, 3), mode="nearest")
    return np.argwhere((data == local) & (data > floor * top))


def half_max_width(profile: np.ndarray, coords: np.ndarray, index: int) -> float:
    """Full width at half maximum around profile[index], crossings linearly interpolated.

    nan when the profile does not drop below half maximum on both sides.
    """
    half = profile[index] / 2.0
    left = index
    while left > 0 and profile[left] >= half:
        left -= 1
    right = index
    while right < profile.size - 1 and profile[right] >= half:
        right += 1
    if profile[left] >= half or profile[right] >= half:
        return math.nan
    # crossings between (left, left+1) and (right-1, right)
    x_left = np.interp(half, [profile[left], profile[left + 1]], [coords[left], coords[left + 1]])
    x_right = np.interp(half, [profile[right], profile[right - 1]], [coords[right], coords[right - 1]])
    return float(abs(x_right - x_left))


def analyze_spots(
    G: IntensityVolume,
    cloud: PointCloud,
    patch_side: int,
    cfg: OpticalConfig,
) -> SpotReport:
    fwhm_xy = LATERAL_FWHM_FACTOR * spot_lateral(cfg, patch_side)
    fwhm_z = AXIAL_FWHM_FACTOR * spot_axial(cfg, patch_side)
    xs, ys = G.axes()
    xyz = cloud.as_array()
    peaks = find_peaks(G)
    peak_xyz = (
        np.column_stack([xs[peaks[:, 2]], ys[peaks[:, 1]], G.depths[peaks[:, 0]]])
        if len(peaks)
        else np.zeros((0, 3))
    )

    match: dict = {}
    if len(peaks):
        scaled_t = xyz / np.array([fwhm_xy, fwhm_xy, fwhm_z])
        scaled_p = peak_xyz / np.array([fwhm_xy, fwhm_xy, fwhm_z])
        cost = np.linalg.norm(scaled_t[:, None, :] - scaled_p[None, :, :], axis=-1)
        if len(peaks) >= len(xyz):
            rows, cols = solve_lsa(cost)
            match = dict(zip(rows.tolist(), cols.tolist()))
        else:
            rows, cols = solve_lsa(cost.T)
            match = dict(zip(cols.tolist(), rows.tolist()))

    results = []
    for t, (dx, dy, dz) in enumerate(xyz):
        result = SpotResult(target_index=t, identified=False)
        try:
            k_target = G.plane_index(dz)
        except KeyError:
            k_target = None
        if k_target is not None:
            disk = disk_mask(xs, ys, dx, dy, spot_lateral(cfg, patch_side))
            if disk.any():
                result.irradiance = float(G.grids[k_target][disk].mean())
        if t in match:
            k, r, c = peaks[match[t]]
            px, py, pz = peak_xyz[match[t]]
            err = (float(px - dx), float(py - dy), float(pz - dz))
            result.peak = (float(px), float(py), float(pz))
            result.error = err
            result.identified = (
                abs(err[0]) <= IDENTIFY_FWHMS * fwhm_xy
                and abs(err[1]) <= IDENTIFY_FWHMS * fwhm_xy
                and abs(err[2]) <= IDENTIFY_FWHMS * fwhm_z
            )
            result.fwhm_x = half_max_width(G.grids[k, r, :], xs, c)
            result.fwhm_y = half_max_width(G.grids[k, :, c], ys, r)
            result.fwhm_z = half_max_width(G.grids[:, r, c], G.depths, k)
        results.append(result)
    return SpotReport(results=results, peak_count=len(peaks), expected_fwhm=(fwhm_xy, fwhm_z))
