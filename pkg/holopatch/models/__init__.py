"""Typed configuration and input models shared across holopatch."""

from __future__ import annotations

import math
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from holopatch.core.settings import optics_defaults

_DEFAULTS = optics_defaults()


class OpticalConfig(BaseModel):
    """2f system: wavelength, lens focal length, SLM pitch and (square) pixel count, SI units."""

    model_config = ConfigDict(frozen=True)

    wavelength: float = Field(default=_DEFAULTS.get("wavelength", 532e-9), gt=0)
    focal_length: float = Field(default=_DEFAULTS.get("focal_length", 0.1), gt=0)
    pitch: float = Field(default=_DEFAULTS.get("pitch", 12.5e-6), gt=0)
    pixel_count: int = Field(default=_DEFAULTS.get("pixel_count", 128), ge=2)

    @field_validator("pixel_count")
    @classmethod
    def _even(cls, v: int) -> int:
        if v % 2:
            raise ValueError("pixel_count must be even")
        return v

    @model_validator(mode="after")
    def _small_angle(self) -> "OpticalConfig":
        if not self.wavelength < 2 * self.pitch:
            raise ValueError("wavelength must be smaller than twice the pixel pitch")
        return self

    def with_pixel_count(self, pixel_count: int) -> "OpticalConfig":
        return OpticalConfig(
            wavelength=self.wavelength,
            focal_length=self.focal_length,
            pitch=self.pitch,
            pixel_count=pixel_count,
        )


class TargetPoint(BaseModel):
    """Target offset (dx, dy) from the optical axis and depth dz from the rear focal plane, meters."""

    model_config = ConfigDict(frozen=True)

    dx: float
    dy: float
    dz: float

    @field_validator("dx", "dy", "dz")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("target coordinates must be finite")
        return v

    def __neg__(self) -> "TargetPoint":
        return TargetPoint(dx=-self.dx, dy=-self.dy, dz=-self.dz)

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.dx, self.dy, self.dz)


class PointCloud(BaseModel):
    model_config = ConfigDict(frozen=True)

    points: List[TargetPoint] = Field(min_length=1)
    seed: Optional[int] = None

    def __len__(self) -> int:
        return len(self.points)

    def as_array(self) -> np.ndarray:
        """(T, 3) array of [dx, dy, dz]."""
        return np.array([p.as_tuple() for p in self.points], dtype=float)

    def subset(self, indices) -> "PointCloud":
        return PointCloud(points=[self.points[i] for i in indices], seed=self.seed)

    @classmethod
    def from_array(cls, xyz, seed: Optional[int] = None) -> "PointCloud":
        arr = np.asarray(xyz, dtype=float).reshape(-1, 3)
        return cls(points=[TargetPoint(dx=a, dy=b, dz=c) for a, b, c in arr], seed=seed)


class GsConfig(BaseModel):
    """Gerchberg-Saxton settings; sampling = computational pixels per SLM pixel per axis."""

    model_config = ConfigDict(frozen=True)

    sampling: int = Field(default=1, ge=1)
    iterations: int = Field(default=50, ge=1)
    pad_factor: Literal[1] = 1
    bits: int = Field(default=8, ge=1, le=16)
    seed: int = 0


ALGORITHMS = ("np", "gsx1", "gsx3", "gsx1-dec", "gsx3-dec")


class RunSettings(BaseModel):
    """Every CLI flag, so that a config file can mirror the command line."""

    model_config = ConfigDict(populate_by_name=True)

    wavelength: float = Field(default=_DEFAULTS.get("wavelength", 532e-9), alias="lambda")
    focal: float = _DEFAULTS.get("focal_length", 0.1)
    pitch: float = _DEFAULTS.get("pitch", 12.5e-6)
    F: int = _DEFAULTS.get("pixel_count", 128)
    T: int = Field(default=1, ge=1)
    N: int = Field(default=1, ge=1)
    algo: str = "np"
    seed: int = 0
    iters: int = Field(default=50, ge=1)
    sampling: Optional[int] = Field(default=None, ge=1)
    bits: int = Field(default=8, ge=1, le=16)
    lateral_ratio: float = Field(default=0.9, gt=0, le=1)
    axial_ratio: float = Field(default=0.75, gt=0, le=1)
    eval_sampling: int = Field(default=5, ge=1)
    out: Optional[str] = None

    @field_validator("algo")
    @classmethod
    def _known_algo(cls, v: str) -> str:
        v = v.lower()
        if v not in ALGORITHMS:
            raise ValueError(f"unknown algorithm '{v}' (choose from {', '.join(ALGORITHMS)})")
        return v

    @model_validator(mode="after")
    def _frames(self) -> "RunSettings":
        if self.N > self.T:
            raise ValueError("frame count N must not exceed target count T")
        return self

    def optical_config(self) -> OpticalConfig:
        return OpticalConfig(
            wavelength=self.wavelength,
            focal_length=self.focal,
            pitch=self.pitch,
            pixel_count=self.F,
        )

    def gs_config(self, sampling: int) -> GsConfig:
        return GsConfig(sampling=self.sampling or sampling, iterations=self.iters, bits=self.bits, seed=self.seed)


class CloudFile(BaseModel):
    """On-disk point cloud: config, format parameters, ratios, seed and points in meters."""

    config: OpticalConfig
    F: int
    T: int
    N: int = 1
    ratios: Tuple[float, float] = (0.9, 0.75)
    seed: Optional[int] = None
    points: List[Tuple[float, float, float]]

    @model_validator(mode="after")
    def _consistent(self) -> "CloudFile":
        if len(self.points) != self.T:
            raise ValueError(f"cloud file lists {len(self.points)} points but T={self.T}")
        if self.F != self.config.pixel_count:
            raise ValueError("F does not match config.pixel_count")
        return self

    def cloud(self) -> PointCloud:
        return PointCloud.from_array(self.points, seed=self.seed)


__all__ = [
    "ALGORITHMS",
    "CloudFile",
    "GsConfig",
    "OpticalConfig",
    "PointCloud",
    "RunSettings",
    "TargetPoint",
]
