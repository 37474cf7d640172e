"""
Volume Quality Metrics
======================

Contrast, accuracy and efficiency of a rendered intensity volume G against
a binary target volume I.

Usage:
    from evaluation.metrics import score_volume
    scores = score_volume(rendered.grids, target.grids)
    print(scores.contrast, scores.efficiency)
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from holopatch.core.errors import MetricError


def _pair(G, I):
    G = np.asarray(G, dtype=float)
    I = np.asarray(I, dtype=float)
    if G.shape != I.shape:
        raise MetricError(f"G and I shapes differ: {G.shape} vs {I.shape}")
    return G, I


def _dot(a: np.ndarray, b: np.ndarray) -> float:
    # full-extent volumes run to hundreds of MB; vdot avoids a product temporary
    return float(np.vdot(a.ravel(), b.ravel()))


def contrast(G, I) -> float:
    """Mean target irradiance over mean non-target irradiance; +inf when the background is dark."""
    G, I = _pair(G, I)
    n_target = float(I.sum())
    if n_target == 0:
        raise MetricError("target volume is empty")
    n_background = I.size - n_target
    on_target = _dot(G, I)
    background = float(G.sum()) - on_target
    if n_background <= 0 or background <= 0:
        return math.inf
    return float((on_target / n_target) / (background / n_background))


def accuracy(G, I) -> float:
    """Normalized cross-correlation of G and I."""
    G, I = _pair(G, I)
    norm = math.sqrt(_dot(G, G) * _dot(I, I))
    if norm == 0:
        raise MetricError("accuracy undefined for an all-zero volume")
    return _dot(G, I) / norm


def efficiency(G, I) -> float:
    """Fraction of the rendered power that lands in the target regions."""
    G, I = _pair(G, I)
    total = float(G.sum())
    if total == 0:
        raise MetricError("efficiency undefined for an all-zero volume")
    return _dot(G, I) / total


def efficiency_from_contrast(c: float, I) -> float:
    """Sparse-volume estimate of efficiency: contrast scaled by target-to-background area."""
    I = np.asarray(I, dtype=float)
    n_background = I.size - float(I.sum())
    if n_background <= 0:
        raise MetricError("no background samples")
    return float(c * I.sum() / n_background)


def fill_fraction(I) -> float:
    I = np.asarray(I, dtype=float)
    return float(I.sum() / I.size)


@dataclass
class VolumeScores:
    contrast: float
    accuracy: float
    efficiency: float
    fill_fraction: float

    def to_dict(self) -> dict:
        return asdict(self)


def score_volume(G, I) -> VolumeScores:
    return VolumeScores(
        contrast=contrast(G, I),
        accuracy=accuracy(G, I),
        efficiency=efficiency(G, I),
        fill_fraction=fill_fraction(I),
    )
