import math

import numpy as np
import pytest

from holopatch.core.errors import MetricError

from evaluation.metrics import accuracy, contrast, efficiency, efficiency_from_contrast, fill_fraction, score_volume

I = np.array([1.0, 0.0, 0.0, 0.0])
G = np.array([8.0, 1.0, 1.0, 2.0])


def test_contrast():
    assert contrast(G, I) == pytest.approx(6.0)


def test_efficiency():
    assert efficiency(G, I) == pytest.approx(2 / 3)


def test_accuracy():
    assert accuracy([1.0, 1.0], [1.0, 0.0]) == pytest.approx(1 / math.sqrt(2))
    assert accuracy(I, I) == pytest.approx(1.0)


def test_perfect_rendering_has_infinite_contrast():
    target = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert contrast(target, target) == math.inf
    assert efficiency(target, target) == 1.0


def test_errors():
    with pytest.raises(MetricError):
        contrast(G, np.zeros(4))
    with pytest.raises(MetricError):
        contrast(G, I[:3])
    with pytest.raises(MetricError):
        accuracy(np.zeros(4), I)
    with pytest.raises(MetricError):
        efficiency(np.zeros(4), I)


def test_sparse_efficiency_estimate():
    # contrast 6 with one target sample against three background samples
    assert efficiency_from_contrast(6.0, I) == pytest.approx(2.0)
    assert fill_fraction(I) == 0.25


def test_score_volume():
    scores = score_volume(G, I)
    assert scores.to_dict() == pytest.approx(
        {"contrast": 6.0, "accuracy": 8 / math.sqrt(70), "efficiency": 2 / 3, "fill_fraction": 0.25}
    )
