import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from holopatch.models import OpticalConfig, PointCloud, TargetPoint  # noqa: E402
from holopatch.simulation.wave import output_pitch  # noqa: E402


@pytest.fixture
def cfg():
    """Default 2f system at F = 128."""
    return OpticalConfig()


@pytest.fixture
def cfg64():
    return OpticalConfig(pixel_count=64)


@pytest.fixture
def cfg16():
    return OpticalConfig(pixel_count=16)


def on_grid(cfg: OpticalConfig, mx: int, my: int, dz: float = 0.0) -> TargetPoint:
    """Target sitting exactly on rendered sample (mx, my) from the optical axis."""
    pitch = output_pitch(cfg)
    return TargetPoint(dx=mx * pitch, dy=my * pitch, dz=dz)


def cloud_of(*targets: TargetPoint) -> PointCloud:
    return PointCloud(points=list(targets))
