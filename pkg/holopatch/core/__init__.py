from .errors import (
    ArtifactError,
    AssignmentError,
    CapacityError,
    ConfigError,
    HolopatchError,
    MetricError,
    PatchFormatError,
    VolumeBoundsError,
)
from .log import configure_logging, get_logger

__all__ = [
    "ArtifactError",
    "AssignmentError",
    "CapacityError",
    "ConfigError",
    "HolopatchError",
    "MetricError",
    "PatchFormatError",
    "VolumeBoundsError",
    "configure_logging",
    "get_logger",
]
