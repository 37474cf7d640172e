from .cloud import depth_planes, generate_cloud
from .wave import (
    IntensityVolume,
    build_target_volume,
    field_from_mask,
    output_pitch,
    propagate_field,
    propagate_to_plane,
    render_volume,
)

__all__ = [
    "IntensityVolume",
    "build_target_volume",
    "depth_planes",
    "field_from_mask",
    "generate_cloud",
    "output_pitch",
    "propagate_field",
    "propagate_to_plane",
    "render_volume",
]
