from .core import (
    TWO_PI,
    PatchFormat,
    PhaseMask,
    QuantizedMask,
    checkerboard,
    dequantize,
    fov_axial,
    fov_axial_approx,
    fov_lateral,
    patch_format,
    pixel_axes,
    quantize,
    spot_axial,
    spot_lateral,
    steering_phase,
    wrap,
)
from .efficiency import corner_case_efficiency, patch_mean_efficiency, regional_efficiency

__all__ = [
    "TWO_PI",
    "PatchFormat",
    "PhaseMask",
    "QuantizedMask",
    "checkerboard",
    "corner_case_efficiency",
    "dequantize",
    "fov_axial",
    "fov_axial_approx",
    "fov_lateral",
    "patch_format",
    "patch_mean_efficiency",
    "pixel_axes",
    "quantize",
    "regional_efficiency",
    "spot_axial",
    "spot_lateral",
    "steering_phase",
    "wrap",
]
