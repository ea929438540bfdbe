"""Convolutional sparse coding (CISTA) and CRNet super-resolution.

Arrays are float64 with layout (n, c, h, w).
"""

from ._crnet import (
    Checkpoint,
    ChecksumError,
    ConfigError,
    IoError,
    ShapeError,
    bicubic_resize,
    conv2d_adjoint,
    conv2d_same,
    crneta_parameter_count,
    csc_objective,
    csc_solve,
    grad_check_tiny,
    pixel_shuffle,
    psnr_y,
    read_image,
    rgb_to_y,
    ssim_y,
    write_image,
)

__all__ = [
    "Checkpoint",
    "ChecksumError",
    "ConfigError",
    "IoError",
    "ShapeError",
    "bicubic_resize",
    "conv2d_adjoint",
    "conv2d_same",
    "crneta_parameter_count",
    "csc_objective",
    "csc_solve",
    "grad_check_tiny",
    "pixel_shuffle",
    "psnr_y",
    "read_image",
    "rgb_to_y",
    "ssim_y",
    "write_image",
]
