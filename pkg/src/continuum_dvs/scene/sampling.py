"""Bilinear sampling and resizing of RGB rasters.

Images are ``(H, W, 3)`` float arrays. Texel ``(row, col)`` has its centre at
continuous coordinate ``(v, u) = (row, col)``; samples between centres blend the
four neighbours, and coordinates past the last centre clamp to the edge texel.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from continuum_dvs.core.exceptions import ValidationError

ImageBuffer = NDArray[np.float64]
"""RGB raster ``(height, width, 3)`` with values in [0, 1]."""


def as_image(values: NDArray[np.floating], *, field: str = "image") -> ImageBuffer:
    """Validate and convert an array to an :data:`ImageBuffer`.

    Args:
        values (NDArray[np.floating]): Candidate image.
        field (str): Argument name reported on failure.

    Returns:
        ImageBuffer: float64 copy clamped to [0, 1].

    Raises:
        ValidationError: If the array is not ``(H, W, 3)`` with finite values.
    """
    array = np.asarray(values, dtype=np.float64)
    if array.ndim != 3 or array.shape[2] != 3 or array.shape[0] < 1 or array.shape[1] < 1:
        raise ValidationError(
            "Image must have shape (height, width, 3)", field=field, value=array.shape
        )
    if not np.all(np.isfinite(array)):
        raise ValidationError("Image contains non-finite values", field=field)
    return np.clip(array, 0.0, 1.0)


def bilinear_sample(
    image: NDArray[np.floating],
    u: NDArray[np.float64],
    v: NDArray[np.float64],
) -> NDArray[np.float64]:
    """Sample ``image`` at continuous texel coordinates.

    Args:
        image (NDArray[np.floating]): Source raster ``(H, W, C)``.
        u (NDArray[np.float64]): Column coordinates, any shape.
        v (NDArray[np.float64]): Row coordinates, same shape as ``u``.

    Returns:
        NDArray[np.float64]: Samples of shape ``u.shape + (C,)``.
    """
    height, width = image.shape[:2]
    u = np.clip(u, 0.0, width - 1.0)
    v = np.clip(v, 0.0, height - 1.0)
    u0 = np.minimum(np.floor(u).astype(np.intp), max(width - 2, 0))
    v0 = np.minimum(np.floor(v).astype(np.intp), max(height - 2, 0))
    u1 = np.minimum(u0 + 1, width - 1)
    v1 = np.minimum(v0 + 1, height - 1)
    du = (u - u0)[..., None]
    dv = (v - v0)[..., None]
    source = np.asarray(image, dtype=np.float64)
    top = source[v0, u0] * (1.0 - du) + source[v0, u1] * du
    bottom = source[v1, u0] * (1.0 - du) + source[v1, u1] * du
    return top * (1.0 - dv) + bottom * dv


def resize_bilinear(image: NDArray[np.floating], height: int, width: int) -> ImageBuffer:
    """Resize with half-pixel-centre bilinear interpolation.

    Output pixel ``j`` maps to source column ``(j + 0.5) * W_in / W_out - 0.5``.
    An exact 2x downscale therefore averages each 2x2 block.

    Args:
        image (NDArray[np.floating]): Source raster ``(H, W, 3)``.
        height (int): Output height in pixels.
        width (int): Output width in pixels.

    Returns:
        ImageBuffer: Resized raster.
    """
    source = np.asarray(image, dtype=np.float64)
    in_height, in_width = source.shape[:2]
    if (in_height, in_width) == (height, width):
        return source.copy()
    cols = (np.arange(width, dtype=np.float64) + 0.5) * (in_width / width) - 0.5
    rows = (np.arange(height, dtype=np.float64) + 0.5) * (in_height / height) - 0.5
    u, v = np.meshgrid(cols, rows)
    return bilinear_sample(source, u, v)
