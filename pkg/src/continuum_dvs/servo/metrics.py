"""Photometric convergence metrics.

Images are normalised to zero mean and unit standard deviation over all pixels
and channels before comparison, so a global affine intensity change leaves the
sum of absolute differences unchanged.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from continuum_dvs.core.exceptions import ValidationError
from continuum_dvs.scene import ImageBuffer

# Standard deviations at or below this are treated as a constant image
_MIN_STD = 1e-12


def normalize_for_sad(img: NDArray[np.floating]) -> NDArray[np.float64]:
    """Zero-mean, unit-std copy of an image.

    Raises:
        ValidationError: If the image is constant.
    """
    values = np.asarray(img, dtype=np.float64)
    std = float(values.std())
    if not np.isfinite(std) or std <= _MIN_STD:
        raise ValidationError(
            "Cannot normalise a constant image", field="image", details={"std": std}
        )
    return (values - values.mean()) / std


def sad(image_star: NDArray[np.floating], target_star: NDArray[np.floating]) -> float:
    """Sum of absolute differences between two normalised images.

    Raises:
        ValidationError: If the dimensions differ.
    """
    a = np.asarray(image_star, dtype=np.float64)
    b = np.asarray(target_star, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError(
            "Images for SAD must have equal dimensions",
            field="image",
            details={"image": str(a.shape), "target": str(b.shape)},
        )
    return float(np.abs(a - b).sum())


def difference_image(
    image_star: NDArray[np.floating], target_star: NDArray[np.floating]
) -> ImageBuffer:
    """``|I* - I0*|`` rescaled by its maximum into [0, 1] for viewing."""
    diff = np.abs(np.asarray(image_star, dtype=np.float64) - np.asarray(target_star, dtype=np.float64))
    peak = float(diff.max()) if diff.size else 0.0
    if peak <= 0.0:
        return np.zeros_like(diff)
    return diff / peak
