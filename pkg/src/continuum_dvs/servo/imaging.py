"""Camera image to network input conversion.

Dataset generation and the servo loop both go through :func:`preprocess`, so the
network sees identically prepared images in training and in closed loop.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from continuum_dvs.scene import ImageBuffer, as_image, resize_bilinear


def preprocess(img: ImageBuffer, input_size: tuple[int, int]) -> NDArray[np.float64]:
    """Resize an image to the network input and add the batch axis.

    Args:
        img (ImageBuffer): Camera raster.
        input_size (tuple[int, int]): Network ``(height, width)``.

    Returns:
        NDArray[np.float64]: ``(1, height, width, 3)`` tensor in [0, 1].
    """
    height, width = input_size
    resized = resize_bilinear(as_image(img), height, width)
    return np.clip(resized, 0.0, 1.0)[None, ...]
