"""PNG input/output for textures, dataset frames and servo views."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from continuum_dvs.core.exceptions import ResourceNotFoundError, ValidationError
from continuum_dvs.scene.sampling import ImageBuffer, as_image


def read_png(path: Path | str) -> ImageBuffer:
    """Read an 8-bit image as RGB in [0, 1].

    Args:
        path (Path | str): Image file.

    Returns:
        ImageBuffer: ``(H, W, 3)`` float64 raster.

    Raises:
        ResourceNotFoundError: If the file does not exist.
        ValidationError: If the file is not a readable image.
    """
    image_path = Path(path)
    if not image_path.is_file():
        raise ResourceNotFoundError(
            "Image file not found", resource_type="image", path=str(image_path)
        )
    try:
        with Image.open(image_path) as handle:
            pixels = np.asarray(handle.convert("RGB"), dtype=np.float64)
    except (UnidentifiedImageError, OSError) as exc:
        raise ValidationError(
            "Unreadable image file", field="path", value=str(image_path)
        ) from exc
    return pixels / 255.0


def to_uint8(img: ImageBuffer) -> np.ndarray:
    """Quantise a [0, 1] raster to 8-bit with round-half-to-even."""
    return np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)


def write_png(path: Path | str, img: ImageBuffer) -> Path:
    """Write a raster as an 8-bit RGB PNG.

    Args:
        path (Path | str): Destination file.
        img (ImageBuffer): Raster in [0, 1].

    Returns:
        Path: The written path.
    """
    image_path = Path(path)
    Image.fromarray(to_uint8(as_image(img))).save(image_path, format="PNG")
    return image_path
