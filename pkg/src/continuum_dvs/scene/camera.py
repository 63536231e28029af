"""Pinhole camera intrinsics for the tip-mounted camera."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field


class CameraIntrinsics(BaseModel):
    """Ideal pinhole camera with square pixels and a centred principal point.

    The field of view is horizontal. Image x runs along the camera's local +x
    axis, image y (rows, downward) along local +y, and the optical axis is +z.

    Attributes:
        width_px (int): Image width in pixels.
        height_px (int): Image height in pixels.
        horizontal_fov (float): Horizontal field of view in degrees.
    """

    model_config = ConfigDict(frozen=True)

    width_px: int = Field(default=640, ge=1)
    height_px: int = Field(default=480, ge=1)
    horizontal_fov: float = Field(default=19.0, gt=0, lt=180)

    @property
    def focal_px(self) -> float:
        """Focal length in pixels, ``(width / 2) / tan(fov / 2)``."""
        return (self.width_px / 2.0) / math.tan(math.radians(self.horizontal_fov) / 2.0)

    def footprint_width(self, distance: float) -> float:
        """Width of the fronto-parallel patch seen at ``distance`` metres."""
        return 2.0 * distance * math.tan(math.radians(self.horizontal_fov) / 2.0)

    def footprint_height(self, distance: float) -> float:
        """Height of the fronto-parallel patch seen at ``distance`` metres."""
        return self.footprint_width(distance) * self.height_px / self.width_px

    def ray_directions(self) -> NDArray[np.float64]:
        """Camera-frame ray through every pixel centre, ``(H, W, 3)`` with z = 1."""
        return _pixel_rays(self.width_px, self.height_px, self.focal_px)


@lru_cache(maxsize=8)
def _pixel_rays(width: int, height: int, focal: float) -> NDArray[np.float64]:
    cols = (np.arange(width) + 0.5 - width / 2.0) / focal
    rows = (np.arange(height) + 0.5 - height / 2.0) / focal
    x, y = np.meshgrid(cols, rows)
    rays = np.stack([x, y, np.ones_like(x)], axis=-1)
    rays.setflags(write=False)
    return rays
