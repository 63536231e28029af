"""Lighting and occlusion perturbations of rendered views.

Lighting is a global gain plus a horizontal linear gradient, a low-order stand-in
for moving a light source over a diffuse plane. Occlusions are black axis-aligned
rectangles of random position and size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from continuum_dvs.scene.sampling import ImageBuffer

# Occluder aspect ratios are drawn log-uniformly from [1/_MAX_ASPECT, _MAX_ASPECT]
_MAX_ASPECT = 2.0


class OcclusionRect(NamedTuple):
    """Half-open pixel box ``[x0, x1) x [y0, y1)``."""

    x0: int
    y0: int
    x1: int
    y1: int

    def clipped(self, width: int, height: int) -> OcclusionRect:
        """Clip to an image of the given size (may become empty)."""
        x0 = min(max(self.x0, 0), width)
        y0 = min(max(self.y0, 0), height)
        return OcclusionRect(x0, y0, min(max(self.x1, x0), width), min(max(self.y1, y0), height))

    @property
    def area(self) -> int:
        """Pixel count covered (0 for empty rectangles)."""
        return max(self.x1 - self.x0, 0) * max(self.y1 - self.y0, 0)

    def to_text(self) -> str:
        """``x0:y0:x1:y1`` form used in manifests and traces."""
        return f"{self.x0}:{self.y0}:{self.x1}:{self.y1}"

    @classmethod
    def from_text(cls, text: str) -> OcclusionRect:
        """Parse the ``x0:y0:x1:y1`` form."""
        x0, y0, x1, y1 = (int(part) for part in text.split(":"))
        return cls(x0, y0, x1, y1)


def _check_range(name: str, bounds: tuple[float, float]) -> None:
    if bounds[0] > bounds[1]:
        msg = f"{name} must satisfy min <= max, got {bounds}"
        raise ValueError(msg)


class AugmentationConfig(BaseModel):
    """Ranges for randomly sampled lighting and occlusion.

    Attributes:
        lighting_gain_range (tuple[float, float]): Global gain bounds.
        lighting_gradient_range (tuple[float, float]): Gradient bounds, per image width.
        occlusion_count_range (tuple[int, int]): Number of rectangles, inclusive.
        occlusion_area_fraction_range (tuple[float, float]): Per-rectangle area
            as a fraction of the image.
    """

    model_config = ConfigDict(frozen=True)

    lighting_gain_range: tuple[float, float] = (0.6, 1.4)
    lighting_gradient_range: tuple[float, float] = (-0.4, 0.4)
    occlusion_count_range: tuple[int, int] = (0, 2)
    occlusion_area_fraction_range: tuple[float, float] = (0.02, 0.3)

    @model_validator(mode="after")
    def _check_ranges(self) -> AugmentationConfig:
        _check_range("lighting_gain_range", self.lighting_gain_range)
        _check_range("lighting_gradient_range", self.lighting_gradient_range)
        _check_range("occlusion_count_range", self.occlusion_count_range)
        _check_range("occlusion_area_fraction_range", self.occlusion_area_fraction_range)
        if self.lighting_gain_range[0] <= 0:
            msg = "lighting gain must be positive"
            raise ValueError(msg)
        if self.occlusion_count_range[0] < 0:
            msg = "occlusion count must be non-negative"
            raise ValueError(msg)
        low, high = self.occlusion_area_fraction_range
        if low < 0 or high > 1:
            msg = "occlusion area fractions must lie in [0, 1]"
            raise ValueError(msg)
        return self

    @classmethod
    def identity(cls) -> AugmentationConfig:
        """Configuration whose every sample leaves images unchanged."""
        return cls(
            lighting_gain_range=(1.0, 1.0),
            lighting_gradient_range=(0.0, 0.0),
            occlusion_count_range=(0, 0),
        )


@dataclass(frozen=True)
class Augmentation:
    """One sampled perturbation.

    Attributes:
        gain (float): Global lighting gain.
        gradient (float): Horizontal lighting gradient.
        rects (tuple[OcclusionRect, ...]): Black rectangles.
    """

    gain: float = 1.0
    gradient: float = 0.0
    rects: tuple[OcclusionRect, ...] = field(default_factory=tuple)

    def apply(self, img: ImageBuffer) -> ImageBuffer:
        """Apply lighting, then occlusion."""
        return apply_occlusion(apply_lighting(img, self.gain, self.gradient), self.rects)

    def rects_text(self) -> str:
        """Rectangles joined by ``;`` (empty string when none)."""
        return ";".join(rect.to_text() for rect in self.rects)


def apply_lighting(img: ImageBuffer, gain: float, gradient: float) -> ImageBuffer:
    """Scale intensities by ``gain + gradient * (x / width - 0.5)`` and clamp.

    Args:
        img (ImageBuffer): Input raster.
        gain (float): Global gain, positive.
        gradient (float): Horizontal gradient across the image width.

    Returns:
        ImageBuffer: Relit raster in [0, 1].
    """
    width = img.shape[1]
    column = np.arange(width, dtype=np.float64) / width - 0.5
    factor = gain + gradient * column
    return np.clip(img * factor[None, :, None], 0.0, 1.0)


def apply_occlusion(img: ImageBuffer, rectangles: tuple[OcclusionRect, ...] | list[OcclusionRect]) -> ImageBuffer:
    """Black out every rectangle.

    Args:
        img (ImageBuffer): Input raster.
        rectangles (tuple[OcclusionRect, ...] | list[OcclusionRect]): Boxes in
            pixel coordinates; clipped to the image.

    Returns:
        ImageBuffer: Copy with covered pixels set to 0.
    """
    out = np.array(img, dtype=np.float64, copy=True)
    height, width = out.shape[:2]
    for rect in rectangles:
        box = OcclusionRect(*rect).clipped(width, height)
        out[box.y0 : box.y1, box.x0 : box.x1, :] = 0.0
    return out


def _sample_rect(
    rng: np.random.Generator, fraction: float, width: int, height: int
) -> OcclusionRect:
    aspect = math.exp(rng.uniform(-math.log(_MAX_ASPECT), math.log(_MAX_ASPECT)))
    area = fraction * width * height
    rect_width = min(max(round(math.sqrt(area * aspect)), 1), width)
    rect_height = min(max(round(area / rect_width), 1), height)
    x0 = int(rng.integers(0, width - rect_width + 1))
    y0 = int(rng.integers(0, height - rect_height + 1))
    return OcclusionRect(x0, y0, x0 + rect_width, y0 + rect_height)


def sample_augmentation(
    cfg: AugmentationConfig,
    rng: np.random.Generator,
    *,
    width: int,
    height: int,
) -> Augmentation:
    """Draw one perturbation within the configured ranges.

    The number of draws from ``rng`` depends only on the sampled values, so equal
    generator states always give equal samples.

    Args:
        cfg (AugmentationConfig): Sampling ranges.
        rng (np.random.Generator): Random stream, advanced in place.
        width (int): Image width the rectangles refer to.
        height (int): Image height the rectangles refer to.

    Returns:
        Augmentation: Gain, gradient and rectangles.
    """
    gain = float(rng.uniform(*cfg.lighting_gain_range))
    gradient = float(rng.uniform(*cfg.lighting_gradient_range))
    low, high = cfg.occlusion_count_range
    count = int(rng.integers(low, high + 1))
    rects: list[OcclusionRect] = []
    for _ in range(count):
        fraction = float(rng.uniform(*cfg.occlusion_area_fraction_range))
        if fraction > 0.0:
            rects.append(_sample_rect(rng, fraction, width, height))
    return Augmentation(gain=gain, gradient=gradient, rects=tuple(rects))
