"""Procedural target texture.

Used whenever no target photograph is configured: a smooth colour field built
from a few octaves of bicubically upsampled noise, so that every view of the
plane contains structure at the scales the servo loop has to resolve.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

from continuum_dvs.scene.sampling import ImageBuffer
from continuum_dvs.utils.seeding import TAG_TEXTURE, derive_rng

# (grid cells across the texture, relative amplitude)
_OCTAVES: tuple[tuple[int, float], ...] = ((8, 1.0), (16, 0.6), (48, 0.25))


def _upsampled_noise(rng: np.random.Generator, cells: int, width: int, height: int) -> np.ndarray:
    coarse_height = max(2, round(cells * height / width))
    channels = []
    for _ in range(3):
        coarse = rng.standard_normal((coarse_height, cells)).astype(np.float32)
        layer = Image.fromarray(coarse).resize((width, height), Image.Resampling.BICUBIC)
        channels.append(np.asarray(layer, dtype=np.float64))
    return np.stack(channels, axis=-1)


def procedural_texture(width: int = 512, height: int = 512, seed: int = 0) -> ImageBuffer:
    """Deterministic smooth RGB texture.

    Args:
        width (int): Texture width in texels.
        height (int): Texture height in texels.
        seed (int): Top-level seed.

    Returns:
        ImageBuffer: ``(height, width, 3)`` texture with each channel spanning
        [0.05, 0.95].
    """
    rng = derive_rng(seed, TAG_TEXTURE)
    field = np.zeros((height, width, 3), dtype=np.float64)
    for cells, amplitude in _OCTAVES:
        field += amplitude * _upsampled_noise(rng, cells, width, height)
    low = field.min(axis=(0, 1), keepdims=True)
    high = field.max(axis=(0, 1), keepdims=True)
    return 0.05 + 0.9 * (field - low) / np.maximum(high - low, 1e-12)
