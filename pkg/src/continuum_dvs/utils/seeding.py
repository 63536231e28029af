"""Seed fan-out.

All randomness flows from one top-level seed. Each consumer derives its own
``numpy.random.Generator`` from ``(seed, tag, index)`` so streams never overlap
and never depend on execution order.
"""

from __future__ import annotations

import zlib

import numpy as np

# Module tags used by the pipeline. Changing a value changes every derived stream.
TAG_TEXTURE = "texture"
TAG_DATASET = "dataset"
TAG_INIT = "init"
TAG_SHUFFLE = "shuffle"
TAG_SERVO = "servo"
TAG_EVAL = "eval"


def tag_value(tag: str) -> int:
    """Stable 32-bit integer for a module tag (CRC-32 of its UTF-8 bytes).

    Args:
        tag (str): Module tag.

    Returns:
        int: Non-negative integer identifying the tag.
    """
    return zlib.crc32(tag.encode("utf-8"))


def derive_rng(seed: int, tag: str, index: int = 0) -> np.random.Generator:
    """Independent generator for ``(seed, tag, index)``.

    Args:
        seed (int): Top-level seed (non-negative).
        tag (str): Module tag, e.g. :data:`TAG_DATASET`.
        index (int): Per-item index (sample, run, ...).

    Returns:
        np.random.Generator: PCG64 generator seeded from the triple.
    """
    sequence = np.random.SeedSequence([seed, tag_value(tag), index])
    return np.random.Generator(np.random.PCG64(sequence))
