"""Spiral traversal of the joint space.

Samples ``x = 1..n`` lie on an Archimedean spiral whose radius grows linearly
to the amplitude ``A`` while turning ``P`` full periods::

    q1 = (A / n) x cos(2 pi (P / n) x)
    q2 = (A / n) x sin(2 pi (P / n) x)

Equal steps in ``x`` give equal radial steps, so samples per unit area fall off
away from the origin: the dataset is densest where the controller needs the
finest resolution.
"""

from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict, Field

from continuum_dvs.kinematics import TendonDisplacement


class SpiralConfig(BaseModel):
    """Spiral path parameters.

    Attributes:
        amplitude_mm (float): Final radius A in millimetres.
        periods (float): Number of turns P.
        sample_count (int): Number of samples n.
    """

    model_config = ConfigDict(frozen=True)

    amplitude_mm: float = Field(default=7.0, gt=0)
    periods: float = Field(default=20.0, gt=0)
    sample_count: int = Field(default=5000, ge=1)


def spiral_point(x: int, cfg: SpiralConfig) -> TendonDisplacement:
    """The ``x``-th spiral sample (1-based)."""
    n = cfg.sample_count
    radius = cfg.amplitude_mm / n * x
    angle = cfg.periods / n * x * 2.0 * math.pi
    return TendonDisplacement(radius * math.cos(angle), radius * math.sin(angle))


def spiral_path(cfg: SpiralConfig) -> list[TendonDisplacement]:
    """All spiral samples in traversal order.

    Args:
        cfg (SpiralConfig): Path parameters.

    Returns:
        list[TendonDisplacement]: ``n`` joint states, millimetres.
    """
    return [spiral_point(x, cfg) for x in range(1, cfg.sample_count + 1)]
