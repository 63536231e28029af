"""Ground-truth label mappings between tendon displacements and network targets.

The default ``tanh`` mapping squashes displacements smoothly into (-1, 1) and is
steepest at the origin, so residual errors near the target pose are penalised
most. The ``linear_clip`` mapping is the piecewise-linear alternative that maps
``+-clip_mm`` to ``+-1`` and saturates beyond.
"""

from __future__ import annotations

from typing import Literal

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

from continuum_dvs.kinematics import TendonDisplacement

# Labels are clipped this far inside (-1, 1) before inverting tanh
_ATANH_MARGIN = 1e-12


class LabelMap(BaseModel):
    """Label mapping parameters.

    Attributes:
        kind (Literal['tanh', 'linear_clip']): Mapping family.
        beta (float): tanh sharpness, 1/millimetres.
        clip_mm (float): Saturation displacement of the linear mapping.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["tanh", "linear_clip"] = "tanh"
    beta: float = Field(default=1.0, gt=0)
    clip_mm: float = Field(default=5.0, gt=0)


def label_of(q: TendonDisplacement, label_map: LabelMap) -> NDArray[np.float64]:
    """Network target for a joint state.

    Args:
        q (TendonDisplacement): Joint state, millimetres.
        label_map (LabelMap): Mapping to apply.

    Returns:
        NDArray[np.float64]: Two-vector in [-1, 1] (strictly inside for tanh).
    """
    values = q.as_array()
    if label_map.kind == "tanh":
        return np.tanh(label_map.beta * values)
    return np.clip(values / label_map.clip_mm, -1.0, 1.0)


def displacement_of(label: NDArray[np.floating], label_map: LabelMap) -> TendonDisplacement:
    """Invert a label (or a network output) to a joint-state estimate.

    Outputs outside the label range saturate at the largest representable
    displacement.

    Args:
        label (NDArray[np.floating]): Two-vector label or network output.
        label_map (LabelMap): Mapping that produced the labels.

    Returns:
        TendonDisplacement: Estimated joint state, millimetres.
    """
    values = np.asarray(label, dtype=np.float64)
    if label_map.kind == "tanh":
        bounded = np.clip(values, -1.0 + _ATANH_MARGIN, 1.0 - _ATANH_MARGIN)
        return TendonDisplacement.from_array(np.arctanh(bounded) / label_map.beta)
    return TendonDisplacement.from_array(np.clip(values, -1.0, 1.0) * label_map.clip_mm)
