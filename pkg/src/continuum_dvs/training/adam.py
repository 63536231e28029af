"""Adam with bias correction, as a pure function of (params, grads, state)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from continuum_dvs.core.exceptions import TrainingDivergedError
from continuum_dvs.network import Gradients, LayerParams, ParameterSet


class AdamConfig(BaseModel):
    """Optimizer hyperparameters."""

    model_config = ConfigDict(frozen=True)

    learning_rate: float = Field(default=1e-3, gt=0)
    beta1: float = Field(default=0.9, gt=0, lt=1)
    beta2: float = Field(default=0.999, gt=0, lt=1)
    epsilon: float = Field(default=1e-8, gt=0)


@dataclass(frozen=True)
class AdamState:
    """First and second moment estimates per trainable layer, and the step count.

    Moments are created lazily (as zeros) the first time a layer is updated.
    """

    m: dict[int, LayerParams] = field(default_factory=dict)
    v: dict[int, LayerParams] = field(default_factory=dict)
    t: int = 0


def adam_step(
    params: ParameterSet,
    grads: Gradients,
    state: AdamState,
    cfg: AdamConfig,
) -> tuple[ParameterSet, AdamState]:
    """One Adam update of the layers present in ``grads``.

    ``m <- b1 m + (1 - b1) g``, ``v <- b2 v + (1 - b2) g^2``, then
    ``theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)`` with bias-corrected
    moments. Layers missing from ``grads`` are returned unchanged.

    Args:
        params (ParameterSet): Current parameters.
        grads (Gradients): Gradients of the trainable layers.
        state (AdamState): Optimizer state.
        cfg (AdamConfig): Hyperparameters.

    Returns:
        tuple[ParameterSet, AdamState]: Updated parameters and state.

    Raises:
        TrainingDivergedError: If any gradient is non-finite.
    """
    for index, grad in grads.items():
        if not grad.is_finite():
            raise TrainingDivergedError(
                "Non-finite gradient", details={"layer": index, "step": state.t + 1}
            )

    t = state.t + 1
    correction1 = 1.0 - cfg.beta1**t
    correction2 = 1.0 - cfg.beta2**t
    m = dict(state.m)
    v = dict(state.v)
    updated: dict[int, LayerParams] = {}

    for index, grad in grads.items():
        current = params[index]
        if current is None:
            continue
        m_prev = m.get(index) or LayerParams(np.zeros_like(grad.weight), np.zeros_like(grad.bias))
        v_prev = v.get(index) or LayerParams(np.zeros_like(grad.weight), np.zeros_like(grad.bias))
        new_arrays: list[np.ndarray] = []
        moments_m: list[np.ndarray] = []
        moments_v: list[np.ndarray] = []
        for theta, g, m_old, v_old in (
            (current.weight, grad.weight, m_prev.weight, v_prev.weight),
            (current.bias, grad.bias, m_prev.bias, v_prev.bias),
        ):
            m_new = cfg.beta1 * m_old + (1.0 - cfg.beta1) * g
            v_new = cfg.beta2 * v_old + (1.0 - cfg.beta2) * (g * g)
            step = cfg.learning_rate * (m_new / correction1) / (
                np.sqrt(v_new / correction2) + cfg.epsilon
            )
            new_arrays.append((theta.astype(np.float64) - step).astype(theta.dtype))
            moments_m.append(m_new)
            moments_v.append(v_new)
        updated[index] = LayerParams(new_arrays[0], new_arrays[1])
        m[index] = LayerParams(moments_m[0], moments_m[1])
        v[index] = LayerParams(moments_v[0], moments_v[1])

    return params.replace(updated), AdamState(m=m, v=v, t=t)
