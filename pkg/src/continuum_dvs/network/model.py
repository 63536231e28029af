"""Parameters, forward pass, loss and backpropagation of a :class:`NetworkSpec`.

Parameters are stored in float32 (the checkpoint precision) unless created with
another dtype; every pass computes in float64.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from continuum_dvs.core.exceptions import ValidationError
from continuum_dvs.network.layers import (
    Array,
    conv2d_backward,
    conv2d_forward,
    dense_backward,
    dense_forward,
    maxpool_backward,
    maxpool_forward,
    relu_backward,
    relu_forward,
)
from continuum_dvs.network.spec import NetworkSpec
from continuum_dvs.utils.seeding import TAG_INIT, derive_rng


@dataclass(frozen=True)
class LayerParams:
    """Weight and bias of one layer."""

    weight: NDArray[np.floating]
    bias: NDArray[np.floating]

    def astype(self, dtype: type[np.floating]) -> LayerParams:
        return LayerParams(self.weight.astype(dtype), self.bias.astype(dtype))

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.weight).all() and np.isfinite(self.bias).all())


@dataclass(frozen=True)
class ParameterSet:
    """Per-layer parameters, aligned with ``NetworkSpec.layers``.

    Parameterless layers hold ``None``. Arrays are treated as immutable: updates
    build a new set and share untouched layers.
    """

    layers: tuple[LayerParams | None, ...]

    def __len__(self) -> int:
        return len(self.layers)

    def __getitem__(self, index: int) -> LayerParams | None:
        return self.layers[index]

    @property
    def parameter_count(self) -> int:
        return sum(p.weight.size + p.bias.size for p in self.layers if p is not None)

    def replace(self, updates: dict[int, LayerParams]) -> ParameterSet:
        """Copy with the given layers replaced."""
        return ParameterSet(tuple(updates.get(i, p) for i, p in enumerate(self.layers)))

    def astype(self, dtype: type[np.floating]) -> ParameterSet:
        return ParameterSet(tuple(p.astype(dtype) if p is not None else None for p in self.layers))

    def is_finite(self) -> bool:
        return all(p.is_finite() for p in self.layers if p is not None)

    def equals(self, other: ParameterSet) -> bool:
        """Bit-level equality (dtype, shape and values)."""
        if len(self) != len(other):
            return False
        for mine, theirs in zip(self.layers, other.layers, strict=True):
            if (mine is None) != (theirs is None):
                return False
            if mine is None or theirs is None:
                continue
            for a, b in ((mine.weight, theirs.weight), (mine.bias, theirs.bias)):
                if a.dtype != b.dtype or a.shape != b.shape or a.tobytes() != b.tobytes():
                    return False
        return True

    def check_against(self, spec: NetworkSpec) -> None:
        """Raise if shapes or finiteness do not match ``spec``.

        Raises:
            ValidationError: Naming the first mismatched layer.
        """
        expected = spec.parameter_shapes()
        if len(expected) != len(self.layers):
            raise ValidationError(
                "Parameter set does not match the network layer count",
                field="params",
                details={"expected_layers": len(expected), "actual_layers": len(self.layers)},
            )
        for index, (shapes, params) in enumerate(zip(expected, self.layers, strict=True)):
            actual = None if params is None else (params.weight.shape, params.bias.shape)
            if shapes != actual:
                raise ValidationError(
                    "Parameter shapes do not match the network",
                    field="params",
                    details={"layer": index, "expected": str(shapes), "actual": str(actual)},
                )
            if params is not None and not params.is_finite():
                raise ValidationError(
                    "Parameters must be finite", field="params", details={"layer": index}
                )


Gradients = dict[int, LayerParams]
"""Parameter gradients keyed by layer index (trainable layers only)."""


def init_parameters(
    spec: NetworkSpec, seed: int, *, dtype: type[np.floating] = np.float32
) -> ParameterSet:
    """He-initialised parameters.

    Weights are drawn from ``N(0, 2 / fan_in)`` layer by layer from one stream
    derived from ``seed``; biases are zero.

    Args:
        spec (NetworkSpec): Network layout.
        seed (int): Top-level seed.
        dtype (type[np.floating]): Storage dtype.

    Returns:
        ParameterSet: Fresh parameters.
    """
    rng = derive_rng(seed, TAG_INIT)
    layers: list[LayerParams | None] = []
    for shapes in spec.parameter_shapes():
        if shapes is None:
            layers.append(None)
            continue
        weight_shape, bias_shape = shapes
        fan_in = int(np.prod(weight_shape[:-1]))
        weight = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=weight_shape)
        layers.append(LayerParams(weight.astype(dtype), np.zeros(bias_shape, dtype=dtype)))
    return ParameterSet(tuple(layers))


@dataclass
class ForwardCache:
    """Layer inputs (and pooling argmax) recorded by :func:`forward`."""

    inputs: list[Array] = field(default_factory=list)
    argmax: dict[int, NDArray[np.intp]] = field(default_factory=dict)


def _as_f64(params: LayerParams | None) -> tuple[Array, Array]:
    if params is None:  # pragma: no cover - guarded by check_against
        msg = "missing parameters for a parametric layer"
        raise ValueError(msg)
    return params.weight.astype(np.float64), params.bias.astype(np.float64)


def forward(
    spec: NetworkSpec, params: ParameterSet, batch: NDArray[np.floating]
) -> tuple[Array, ForwardCache]:
    """Evaluate the network on a batch.

    Args:
        spec (NetworkSpec): Network layout.
        params (ParameterSet): Parameters matching ``spec``.
        batch (NDArray[np.floating]): ``(N, H, W, 3)`` input.

    Returns:
        tuple[Array, ForwardCache]: ``(N, 2)`` outputs and the cache for
        :func:`backward`.

    Raises:
        ValidationError: If the batch shape does not match the input size.
    """
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 4 or x.shape[1:] != spec.input_shape:  # noqa: PLR2004
        raise ValidationError(
            "Batch does not match the network input size",
            field="batch",
            details={"expected": str(spec.input_shape), "actual": str(x.shape)},
        )
    if not np.isfinite(x).all():
        raise ValidationError("Batch must be finite", field="batch")

    cache = ForwardCache()
    for index, layer in enumerate(spec.layers):
        cache.inputs.append(x)
        if layer.kind == "conv2d":
            x = conv2d_forward(x, *_as_f64(params[index]))
        elif layer.kind in ("dense", "linear_output"):
            x = dense_forward(x, *_as_f64(params[index]))
        elif layer.kind == "relu":
            x = relu_forward(x)
        elif layer.kind == "maxpool":
            x, cache.argmax[index] = maxpool_forward(x)
        else:
            x = x.reshape(x.shape[0], -1)
    return x, cache


def predict(spec: NetworkSpec, params: ParameterSet, batch: NDArray[np.floating]) -> Array:
    """Network outputs without keeping the cache."""
    outputs, _ = forward(spec, params, batch)
    return outputs


def mse_loss(pred: NDArray[np.floating], target: NDArray[np.floating]) -> tuple[float, Array]:
    """Mean squared error over all entries and its gradient w.r.t. ``pred``.

    Raises:
        ValidationError: If the shapes differ.
    """
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if p.shape != t.shape:
        raise ValidationError(
            "Prediction and target shapes differ",
            field="target",
            details={"pred": str(p.shape), "target": str(t.shape)},
        )
    residual = p - t
    return float(np.mean(residual * residual)), 2.0 * residual / residual.size


def backward(
    spec: NetworkSpec,
    params: ParameterSet,
    cache: ForwardCache,
    output_grad: NDArray[np.floating],
) -> Gradients:
    """Backpropagate ``output_grad`` through the network.

    Gradients flow through frozen layers but are only returned for trainable
    ones. Propagation stops below the lowest trainable layer.

    Args:
        spec (NetworkSpec): Network layout.
        params (ParameterSet): Parameters used in the forward pass.
        cache (ForwardCache): Cache from :func:`forward` on the same inputs.
        output_grad (NDArray[np.floating]): ``(N, 2)`` loss gradient.

    Returns:
        Gradients: float64 gradients per trainable layer index.
    """
    trainable = spec.trainable_indices()
    grads: Gradients = {}
    if not trainable:
        return grads
    lowest = trainable[0]
    grad = np.asarray(output_grad, dtype=np.float64)
    for index in range(len(spec.layers) - 1, lowest - 1, -1):
        layer = spec.layers[index]
        x = cache.inputs[index]
        if layer.kind == "conv2d":
            weight, _ = _as_f64(params[index])
            grad_x, grad_w, grad_b = conv2d_backward(x, weight, grad)
        elif layer.kind in ("dense", "linear_output"):
            weight, _ = _as_f64(params[index])
            grad_x, grad_w, grad_b = dense_backward(x, weight, grad)
        elif layer.kind == "relu":
            grad = relu_backward(x, grad)
            continue
        elif layer.kind == "maxpool":
            grad = maxpool_backward(x.shape, cache.argmax[index], grad)
            continue
        else:
            grad = grad.reshape(x.shape)
            continue
        if layer.trainable:
            grads[index] = LayerParams(grad_w, grad_b)
        grad = grad_x
    return grads
