"""Forward and backward passes of the individual layer types.

Tensors are channels-last: images ``(N, H, W, C)``, features ``(N, F)``. All
functions are pure and compute in the dtype of their inputs; the model casts to
float64 before calling them. Convolution is written as a tensor contraction over
3x3 sliding windows, with the input gradient computed as a full convolution of
the output gradient with the flipped kernel.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from numpy.typing import NDArray

Array = NDArray[np.float64]

_PAD = 1
_K = 3


def _windows(x: Array) -> Array:
    """``(N, H, W, C, 3, 3)`` view of the zero-padded 3x3 neighbourhoods."""
    padded = np.pad(x, ((0, 0), (_PAD, _PAD), (_PAD, _PAD), (0, 0)))
    return sliding_window_view(padded, (_K, _K), axis=(1, 2))


def conv2d_forward(x: Array, weight: Array, bias: Array) -> Array:
    """Same-size 3x3 convolution.

    Args:
        x (Array): ``(N, H, W, C_in)`` input.
        weight (Array): ``(3, 3, C_in, C_out)`` kernel.
        bias (Array): ``(C_out,)`` bias.

    Returns:
        Array: ``(N, H, W, C_out)`` output.
    """
    return np.tensordot(_windows(x), weight, axes=([4, 5, 3], [0, 1, 2])) + bias


def conv2d_backward(x: Array, weight: Array, grad_out: Array) -> tuple[Array, Array, Array]:
    """Gradients of a 3x3 convolution.

    Returns:
        tuple[Array, Array, Array]: ``(grad_x, grad_weight, grad_bias)``.
    """
    # (C_in, 3, 3, C_out) -> (3, 3, C_in, C_out)
    grad_weight = np.tensordot(_windows(x), grad_out, axes=([0, 1, 2], [0, 1, 2]))
    grad_weight = grad_weight.transpose(1, 2, 0, 3)
    grad_bias = grad_out.sum(axis=(0, 1, 2))
    flipped = weight[::-1, ::-1]
    grad_x = np.tensordot(_windows(grad_out), flipped, axes=([4, 5, 3], [0, 1, 3]))
    return grad_x, grad_weight, grad_bias


def relu_forward(x: Array) -> Array:
    return np.maximum(x, 0.0)


def relu_backward(x: Array, grad_out: Array) -> Array:
    return grad_out * (x > 0.0)


def _pool_blocks(x: Array) -> Array:
    """``(N, H/2, W/2, C, 4)`` blocks; an odd trailing row or column is dropped."""
    n, h, w, c = x.shape
    h2, w2 = h // 2, w // 2
    cropped = x[:, : 2 * h2, : 2 * w2, :]
    blocks = cropped.reshape(n, h2, 2, w2, 2, c).transpose(0, 1, 3, 5, 2, 4)
    return blocks.reshape(n, h2, w2, c, 4)


def maxpool_forward(x: Array) -> tuple[Array, NDArray[np.intp]]:
    """2x2, stride-2 max pooling.

    Returns:
        tuple[Array, NDArray[np.intp]]: Pooled output and the index of the
        selected element within each block (first maximum on ties).
    """
    blocks = _pool_blocks(x)
    argmax = blocks.argmax(axis=-1)
    pooled = np.take_along_axis(blocks, argmax[..., None], axis=-1)[..., 0]
    return pooled, argmax


def maxpool_backward(
    input_shape: tuple[int, ...], argmax: NDArray[np.intp], grad_out: Array
) -> Array:
    """Route each output gradient to the element that produced the maximum."""
    n, h, w, c = input_shape
    h2, w2 = h // 2, w // 2
    routed = np.zeros((n, h2, w2, c, 4), dtype=grad_out.dtype)
    np.put_along_axis(routed, argmax[..., None], grad_out[..., None], axis=-1)
    grad = routed.reshape(n, h2, w2, c, 2, 2).transpose(0, 1, 4, 2, 5, 3)
    grad_x = np.zeros(input_shape, dtype=grad_out.dtype)
    grad_x[:, : 2 * h2, : 2 * w2, :] = grad.reshape(n, 2 * h2, 2 * w2, c)
    return grad_x


def dense_forward(x: Array, weight: Array, bias: Array) -> Array:
    return x @ weight + bias


def dense_backward(x: Array, weight: Array, grad_out: Array) -> tuple[Array, Array, Array]:
    """Gradients of an affine layer: ``(grad_x, grad_weight, grad_bias)``."""
    return grad_out @ weight.T, x.T @ grad_out, grad_out.sum(axis=0)
