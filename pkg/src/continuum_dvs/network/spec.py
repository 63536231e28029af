"""Network layouts: VGG-style conv/ReLU/pool blocks followed by a dense head.

Convolutions are fixed at 3x3, stride 1, padding 1 and pooling at 2x2, stride 2,
so a layout is fully described by its layer kinds and widths. Layouts can be
written as dash-separated tokens::

    conv8-pool-conv16-pool-flatten-dense64-linear2

``convN`` and ``denseN`` expand to the layer followed by a ReLU; ``pool``,
``relu``, ``flatten`` and ``linear2`` are single layers.
"""

from __future__ import annotations

import re
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from continuum_dvs.core.exceptions import ValidationError

LayerKind = Literal["conv2d", "relu", "maxpool", "flatten", "dense", "linear_output"]
Shape = tuple[int, ...]

KERNEL_SIZE = 3
POOL_SIZE = 2
OUTPUT_FEATURES = 2
PARAMETRIC_KINDS = frozenset({"conv2d", "dense", "linear_output"})

REFERENCE_LAYOUT = "conv8-pool-conv16-pool-conv32-pool-conv32-pool-flatten-dense64-linear2"
VGG16_LAYOUT = (
    "conv64-conv64-pool-conv128-conv128-pool-conv256-conv256-conv256-pool-"
    "conv512-conv512-conv512-pool-conv512-conv512-conv512-pool-"
    "flatten-dense4096-dense4096-linear2"
)
VGG16_FROZEN_LAYERS = 10

_TOKEN = re.compile(r"^(conv|dense)(\d+)$|^(pool|relu|flatten|linear2)$")


class LayerSpec(BaseModel):
    """One layer of a network layout.

    Attributes:
        kind (LayerKind): Layer type.
        size (int): Output channels (conv2d) or features (dense, linear_output).
        trainable (bool): Whether training updates this layer's parameters.
    """

    model_config = ConfigDict(frozen=True)

    kind: LayerKind
    size: int = Field(default=0, ge=0)
    trainable: bool = True

    @property
    def has_parameters(self) -> bool:
        return self.kind in PARAMETRIC_KINDS

    def label(self) -> str:
        """Short human-readable name, e.g. ``conv2d(16)``."""
        return f"{self.kind}({self.size})" if self.has_parameters else self.kind


def _propagate(layer: LayerSpec, shape: Shape) -> Shape:
    if layer.kind == "conv2d":
        if len(shape) != 3:  # noqa: PLR2004
            msg = f"conv2d needs an (H, W, C) input, got {shape}"
            raise ValueError(msg)
        return (shape[0], shape[1], layer.size)
    if layer.kind == "maxpool":
        if len(shape) != 3 or min(shape[0], shape[1]) < POOL_SIZE:  # noqa: PLR2004
            msg = f"maxpool needs an (H, W, C) input of at least 2x2, got {shape}"
            raise ValueError(msg)
        return (shape[0] // POOL_SIZE, shape[1] // POOL_SIZE, shape[2])
    if layer.kind == "flatten":
        size = 1
        for dim in shape:
            size *= dim
        return (size,)
    if layer.kind in ("dense", "linear_output"):
        if len(shape) != 1:
            msg = f"{layer.kind} needs a flat input, got {shape}; add a flatten layer"
            raise ValueError(msg)
        return (layer.size,)
    return shape


class NetworkSpec(BaseModel):
    """An ordered layer list with its input size.

    Construction fails unless shapes propagate from ``input_shape`` to a final
    ``linear_output(2)`` layer.

    Attributes:
        input_shape (tuple[int, int, int]): ``(H, W, 3)`` input size.
        layers (tuple[LayerSpec, ...]): Layers in evaluation order.
    """

    model_config = ConfigDict(frozen=True)

    input_shape: tuple[int, int, int]
    layers: tuple[LayerSpec, ...]

    @model_validator(mode="after")
    def _check_layout(self) -> NetworkSpec:
        if min(self.input_shape) < 1 or self.input_shape[2] != 3:  # noqa: PLR2004
            msg = f"input shape must be (H, W, 3), got {self.input_shape}"
            raise ValueError(msg)
        if not self.layers:
            msg = "network needs at least one layer"
            raise ValueError(msg)
        last = self.layers[-1]
        if last.kind != "linear_output" or last.size != OUTPUT_FEATURES:
            msg = "last layer must be linear_output(2)"
            raise ValueError(msg)
        for layer in self.layers:
            if layer.has_parameters and layer.size < 1:
                msg = f"{layer.kind} needs a positive size"
                raise ValueError(msg)
            if layer.kind == "linear_output" and layer is not last:
                msg = "linear_output may only appear as the last layer"
                raise ValueError(msg)
        self.output_shapes()
        return self

    @property
    def input_size(self) -> tuple[int, int]:
        """``(height, width)`` of the network input."""
        return self.input_shape[0], self.input_shape[1]

    def output_shapes(self) -> list[Shape]:
        """Per-sample output shape of every layer.

        Raises:
            ValueError: If a layer cannot accept the previous layer's output.
        """
        shapes: list[Shape] = []
        shape: Shape = self.input_shape
        for layer in self.layers:
            shape = _propagate(layer, shape)
            shapes.append(shape)
        return shapes

    def input_shapes(self) -> list[Shape]:
        """Per-sample input shape of every layer."""
        return [self.input_shape, *self.output_shapes()[:-1]]

    def parameter_shapes(self) -> list[tuple[Shape, Shape] | None]:
        """``(weight, bias)`` shapes per layer; ``None`` for parameterless layers.

        Convolution weights are ``(3, 3, C_in, C_out)``, dense weights
        ``(F_in, F_out)``.
        """
        result: list[tuple[Shape, Shape] | None] = []
        for layer, shape in zip(self.layers, self.input_shapes(), strict=True):
            if layer.kind == "conv2d":
                result.append(((KERNEL_SIZE, KERNEL_SIZE, shape[2], layer.size), (layer.size,)))
            elif layer.has_parameters:
                result.append(((shape[0], layer.size), (layer.size,)))
            else:
                result.append(None)
        return result

    def trainable_indices(self) -> list[int]:
        """Indices of layers whose parameters training updates."""
        return [i for i, layer in enumerate(self.layers) if layer.has_parameters and layer.trainable]

    def freeze_first(self, count: int) -> NetworkSpec:
        """Copy with the first ``count`` layers frozen and the rest trainable."""
        layers = tuple(
            layer.model_copy(update={"trainable": i >= count})
            for i, layer in enumerate(self.layers)
        )
        return self.model_copy(update={"layers": layers})

    def to_layout(self) -> str:
        """Layer-by-layer token string (ReLUs written explicitly)."""
        tokens: list[str] = []
        for layer in self.layers:
            if layer.kind == "conv2d":
                tokens.append(f"conv{layer.size}")
            elif layer.kind == "dense":
                tokens.append(f"dense{layer.size}")
            elif layer.kind == "maxpool":
                tokens.append("pool")
            elif layer.kind == "linear_output":
                tokens.append("linear2")
            else:
                tokens.append(layer.kind)
        return "-".join(tokens)


def _expand(token: str) -> list[LayerSpec]:
    match = _TOKEN.match(token)
    if match is None:
        raise ValidationError(
            f"Unknown layer token '{token}'",
            field="network_layout",
            value=token,
            details={"expected": "convN, denseN, pool, relu, flatten or linear2"},
        )
    family, width, literal = match.groups()
    if family == "conv":
        return [LayerSpec(kind="conv2d", size=int(width)), LayerSpec(kind="relu")]
    if family == "dense":
        return [LayerSpec(kind="dense", size=int(width)), LayerSpec(kind="relu")]
    if literal == "pool":
        return [LayerSpec(kind="maxpool")]
    if literal == "linear2":
        return [LayerSpec(kind="linear_output", size=OUTPUT_FEATURES)]
    return [LayerSpec(kind=literal)]


def parse_layout(
    layout: str, input_size: tuple[int, int], frozen_layers: int = 0
) -> NetworkSpec:
    """Build a network from a layout string.

    Args:
        layout (str): Dash-separated layer tokens.
        input_size (tuple[int, int]): Input ``(height, width)``.
        frozen_layers (int): Number of leading (expanded) layers to freeze.

    Returns:
        NetworkSpec: The validated network.

    Raises:
        ValidationError: On unknown tokens or layouts that do not propagate.
    """
    tokens = [token.strip() for token in layout.split("-") if token.strip()]
    layers = [layer for token in tokens for layer in _expand(token)]
    if frozen_layers < 0 or frozen_layers > len(layers):
        raise ValidationError(
            "frozen_layers must lie between 0 and the layer count",
            field="frozen_layers",
            value=frozen_layers,
            details={"layer_count": len(layers)},
        )
    try:
        spec = NetworkSpec(input_shape=(input_size[0], input_size[1], 3), layers=tuple(layers))
    except ValueError as exc:
        raise ValidationError(
            "Invalid network layout", field="network_layout", value=layout,
            details={"reason": str(exc)},
        ) from exc
    return spec.freeze_first(frozen_layers)


def reference_spec(input_size: tuple[int, int] = (64, 64)) -> NetworkSpec:
    """The desk-scale regressor: four conv blocks, a 64-unit dense layer, 2 outputs."""
    return parse_layout(REFERENCE_LAYOUT, input_size)


def vgg16_spec(input_size: int = 224) -> NetworkSpec:
    """VGG-16 with the last dense layer replaced by a two-output linear head.

    The first ten layers (counting ReLU and pooling layers) are frozen.
    """
    return parse_layout(VGG16_LAYOUT, (input_size, input_size), VGG16_FROZEN_LAYERS)
