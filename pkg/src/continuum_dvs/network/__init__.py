"""From-scratch convolutional regressor with exact backpropagation."""

from continuum_dvs.network.checkpoint import (
    decode_parameters,
    encode_parameters,
    load_parameters,
    save_parameters,
)
from continuum_dvs.network.model import (
    ForwardCache,
    Gradients,
    LayerParams,
    ParameterSet,
    backward,
    forward,
    init_parameters,
    mse_loss,
    predict,
)
from continuum_dvs.network.spec import (
    REFERENCE_LAYOUT,
    LayerSpec,
    NetworkSpec,
    parse_layout,
    reference_spec,
    vgg16_spec,
)

__all__ = [
    "REFERENCE_LAYOUT",
    "ForwardCache",
    "Gradients",
    "LayerParams",
    "LayerSpec",
    "NetworkSpec",
    "ParameterSet",
    "backward",
    "decode_parameters",
    "encode_parameters",
    "forward",
    "init_parameters",
    "load_parameters",
    "mse_loss",
    "parse_layout",
    "predict",
    "reference_spec",
    "save_parameters",
    "vgg16_spec",
]
