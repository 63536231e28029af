"""Binary parameter checkpoints.

Layout (all integers little-endian u32, all values little-endian float32)::

    b"CNNP"  version  layer_count
    per layer:  array_count
        per array:  ndim  dim_0 ... dim_{ndim-1}  values (row-major)

Parameterless layers are stored with ``array_count = 0``; parametric layers
store ``weight`` then ``bias``. A file is parsed and checked completely before
any parameters are returned.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from continuum_dvs.core.exceptions import CheckpointFormatError, ResourceNotFoundError
from continuum_dvs.network.model import LayerParams, ParameterSet
from continuum_dvs.network.spec import NetworkSpec
from continuum_dvs.utils.logging import get_logger

logger = get_logger(__name__)

MAGIC = b"CNNP"
FORMAT_VERSION = 1
_U32 = struct.Struct("<I")
_VALUE = np.dtype("<f4")


def encode_parameters(params: ParameterSet) -> bytes:
    """Serialise parameters to checkpoint bytes (values cast to float32)."""
    chunks = [MAGIC, _U32.pack(FORMAT_VERSION), _U32.pack(len(params))]
    for layer in params.layers:
        arrays = () if layer is None else (layer.weight, layer.bias)
        chunks.append(_U32.pack(len(arrays)))
        for array in arrays:
            chunks.append(_U32.pack(array.ndim))
            chunks.extend(_U32.pack(dim) for dim in array.shape)
            chunks.append(np.ascontiguousarray(array, dtype=_VALUE).tobytes())
    return b"".join(chunks)


def save_parameters(params: ParameterSet, path: Path | str) -> Path:
    """Write a checkpoint atomically (temporary file, then rename).

    Args:
        params (ParameterSet): Parameters to store.
        path (Path | str): Destination file.

    Returns:
        Path: The written path.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    scratch = target.with_name(target.name + ".tmp")
    scratch.write_bytes(encode_parameters(params))
    os.replace(scratch, target)
    logger.debug("Checkpoint saved", path=str(target), parameters=params.parameter_count)
    return target


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.offset = 0

    def take(self, size: int, what: str, layer: int | None = None) -> bytes:
        end = self.offset + size
        if end > len(self.data):
            raise CheckpointFormatError(
                "Checkpoint is truncated",
                layer=layer,
                details={"reading": what, "offset": self.offset, "size": len(self.data)},
            )
        chunk = self.data[self.offset : end]
        self.offset = end
        return chunk

    def u32(self, what: str, layer: int | None = None) -> int:
        return _U32.unpack(self.take(_U32.size, what, layer))[0]


def decode_parameters(spec: NetworkSpec, data: bytes) -> ParameterSet:
    """Parse checkpoint bytes against a network layout.

    Raises:
        CheckpointFormatError: On bad magic, unsupported version, truncation,
            trailing bytes, or the first layer whose shapes differ from ``spec``.
    """
    reader = _Reader(data)
    if reader.take(len(MAGIC), "magic") != MAGIC:
        raise CheckpointFormatError("Not a parameter checkpoint (bad magic)")
    version = reader.u32("version")
    if version != FORMAT_VERSION:
        raise CheckpointFormatError(
            "Unsupported checkpoint version",
            details={"version": version, "supported": FORMAT_VERSION},
        )
    expected = spec.parameter_shapes()
    count = reader.u32("layer count")
    if count != len(expected):
        raise CheckpointFormatError(
            "Checkpoint layer count does not match the network",
            layer=min(count, len(expected)),
            details={"expected": len(expected), "actual": count},
        )

    layers: list[LayerParams | None] = []
    for index, shapes in enumerate(expected):
        arrays = []
        for _ in range(reader.u32("array count", index)):
            ndim = reader.u32("ndim", index)
            shape = tuple(reader.u32("dimension", index) for _ in range(ndim))
            size = int(np.prod(shape, dtype=np.int64))
            raw = reader.take(size * _VALUE.itemsize, "values", index)
            arrays.append(np.frombuffer(raw, dtype=_VALUE).reshape(shape).astype(np.float32))
        actual = tuple(a.shape for a in arrays)
        wanted = () if shapes is None else shapes
        if actual != wanted:
            raise CheckpointFormatError(
                "Checkpoint shapes do not match the network",
                layer=index,
                details={
                    "kind": spec.layers[index].kind,
                    "expected": str(wanted),
                    "actual": str(actual),
                },
            )
        layers.append(None if shapes is None else LayerParams(arrays[0], arrays[1]))

    if reader.offset != len(data):
        raise CheckpointFormatError(
            "Checkpoint has trailing bytes",
            details={"offset": reader.offset, "size": len(data)},
        )
    params = ParameterSet(tuple(layers))
    if not params.is_finite():
        raise CheckpointFormatError("Checkpoint holds non-finite values")
    return params


def load_parameters(spec: NetworkSpec, path: Path | str) -> ParameterSet:
    """Read a checkpoint for ``spec``.

    Args:
        spec (NetworkSpec): Layout the parameters must match.
        path (Path | str): Checkpoint file.

    Returns:
        ParameterSet: float32 parameters.

    Raises:
        ResourceNotFoundError: If the file does not exist.
        CheckpointFormatError: If the file is malformed or mismatched.
    """
    source = Path(path)
    if not source.is_file():
        raise ResourceNotFoundError(
            "Checkpoint not found", resource_type="checkpoint", path=str(source)
        )
    params = decode_parameters(spec, source.read_bytes())
    logger.debug("Checkpoint loaded", path=str(source), parameters=params.parameter_count)
    return params
