"""Binary weight files.

Little-endian layout: ``SCNN`` magic, u32 version (1), u32 layer count, then
per layer u32 in, u32 out, u32 kh, u32 kw, u8 activation (0 ReLU, 1 sigmoid),
``out`` float32 biases and the float32 kernels in (out, in, kh, kw) order.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from ..errors import ArchitectureError, WeightFormatError
from .net import Activation, ConvLayer, ConvNet

MAGIC = b"SCNN"
VERSION = 1
_HEADER = struct.Struct("<4sII")
_LAYER = struct.Struct("<IIIIB")


def weights_to_bytes(net: ConvNet) -> bytes:
    parts = [_HEADER.pack(MAGIC, VERSION, len(net.layers))]
    for layer in net.layers:
        o, i, kh, kw = layer.kernels.shape
        parts.append(_LAYER.pack(i, o, kh, kw, int(layer.activation)))
        parts.append(np.ascontiguousarray(layer.biases, "<f4").tobytes())
        parts.append(np.ascontiguousarray(layer.kernels, "<f4").tobytes())
    return b"".join(parts)


def weights_from_bytes(blob: bytes, source: str = "<bytes>") -> ConvNet:
    def fail(msg: str) -> WeightFormatError:
        return WeightFormatError(f"{source}: {msg}")

    if len(blob) < _HEADER.size:
        raise fail("file is truncated (no header)")
    magic, version, n_layers = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise fail(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise fail(f"unsupported format version {version}")
    pos = _HEADER.size
    layers = []
    for li in range(n_layers):
        if len(blob) < pos + _LAYER.size:
            raise fail(f"truncated in the header of layer {li}")
        i, o, kh, kw, act = _LAYER.unpack_from(blob, pos)
        pos += _LAYER.size
        if act not in (0, 1):
            raise fail(f"layer {li} has unknown activation code {act}")
        n_b, n_k = o, o * i * kh * kw
        end = pos + 4 * (n_b + n_k)
        if len(blob) < end:
            raise fail(f"truncated in the parameters of layer {li}")
        biases = np.frombuffer(blob, "<f4", n_b, pos).astype(np.float32)
        kernels = np.frombuffer(blob, "<f4", n_k, pos + 4 * n_b).astype(np.float32).reshape(o, i, kh, kw)
        pos = end
        try:
            layers.append(ConvLayer(kernels, biases, Activation(act)))
        except ArchitectureError as exc:
            raise fail(f"layer {li}: {exc}") from None
    if pos != len(blob):
        raise fail(f"{len(blob) - pos} trailing bytes after the last layer")
    try:
        return ConvNet(layers)
    except ArchitectureError as exc:
        raise fail(str(exc)) from None


def save_weights(net: ConvNet, path: str | Path) -> None:
    """Write atomically (temp file + rename) so a crash never leaves a half file."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(weights_to_bytes(net))
    os.replace(tmp, path)


def load_weights(path: str | Path) -> ConvNet:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise WeightFormatError(f"{path}: cannot read weight file ({exc.strerror})") from None
    return weights_from_bytes(blob, str(path))
