"""Network description: layers, architectures and initialisation."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import ArchitectureError


class Activation(enum.IntEnum):
    RELU = 0
    SIGMOID = 1


@dataclass(frozen=True)
class LayerSpec:
    in_channels: int
    out_channels: int
    kernel: int = 11
    activation: Activation = Activation.RELU


# 4 -> 9 -> 9 -> 2 with 11x11 kernels everywhere
REFERENCE_ARCH: tuple[LayerSpec, ...] = (
    LayerSpec(4, 9, 11, Activation.RELU),
    LayerSpec(9, 9, 11, Activation.RELU),
    LayerSpec(9, 2, 11, Activation.SIGMOID),
)


@dataclass(eq=False)
class ConvLayer:
    kernels: np.ndarray  # (out, in, kh, kw)
    biases: np.ndarray  # (out,)
    activation: Activation

    def __post_init__(self):
        if self.kernels.ndim != 4:
            raise ArchitectureError(f"kernels must be 4-D (out, in, kh, kw), got shape {self.kernels.shape}")
        out, _, kh, kw = self.kernels.shape
        if kh % 2 == 0 or kw % 2 == 0:
            raise ArchitectureError(f"kernel size must be odd, got {kh}x{kw}")
        if self.biases.shape != (out,):
            raise ArchitectureError(f"expected {out} biases, got shape {self.biases.shape}")
        self.activation = Activation(self.activation)

    @property
    def in_channels(self) -> int:
        return self.kernels.shape[1]

    @property
    def out_channels(self) -> int:
        return self.kernels.shape[0]

    @property
    def kernel_h(self) -> int:
        return self.kernels.shape[2]

    @property
    def kernel_w(self) -> int:
        return self.kernels.shape[3]

    @property
    def n_params(self) -> int:
        return self.kernels.size + self.biases.size


@dataclass(eq=False)
class ConvNet:
    layers: list[ConvLayer] = field(default_factory=list)

    def __post_init__(self):
        if not self.layers:
            raise ArchitectureError("a network needs at least one layer")
        for i, (a, b) in enumerate(zip(self.layers, self.layers[1:])):
            if a.out_channels != b.in_channels:
                raise ArchitectureError(
                    f"layer {i} emits {a.out_channels} channels but layer {i + 1} expects {b.in_channels}")

    @property
    def in_channels(self) -> int:
        return self.layers[0].in_channels

    @property
    def out_channels(self) -> int:
        return self.layers[-1].out_channels

    @property
    def n_params(self) -> int:
        return sum(layer.n_params for layer in self.layers)

    @property
    def receptive_radius(self) -> int:
        return sum((max(layer.kernel_h, layer.kernel_w) - 1) // 2 for layer in self.layers)

    @property
    def dtype(self) -> np.dtype:
        return self.layers[0].kernels.dtype

    def copy(self, dtype=None) -> "ConvNet":
        dt = dtype or self.dtype
        return ConvNet([ConvLayer(l.kernels.astype(dt, copy=True), l.biases.astype(dt, copy=True), l.activation)
                        for l in self.layers])

    def params(self) -> list[np.ndarray]:
        """Parameter arrays in a fixed order (kernels then biases per layer); mutable views."""
        out = []
        for layer in self.layers:
            out += [layer.kernels, layer.biases]
        return out

    def equals(self, other: "ConvNet") -> bool:
        """Bit-for-bit equality of architecture and parameters."""
        if len(self.layers) != len(other.layers):
            return False
        for a, b in zip(self.layers, other.layers):
            if a.activation != b.activation or a.kernels.shape != b.kernels.shape:
                return False
            if a.kernels.tobytes() != b.kernels.tobytes() or a.biases.tobytes() != b.biases.tobytes():
                return False
        return True


def init_net(arch: Sequence[LayerSpec] = REFERENCE_ARCH, seed: int = 0, dtype=np.float32) -> ConvNet:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) kernels and zero biases."""
    if not arch:
        raise ArchitectureError("architecture is empty")
    for i, (a, b) in enumerate(zip(arch, arch[1:])):
        if a.out_channels != b.in_channels:
            raise ArchitectureError(
                f"layer {i} emits {a.out_channels} channels but layer {i + 1} expects {b.in_channels}")
    rng = np.random.default_rng(seed)
    layers = []
    for spec in arch:
        if spec.in_channels < 1 or spec.out_channels < 1 or spec.kernel < 1 or spec.kernel % 2 == 0:
            raise ArchitectureError(f"invalid layer spec {spec}")
        fan_in = spec.in_channels * spec.kernel * spec.kernel
        bound = 1.0 / np.sqrt(fan_in)
        k = rng.uniform(-bound, bound, (spec.out_channels, spec.in_channels, spec.kernel, spec.kernel))
        layers.append(ConvLayer(k.astype(dtype), np.zeros(spec.out_channels, dtype), spec.activation))
    return ConvNet(layers)


def zero_net(arch: Sequence[LayerSpec] = REFERENCE_ARCH, dtype=np.float32) -> ConvNet:
    """All weights and biases zero; its sigmoid output is 0.5 everywhere."""
    return ConvNet([ConvLayer(np.zeros((s.out_channels, s.in_channels, s.kernel, s.kernel), dtype),
                              np.zeros(s.out_channels, dtype), s.activation) for s in arch])
