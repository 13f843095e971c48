"""Batched forward/backward passes for training, using FFT convolutions.

For a layer with kernel ``w`` (out, in, k, k) and half-width ``p``::

    y   = full_conv(x, flip(w))[p:p+H]          (same-padded correlation)
    dw  = correlation of x with dy at lags -p..p
    dx  = full_conv(dy, w)[p:p+H]

All three are evaluated with real 2-D FFTs on a grid large enough that
circular wrap-around never touches the kept region.
"""

from __future__ import annotations

import enum

import numpy as np
from scipy import fft as sfft

from .net import Activation, ConvNet


class Loss(enum.Enum):
    BCE = "bce"
    MSE = "mse"


def _grid(h: int, w: int, k: int) -> tuple[int, int]:
    return sfft.next_fast_len(h + k - 1, real=True), sfft.next_fast_len(w + k - 1, real=True)


def _fmix(a: np.ndarray, b: np.ndarray, spec: str) -> np.ndarray:
    """Frequency-wise channel mixing, done as one batched matmul over frequencies."""
    # a: (B, C, F) etc.; moving F to the front lets matmul batch over it
    if spec == "forward":  # (B,C,F) x (O,C,F) -> (B,O,F)
        return np.matmul(a.transpose(2, 0, 1), b.transpose(2, 1, 0)).transpose(1, 2, 0)
    if spec == "input":  # (B,O,F) x (O,C,F) -> (B,C,F)
        return np.matmul(a.transpose(2, 0, 1), b.transpose(2, 0, 1)).transpose(1, 2, 0)
    if spec == "kernel":  # (B,C,F) x (B,O,F) -> (O,C,F)
        return np.matmul(b.transpose(2, 1, 0), a.transpose(2, 0, 1)).transpose(1, 2, 0)
    raise ValueError(spec)


class _LayerCache:
    __slots__ = ("xf", "z", "shape")


def _forward_layer(x, w, b, grid):
    B, C, H, W = x.shape
    O, _, k, _ = w.shape
    p = k // 2
    xf = sfft.rfft2(x, grid)
    wf = sfft.rfft2(w[:, :, ::-1, ::-1], grid)
    F = xf.shape[-2] * xf.shape[-1]
    yf = _fmix(xf.reshape(B, C, F), wf.reshape(O, C, F), "forward").reshape(B, O, *xf.shape[-2:])
    z = sfft.irfft2(yf, grid)[:, :, p:p + H, p:p + W] + b[None, :, None, None]
    return xf, z.astype(x.dtype, copy=False)


def _backward_layer(xf, dz, w, grid, need_dx):
    B, O, H, W = dz.shape
    C, k = w.shape[1], w.shape[2]
    p = k // 2
    db = dz.sum(axis=(0, 2, 3))
    df = sfft.rfft2(dz, grid)
    F = df.shape[-2] * df.shape[-1]
    # correlation: irfft(X * conj(D)) at lag m sits at index m mod N
    cf = _fmix(xf.reshape(B, C, F), np.conj(df).reshape(B, O, F), "kernel").reshape(O, C, *df.shape[-2:])
    corr = sfft.irfft2(cf, grid)
    idx_r = np.arange(-p, p + 1) % grid[0]
    idx_c = np.arange(-p, p + 1) % grid[1]
    dw = corr[:, :, idx_r][:, :, :, idx_c]
    dx = None
    if need_dx:
        wf = sfft.rfft2(w, grid)
        xg = _fmix(df.reshape(B, O, F), wf.reshape(O, C, F), "input").reshape(B, C, *df.shape[-2:])
        dx = sfft.irfft2(xg, grid)[:, :, p:p + H, p:p + W]
    return dw.astype(w.dtype, copy=False), db.astype(w.dtype, copy=False), (
        None if dx is None else dx.astype(w.dtype, copy=False))


def _softplus(z):
    return np.logaddexp(0, z)


def _sigmoid(z):
    return 0.5 * (1 + np.tanh(0.5 * z))


def batch_forward(net: ConvNet, x: np.ndarray) -> np.ndarray:
    """Output activations for a (B, C, H, W) batch; FFT path, for training-time use."""
    h = np.asarray(x, net.dtype)
    for layer in net.layers:
        _, z = _forward_layer(h, layer.kernels, layer.biases, _grid(*h.shape[-2:], layer.kernel_h))
        h = np.maximum(z, 0) if layer.activation == Activation.RELU else _sigmoid(z)
    return h


def loss_and_grads(net: ConvNet, x: np.ndarray, target: np.ndarray, mask: np.ndarray | None,
                   loss: Loss) -> tuple[float, list[np.ndarray]]:
    """Masked mean loss over a batch and its gradients (same order as ``net.params()``).

    The last layer must be sigmoid. BCE is evaluated on the logits, as
    softplus(z) - t*z, which is exact and cannot overflow. MSE uses the
    sigmoid output. Both are averaged over the unmasked entries.
    """
    dt = net.dtype
    h = np.asarray(x, dt)
    target = np.asarray(target, dt)
    if mask is None:
        m = np.ones(target.shape, dt)
    else:
        m = np.broadcast_to(np.asarray(mask, dt), target.shape)
    count = max(float(m.sum()), 1.0)
    caches = []
    for layer in net.layers:
        grid = _grid(*h.shape[-2:], layer.kernel_h)
        xf, z = _forward_layer(h, layer.kernels, layer.biases, grid)
        caches.append((xf, z, grid))
        h = np.maximum(z, 0) if layer.activation == Activation.RELU else _sigmoid(z)
    if net.layers[-1].activation != Activation.SIGMOID:
        raise ValueError("the output layer must use a sigmoid")
    z = caches[-1][1]
    if loss is Loss.BCE:
        value = float(np.sum(m * (_softplus(z) - target * z)) / count)
        dz = m * (h - target) / count
    else:
        value = float(np.sum(m * (h - target) ** 2) / count)
        dz = m * 2 * (h - target) * h * (1 - h) / count
    grads: list[np.ndarray] = [None] * (2 * len(net.layers))  # type: ignore[list-item]
    dz = dz.astype(dt, copy=False)
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        xf, _, grid = caches[i]
        dw, db, dx = _backward_layer(xf, dz, layer.kernels, grid, need_dx=i > 0)
        grads[2 * i] = dw
        grads[2 * i + 1] = db
        if i > 0:
            below = caches[i - 1][1]
            if net.layers[i - 1].activation == Activation.RELU:
                dz = dx * (below > 0)
            else:
                s = _sigmoid(below)
                dz = dx * s * (1 - s)
    return value, grads
