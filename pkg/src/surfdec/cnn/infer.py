"""Inference: same-padded convolutions and the thresholded correction rule.

The kernel walks every output cell with the same loop order, so each value is
produced by the same sequence of float32 operations wherever it sits on the
board. That makes the output exactly translation-equivariant and exactly
blind to inputs outside the receptive field, and the amount of work depends
only on the board size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..errors import ShapeError
from ..lattice import Board
from ..noise import compose, from_bits
from ..syndrome import SyndromeImage, assemble_input, extract_syndrome
from .net import Activation, ConvNet


@njit(cache=True)
def _conv_same(x, w, b, act):
    """One layer; returns (output, multiply-accumulate count)."""
    C, H, W = x.shape
    O, _, kh, kw = w.shape
    ph, pw = kh // 2, kw // 2
    xp = np.zeros((C, H + 2 * ph, W + 2 * pw), x.dtype)
    xp[:, ph:ph + H, pw:pw + W] = x
    out = np.empty((O, H, W), x.dtype)
    acc = np.empty(W, x.dtype)
    macs = 0
    for o in range(O):
        for r in range(H):
            acc[:] = b[o]
            for i in range(C):
                for u in range(kh):
                    row = xp[i, r + u]
                    for v in range(kw):
                        wv = w[o, i, u, v]
                        for c in range(W):
                            acc[c] += wv * row[c + v]
                        macs += W
            if act == 0:
                for c in range(W):
                    out[o, r, c] = acc[c] if acc[c] > 0 else 0
            else:
                for c in range(W):
                    out[o, r, c] = 1 / (1 + np.exp(-acc[c]))
    return out, macs


@dataclass
class OpCounter:
    """Accumulates multiply-accumulate operations performed by :func:`forward`."""

    macs: int = 0
    calls: int = 0


def forward(net: ConvNet, x: np.ndarray, counter: OpCounter | None = None) -> np.ndarray:
    """(in_channels, H, W) -> (out_channels, H, W) probabilities/activations."""
    x = np.asarray(x)
    if x.ndim != 3 or x.shape[0] != net.in_channels:
        raise ShapeError(f"input must have shape ({net.in_channels}, H, W), got {x.shape}")
    dt = net.dtype
    h = np.ascontiguousarray(x, dtype=dt)
    total = 0
    for layer in net.layers:
        h, macs = _conv_same(h, layer.kernels, layer.biases, int(layer.activation))
        total += macs
    if counter is not None:
        counter.macs += int(total)
        counter.calls += 1
    return h


def probabilities_to_frame(board: Board, probs: np.ndarray) -> np.ndarray:
    """X where channel 0 > 0.5, Z where channel 1 > 0.5, Y where both; data qubits only."""
    if probs.shape != (2, *board.shape):
        raise ShapeError(f"probability image must have shape (2, {board.rows}, {board.cols}), got {probs.shape}")
    frame = from_bits(probs[0] > 0.5, probs[1] > 0.5)
    frame[~board.data_mask] = 0
    return frame


def decode_pass(net: ConvNet, board: Board, syn: SyndromeImage, counter: OpCounter | None = None) -> np.ndarray:
    return probabilities_to_frame(board, forward(net, assemble_input(board, syn), counter))


def multi_pass_decode(net: ConvNet, board: Board, syn: SyndromeImage, n_passes: int,
                      counter: OpCounter | None = None) -> tuple[np.ndarray, SyndromeImage]:
    """Repeatedly decode the residual syndrome; stops early once it is empty."""
    if n_passes < 1:
        raise ValueError(f"n_passes must be >= 1, got {n_passes}")
    total = np.zeros(board.shape, np.uint8)
    residual = syn
    for _ in range(n_passes):
        if residual.is_empty():
            break
        total = compose(total, decode_pass(net, board, residual, counter))
        residual = syn ^ extract_syndrome(board, total)
    return total, residual
