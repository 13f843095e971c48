"""Pauli frames and depolarizing noise.

A Pauli frame is a ``uint8`` image the size of the board. Bit 0 holds the X
component and bit 1 the Z component, so I=0, X=1, Z=2, Y=3 and composing two
frames (modulo global phase) is a bitwise XOR.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from .errors import InvalidProbabilityError, ShapeError

if TYPE_CHECKING:
    from .lattice import Board

PAULI_I = 0
PAULI_X = 1
PAULI_Z = 2
PAULI_Y = 3

SYMBOLS = ".XZY"


def identity_frame(board: "Board") -> np.ndarray:
    return np.zeros(board.shape, dtype=np.uint8)


def derive_seed(master_seed: int, *indices: int) -> int:
    """64-bit sub-seed for trial ``indices`` under ``master_seed``.

    Uses numpy's SeedSequence hashing, so the value depends only on the
    arguments and never on scheduling order.
    """
    ss = np.random.SeedSequence([int(master_seed) & (2**64 - 1), *(int(i) for i in indices)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def sample_depolarizing(board: "Board", p: float, seed: int | np.random.Generator) -> np.ndarray:
    """Apply X, Y or Z with probability p/3 each to every enabled data qubit."""
    p = float(p)
    if not 0.0 <= p <= 1.0 or np.isnan(p):
        raise InvalidProbabilityError(f"error probability must lie in [0, 1], got {p}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    u = rng.random(board.shape)
    frame = np.zeros(board.shape, dtype=np.uint8)
    frame[u < p] = PAULI_Z
    frame[u < 2 * p / 3] = PAULI_Y
    frame[u < p / 3] = PAULI_X
    frame[~board.data_mask] = PAULI_I
    return frame


def compose(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape != b.shape:
        raise ShapeError(f"cannot compose frames of shape {a.shape} and {b.shape}")
    return np.bitwise_xor(a, b)


def weight(frame: np.ndarray) -> int:
    return int(np.count_nonzero(frame))


def x_bits(frame: np.ndarray) -> np.ndarray:
    return frame & 1


def z_bits(frame: np.ndarray) -> np.ndarray:
    return (frame >> 1) & 1


def from_bits(xb: np.ndarray, zb: np.ndarray) -> np.ndarray:
    return (xb.astype(np.uint8) & 1) | ((zb.astype(np.uint8) & 1) << 1)


def symplectic_product(a: np.ndarray, b: np.ndarray) -> int:
    """1 if the two Pauli strings anticommute, else 0."""
    return int((np.count_nonzero(x_bits(a) & z_bits(b)) + np.count_nonzero(z_bits(a) & x_bits(b))) % 2)


def format_frame(frame: np.ndarray) -> str:
    return "\n".join("".join(SYMBOLS[v] for v in row) for row in frame.tolist()) + "\n"


def parse_frame(text: str, shape: tuple[int, int] | None = None) -> np.ndarray:
    rows = [line.strip() for line in text.splitlines() if line.strip()]
    try:
        frame = np.array([[SYMBOLS.index(ch) for ch in row] for row in rows], dtype=np.uint8)
    except ValueError:
        raise ShapeError("frame text must be a rectangular grid of '.', 'X', 'Y', 'Z'") from None
    if frame.ndim != 2 or (shape is not None and frame.shape != tuple(shape)):
        raise ShapeError(f"frame text has shape {frame.shape}, expected {shape}")
    return frame
