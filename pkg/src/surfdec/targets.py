"""Training labels: rewrite a sampled error into a canonical equivalent.

Each Pauli component is handled on its own. X errors are rewritten with the
vertex (X-type) generators and checked against plaquette flips; Z errors use
the plaquette generators and vertex flips. A Y contributes to both. A move
is skipped when it would raise the number of non-identity qubits, which can
otherwise happen when a Y is split between the two components.

Rules, applied in this order and repeated until nothing moves:

1. drop generators whose full weight-4 support is present;
2. toggle generators that hold strictly more than half of their support;
3. rewrite a diagonal two-qubit bend around a weight-4 generator so that it
   starts with the vertical step from the upper endpoint;
4. rewrite two parallel vertical chains closing a minimal square of four
   flips into the two horizontal chains.

Rules 1 and 2 lower the component weight, rule 3 moves weight downward and rule 4 turns
vertical segments into horizontal ones, so the sweep always terminates.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import CanonicalizationDivergenceError, ShapeError
from .lattice import Board, neighbour_xor
from .noise import from_bits, x_bits, z_bits

MAX_SWEEPS = 100

# neighbour order N, S, W, E
_DR = (-1, 1, 0, 0)
_DC = (0, 0, -1, 1)


@njit(cache=True)
def _support(e, data, r, c, out_r, out_c):
    """Collect the support of the generator at (r, c); returns (size, count set)."""
    rows, cols = e.shape
    size = 0
    count = 0
    for k in range(4):
        qr, qc = r + _DR[k], c + _DC[k]
        if 0 <= qr < rows and 0 <= qc < cols and data[qr, qc]:
            out_r[size] = qr
            out_c[size] = qc
            size += 1
            count += e[qr, qc]
    return size, count


@njit(cache=True)
def _toggle(e, out_r, out_c, size):
    for k in range(size):
        e[out_r[k], out_c[k]] ^= 1


@njit(cache=True)
def _delta(e, o, out_r, out_c, size):
    """Change in the number of non-identity qubits if the listed qubits of ``e`` flip."""
    d = 0
    for k in range(size):
        r, c = out_r[k], out_c[k]
        if not o[r, c]:
            d += 1 - 2 * e[r, c]
    return d


@njit(cache=True)
def _sweep_full(e, o, gen, data):
    rows, cols = e.shape
    qr = np.empty(4, np.int64)
    qc = np.empty(4, np.int64)
    changed = False
    again = True
    while again:
        again = False
        for r in range(rows):
            for c in range(cols):
                if gen[r, c]:
                    size, count = _support(e, data, r, c, qr, qc)
                    if size == 4 and count == 4:
                        _toggle(e, qr, qc, size)
                        again = True
                        changed = True
    return changed


@njit(cache=True)
def _sweep_majority(e, o, gen, data):
    rows, cols = e.shape
    qr = np.empty(4, np.int64)
    qc = np.empty(4, np.int64)
    changed = False
    again = True
    while again:
        again = False
        for r in range(rows):
            for c in range(cols):
                if gen[r, c]:
                    size, count = _support(e, data, r, c, qr, qc)
                    if 2 * count > size and _delta(e, o, qr, qc, size) <= 0:
                        _toggle(e, qr, qc, size)
                        again = True
                        changed = True
    return changed


@njit(cache=True)
def _interior_bits(e, data, r, c):
    """(n, s, w, e) bits of a weight-4 generator, or -1 when it is not weight 4."""
    rows, cols = e.shape
    if r < 1 or c < 1 or r >= rows - 1 or c >= cols - 1:
        return -1, 0, 0, 0
    if not (data[r - 1, c] and data[r + 1, c] and data[r, c - 1] and data[r, c + 1]):
        return -1, 0, 0, 0
    return e[r - 1, c], e[r + 1, c], e[r, c - 1], e[r, c + 1]


@njit(cache=True)
def _sweep_diagonal(e, o, gen, data):
    rows, cols = e.shape
    qr = np.array([-1, 1, 0, 0])
    qc = np.array([0, 0, -1, 1])
    changed = False
    again = True
    while again:
        again = False
        for r in range(rows):
            for c in range(cols):
                if not gen[r, c]:
                    continue
                n, s, w, ea = _interior_bits(e, data, r, c)
                # the bend through the top qubit is swapped for its complement,
                # which goes down first and then across
                if n == 1 and s == 0 and w + ea == 1 and _delta(e, o, qr + r, qc + c, 4) <= 0:
                    _toggle(e, qr + r, qc + c, 4)
                    again = True
                    changed = True
    return changed


@njit(cache=True)
def _sweep_square(e, o, gen, data, det, flips):
    rows, cols = e.shape
    qr = np.array([-1, 1, 0, 0])
    qc = np.array([0, 0, -1, 1])
    changed = False
    again = True
    while again:
        again = False
        for r in range(rows):
            for c in range(cols):
                if not gen[r, c]:
                    continue
                n, s, w, ea = _interior_bits(e, data, r, c)
                if n != 0 or s != 0 or w != 1 or ea != 1:
                    continue
                corners = 0
                for dr in (-1, 1):
                    for dc in (-1, 1):
                        if det[r + dr, c + dc] and flips[r + dr, c + dc]:
                            corners += 1
                if corners == 4 and _delta(e, o, qr + r, qc + c, 4) <= 0:
                    _toggle(e, qr + r, qc + c, 4)
                    again = True
                    changed = True
    return changed


@njit(cache=True)
def _canonical(ex, ez, gx, gz, data, dx, dz, fx, fz, cap):
    # ex is rewritten with the vertex generators (gx) against plaquette flips
    # (dx, fx); ez with the plaquettes against vertex flips
    for sweep in range(cap):
        moved = _sweep_full(ex, ez, gx, data)
        moved |= _sweep_full(ez, ex, gz, data)
        moved |= _sweep_majority(ex, ez, gx, data)
        moved |= _sweep_majority(ez, ex, gz, data)
        moved |= _sweep_diagonal(ex, ez, gx, data)
        moved |= _sweep_diagonal(ez, ex, gz, data)
        moved |= _sweep_square(ex, ez, gx, data, dx, fx)
        moved |= _sweep_square(ez, ex, gz, data, dz, fz)
        if not moved:
            return sweep + 1
    return -1


def _u8(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.uint8)


def _check(board: Board, frame: np.ndarray) -> np.ndarray:
    frame = np.asarray(frame)
    if frame.shape != board.shape:
        raise ShapeError(f"frame shape {frame.shape} does not match board {board.shape}")
    return np.where(board.data_mask, frame, 0).astype(np.uint8)


def _apply(board: Board, frame: np.ndarray, rule) -> np.ndarray:
    """Unpack ``frame`` into component planes, let ``rule`` edit them in place, repack."""
    frame = _check(board, frame)
    data = _u8(board.data_mask)
    ex, ez = _u8(x_bits(frame)), _u8(z_bits(frame))
    gx, gz = _u8(board.x_stab_mask), _u8(board.z_stab_mask)
    fx = _u8(neighbour_xor(ex) & board.z_stab_mask)
    fz = _u8(neighbour_xor(ez) & board.x_stab_mask)
    rule(ex, ez, gx, gz, data, gz, gx, fx, fz)
    return from_bits(ex, ez)


def remove_weight4_stabilizers(board: Board, frame: np.ndarray) -> np.ndarray:
    def rule(ex, ez, gx, gz, data, *_):
        while _sweep_full(ex, ez, gx, data) | _sweep_full(ez, ex, gz, data):
            pass

    return _apply(board, frame, rule)


def toggle_majority_stabilizers(board: Board, frame: np.ndarray) -> np.ndarray:
    def rule(ex, ez, gx, gz, data, *_):
        while _sweep_majority(ex, ez, gx, data) | _sweep_majority(ez, ex, gz, data):
            pass

    return _apply(board, frame, rule)


def reshape_diagonals(board: Board, frame: np.ndarray) -> np.ndarray:
    def rule(ex, ez, gx, gz, data, *_):
        while _sweep_diagonal(ex, ez, gx, data) | _sweep_diagonal(ez, ex, gz, data):
            pass

    return _apply(board, frame, rule)


def canonicalize_square_patterns(board: Board, frame: np.ndarray) -> np.ndarray:
    def rule(ex, ez, gx, gz, data, dx, dz, fx, fz):
        while _sweep_square(ex, ez, gx, data, dx, fx) | _sweep_square(ez, ex, gz, data, dz, fz):
            pass

    return _apply(board, frame, rule)


def canonicalize_target(board: Board, frame: np.ndarray, max_sweeps: int = MAX_SWEEPS) -> np.ndarray:
    """Run all four rules in order until a full sweep leaves the frame unchanged.

    Raises CanonicalizationDivergenceError if ``max_sweeps`` is reached.
    """

    def rule(*planes):
        if _canonical(*planes, max_sweeps) < 0:
            raise CanonicalizationDivergenceError(f"no fixpoint after {max_sweeps} sweeps")

    return _apply(board, frame, rule)
