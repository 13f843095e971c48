"""Slow, obviously-correct reference implementations used by the tests."""

from __future__ import annotations

import itertools

import numpy as np

from surfdec.lattice import Board, CellRole


def generator_frames(board: Board):
    """Yield (row, col, role, operator frame) for every enabled stabilizer generator."""
    for (r, c), role in np.ndenumerate(board.roles):
        if role not in (CellRole.X_STABILIZER, CellRole.Z_STABILIZER):
            continue
        op = np.zeros(board.shape, np.uint8)
        pauli = 1 if role == CellRole.X_STABILIZER else 2
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < board.rows and 0 <= cc < board.cols and board.roles[rr, cc] == CellRole.DATA_QUBIT:
                op[rr, cc] = pauli
        yield r, c, CellRole(role), op


def anticommutes(a: np.ndarray, b: np.ndarray) -> int:
    """Symplectic form computed qubit by qubit, without bit tricks."""
    count = 0
    for p, q in zip(a.ravel().tolist(), b.ravel().tolist()):
        if p and q and p != q:
            count += 1
    return count % 2


def brute_syndrome(board: Board, frame: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(x_plane, z_plane) by counting anticommuting qubits over each generator's full support."""
    x_plane = np.zeros(board.shape, np.uint8)
    z_plane = np.zeros(board.shape, np.uint8)
    masked = np.where(board.roles == CellRole.DATA_QUBIT, frame, 0)
    for r, c, role, op in generator_frames(board):
        bit = anticommutes(op, masked)
        if role == CellRole.X_STABILIZER:
            x_plane[r, c] = bit
        else:
            z_plane[r, c] = bit
    return x_plane, z_plane


def data_cells(board: Board) -> list[tuple[int, int]]:
    return [tuple(map(int, rc)) for rc in np.argwhere(board.roles == CellRole.DATA_QUBIT)]


def low_weight_frames(board: Board, max_weight: int):
    cells = data_cells(board)
    yield np.zeros(board.shape, np.uint8)
    for w in range(1, max_weight + 1):
        for where in itertools.combinations(cells, w):
            for paulis in itertools.product((1, 2, 3), repeat=w):
                f = np.zeros(board.shape, np.uint8)
                for (r, c), p in zip(where, paulis):
                    f[r, c] = p
                yield f


def in_stabilizer_group(board: Board, residual: np.ndarray, lx: np.ndarray, lz: np.ndarray) -> bool:
    sx, sz = brute_syndrome(board, residual)
    return not sx.any() and not sz.any() and not anticommutes(residual, lx) and not anticommutes(residual, lz)


def central_difference(fn, params, eps=1e-3):
    """Numerical gradient of scalar fn() with respect to every entry of every array in params."""
    out = []
    for arr in params:
        g = np.zeros_like(arr)
        for idx in np.ndindex(arr.shape):
            old = arr[idx]
            arr[idx] = old + eps
            up = fn()
            arr[idx] = old - eps
            down = fn()
            arr[idx] = old
            g[idx] = (up - down) / (2 * eps)
        out.append(g)
    return out


def naive_conv_same(x, kernels, biases):
    """Direct zero-padded cross-correlation, float64, one output cell at a time."""
    C, H, W = x.shape
    O, _, kh, kw = kernels.shape
    ph, pw = kh // 2, kw // 2
    out = np.zeros((O, H, W))
    for o in range(O):
        for r in range(H):
            for c in range(W):
                s = float(biases[o])
                for i in range(C):
                    for u in range(kh):
                        for v in range(kw):
                            rr, cc = r + u - ph, c + v - pw
                            if 0 <= rr < H and 0 <= cc < W:
                                s += float(kernels[o, i, u, v]) * float(x[i, rr, cc])
                out[o, r, c] = s
    return out
