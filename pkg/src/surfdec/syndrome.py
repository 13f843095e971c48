"""Stabilizer syndromes and the decoder's 4-channel input image."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .lattice import Board, neighbour_xor
from .noise import x_bits, z_bits


@dataclass(frozen=True, eq=False)
class SyndromeImage:
    """Flip indicators (1 = stabilizer measured -1) for both stabilizer types.

    ``x_plane`` is nonzero only at X-stabilizer cells and ``z_plane`` only at
    Z-stabilizer cells.
    """

    x_plane: np.ndarray
    z_plane: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.x_plane.shape

    def count(self) -> int:
        return int(np.count_nonzero(self.x_plane)) + int(np.count_nonzero(self.z_plane))

    def is_empty(self) -> bool:
        return not (self.x_plane.any() or self.z_plane.any())

    def __xor__(self, other: "SyndromeImage") -> "SyndromeImage":
        if self.shape != other.shape:
            raise ShapeError(f"syndrome shapes differ: {self.shape} vs {other.shape}")
        return SyndromeImage(self.x_plane ^ other.x_plane, self.z_plane ^ other.z_plane)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SyndromeImage):
            return NotImplemented
        return bool(np.array_equal(self.x_plane, other.x_plane) and np.array_equal(self.z_plane, other.z_plane))

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def empty(cls, board: Board) -> "SyndromeImage":
        return cls(np.zeros(board.shape, np.uint8), np.zeros(board.shape, np.uint8))


def extract_syndrome(board: Board, frame: np.ndarray) -> SyndromeImage:
    """Flip every enabled stabilizer that anticommutes with ``frame``.

    X components flip neighbouring plaquettes, Z components neighbouring
    vertices; a Y does both. Disabled cells never report a flip.
    """
    if frame.shape != board.shape:
        raise ShapeError(f"frame shape {frame.shape} does not match board {board.shape}")
    frame = np.where(board.data_mask, frame, 0).astype(np.uint8)
    z_plane = neighbour_xor(x_bits(frame)) & board.z_stab_mask
    x_plane = neighbour_xor(z_bits(frame)) & board.x_stab_mask
    return SyndromeImage(x_plane.astype(np.uint8), z_plane.astype(np.uint8))


def assemble_input(board: Board, syn: SyndromeImage) -> np.ndarray:
    """Stack ``[x syndrome, z syndrome, x boundary, z boundary]`` as float32."""
    if syn.shape != board.shape:
        raise ShapeError(f"syndrome shape {syn.shape} does not match board {board.shape}")
    return np.stack([syn.x_plane, syn.z_plane, board.x_boundary, board.z_boundary]).astype(np.float32)


def format_syndrome(syn: SyndromeImage) -> str:
    flipped = (syn.x_plane | syn.z_plane).tolist()
    return "\n".join("".join("*" if v else "." for v in row) for row in flipped) + "\n"


def parse_syndrome(text: str, board: Board) -> SyndromeImage:
    """Inverse of :func:`format_syndrome`; the board decides which plane a ``*`` belongs to."""
    rows = [line.strip() for line in text.splitlines() if line.strip()]
    if len(rows) != board.rows or any(len(r) != board.cols or set(r) - {".", "*"} for r in rows):
        raise ShapeError(f"syndrome text must be a {board.rows}x{board.cols} grid of '.' and '*'")
    flips = np.array([[ch == "*" for ch in row] for row in rows])
    if (flips & ~(board.x_stab_mask | board.z_stab_mask)).any():
        raise ShapeError("syndrome marks a flip on a cell that is not an enabled stabilizer")
    return SyndromeImage((flips & board.x_stab_mask).astype(np.uint8), (flips & board.z_stab_mask).astype(np.uint8))
