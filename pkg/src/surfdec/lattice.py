"""Surface-code board geometry.

A board is a ``rows x cols`` grid of cells, ``(0, 0)`` at the top-left.
Data qubits sit where row and column have the same parity, Z-type plaquettes
at (odd row, even column) and X-type vertices at (even row, odd column).
Stabilizers at edges (and at defect perimeters) simply lose the factors that
would act on absent qubits.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .config import Directive, iter_directives, read_directives
from .errors import ConfigError, GeometryError, InvalidDistanceError, UnsupportedGeometryError
from .noise import PAULI_X, PAULI_Z

# (drow, dcol) of the four orthogonal neighbours, in N, S, W, E order.
NEIGHBOURS = ((-1, 0), (1, 0), (0, -1), (0, 1))


class CellRole(enum.IntEnum):
    DATA_QUBIT = 0
    X_STABILIZER = 1
    Z_STABILIZER = 2
    DISABLED = 3


class DefectKind(enum.Enum):
    ZCUT = "zcut"


@dataclass(frozen=True)
class DefectSpec:
    """Inclusive rectangle of cells switched off by a cut.

    Corners must be X-stabilizer cells so that the perimeter stabilizers keep
    commuting after their factors on the hole are dropped.
    """

    row0: int
    col0: int
    row1: int
    col1: int
    kind: DefectKind = DefectKind.ZCUT

    def cells(self) -> tuple[slice, slice]:
        return slice(self.row0, self.row1 + 1), slice(self.col0, self.col1 + 1)

    def grown(self, margin: int) -> tuple[int, int, int, int]:
        return self.row0 - margin, self.col0 - margin, self.row1 + margin, self.col1 + margin


def role_of(row: int, col: int) -> CellRole:
    """Role of a cell on an undamaged board (pure parity rule)."""
    if row % 2 == col % 2:
        return CellRole.DATA_QUBIT
    return CellRole.Z_STABILIZER if row % 2 == 1 else CellRole.X_STABILIZER


def neighbour_sum(img: np.ndarray) -> np.ndarray:
    """Sum of the four orthogonal neighbours of every cell (zero outside)."""
    a = np.asarray(img, dtype=np.int16)
    p = np.pad(a, 1)
    return p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:]


def neighbour_xor(bits: np.ndarray) -> np.ndarray:
    p = np.pad(np.asarray(bits, dtype=np.uint8), 1)
    return p[:-2, 1:-1] ^ p[2:, 1:-1] ^ p[1:-1, :-2] ^ p[1:-1, 2:]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Board:
    rows: int
    cols: int
    roles: np.ndarray
    defects: tuple[DefectSpec, ...]
    x_boundary: np.ndarray
    z_boundary: np.ndarray
    logical_x: np.ndarray
    logical_z: np.ndarray
    distance: int = field(default=0)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @cached_property
    def data_mask(self) -> np.ndarray:
        return _frozen(self.roles == CellRole.DATA_QUBIT)

    @cached_property
    def x_stab_mask(self) -> np.ndarray:
        return _frozen(self.roles == CellRole.X_STABILIZER)

    @cached_property
    def z_stab_mask(self) -> np.ndarray:
        return _frozen(self.roles == CellRole.Z_STABILIZER)

    @property
    def n_data(self) -> int:
        return int(self.data_mask.sum())

    def stabilizers(self, role: CellRole) -> list[tuple[int, int]]:
        rs, cs = np.nonzero(self.roles == role)
        return list(zip(rs.tolist(), cs.tolist()))

    def support(self, row: int, col: int) -> list[tuple[int, int]]:
        """Enabled data qubits acted on by the stabilizer at ``(row, col)``."""
        out = []
        for dr, dc in NEIGHBOURS:
            r, c = row + dr, col + dc
            if 0 <= r < self.rows and 0 <= c < self.cols and self.data_mask[r, c]:
                out.append((r, c))
        return out

    def same_geometry(self, other: "Board") -> bool:
        return self.shape == other.shape and bool(np.array_equal(self.roles, other.roles))

    def __repr__(self) -> str:
        return f"Board(d={self.distance}, {self.rows}x{self.cols}, defects={len(self.defects)})"


def _assemble(rows: int, cols: int, roles: np.ndarray, defects: tuple[DefectSpec, ...], distance: int) -> Board:
    roles = _frozen(roles.astype(np.int8, copy=True))
    xb, zb = _boundary_images(roles)
    lx, lz = _canonical_logicals(rows, cols, roles)
    return Board(rows, cols, roles, defects, _frozen(xb), _frozen(zb), _frozen(lx), _frozen(lz), distance)


def build_square_board(d: int) -> Board:
    """Distance-``d`` square patch on a ``(2d-1) x (2d-1)`` grid."""
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)) or d < 2:
        raise InvalidDistanceError(f"code distance must be an integer >= 2, got {d!r}")
    n = 2 * int(d) - 1
    r, c = np.indices((n, n))
    roles = np.where(r % 2 == c % 2, CellRole.DATA_QUBIT,
                     np.where(r % 2 == 1, CellRole.Z_STABILIZER, CellRole.X_STABILIZER))
    return _assemble(n, n, roles, (), int(d))


def _check_defect(board_rows: int, board_cols: int, spec: DefectSpec) -> None:
    if spec.kind is not DefectKind.ZCUT:
        raise GeometryError(f"unsupported defect kind {spec.kind!r}")
    if spec.row0 > spec.row1 or spec.col0 > spec.col1:
        raise GeometryError(f"empty defect rectangle {spec}")
    r0, c0, r1, c1 = spec.grown(1)
    if r0 < 1 or c0 < 1 or r1 > board_rows - 2 or c1 > board_cols - 2:
        raise GeometryError(f"defect {spec} is too close to the board edge")
    for r, c in ((spec.row0, spec.col0), (spec.row0, spec.col1), (spec.row1, spec.col0), (spec.row1, spec.col1)):
        if role_of(r, c) is not CellRole.X_STABILIZER:
            raise GeometryError(f"defect {spec} corner ({r}, {c}) is not an X-stabilizer cell")


def _overlaps(a: DefectSpec, b: DefectSpec, margin: int = 1) -> bool:
    ar0, ac0, ar1, ac1 = a.grown(margin)
    return not (ar1 < b.row0 or b.row1 < ar0 or ac1 < b.col0 or b.col1 < ac0)


def carve_defects(board: Board, defects: Sequence[DefectSpec]) -> Board:
    """Return a copy of ``board`` with every cell inside ``defects`` disabled.

    Rectangles (including their one-cell halo) must stay clear of the outer
    edge and of each other. Adjacent pairs in ``defects`` form one double-cut
    logical qubit; that pairing is kept only through list order.
    """
    defects = tuple(defects)
    if not defects:
        return board
    everything = board.defects + defects
    for spec in defects:
        _check_defect(board.rows, board.cols, spec)
    for i, a in enumerate(everything):
        for b in everything[i + 1:]:
            if _overlaps(a, b):
                raise GeometryError(f"defects {a} and {b} overlap or touch")
    roles = np.array(board.roles)
    for spec in defects:
        roles[spec.cells()] = CellRole.DISABLED
    return _assemble(board.rows, board.cols, roles, everything, board.distance)


def _boundary_images(roles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    data = roles == CellRole.DATA_QUBIT
    # an X error flips adjacent Z stabilizers; a Z error flips adjacent X stabilizers
    n_z = neighbour_sum(roles == CellRole.Z_STABILIZER)
    n_x = neighbour_sum(roles == CellRole.X_STABILIZER)
    return (data & (n_z == 1)).astype(np.uint8), (data & (n_x == 1)).astype(np.uint8)


def boundary_channels(board: Board) -> tuple[np.ndarray, np.ndarray]:
    """``(x_boundary, z_boundary)``: data qubits whose X (Z) error flips exactly one stabilizer."""
    return board.x_boundary, board.z_boundary


def _canonical_logicals(rows: int, cols: int, roles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    data = roles == CellRole.DATA_QUBIT
    lx = np.zeros((rows, cols), np.uint8)
    lz = np.zeros((rows, cols), np.uint8)
    lx[0::2, 0] = PAULI_X
    lz[0, 0::2] = PAULI_Z
    lx[~data] = 0
    lz[~data] = 0
    return lx, lz


def logical_representatives(board: Board) -> tuple[np.ndarray, np.ndarray]:
    """Canonical logical chains: X down column 0, Z along row 0.

    Raises :class:`UnsupportedGeometryError` if the chains fail to commute
    with every enabled stabilizer or fail to anticommute with each other.
    """
    lx, lz = board.logical_x, board.logical_z
    data = board.data_mask
    if not (data[0::2, 0].all() and data[0, 0::2].all()):
        raise UnsupportedGeometryError("canonical logical chains cross disabled cells")
    if (neighbour_xor(lx & 1) & board.z_stab_mask).any() or (neighbour_xor(lz >> 1) & board.x_stab_mask).any():
        raise UnsupportedGeometryError("canonical logical chains do not commute with the stabilizers")
    overlap = int(((lx & 1) & (lz >> 1)).sum() + ((lx >> 1) & (lz & 1)).sum())
    if overlap % 2 != 1:
        raise UnsupportedGeometryError("canonical logical chains commute with each other")
    return lx, lz


def random_double_zcut(board: Board, defect_distance: int, rng: np.random.Generator) -> list[DefectSpec]:
    """Two square holes forming a double Z-cut qubit, placed uniformly at random.

    Holes have side ``2*(defect_distance//4) + 1`` cells and sit
    ``2*defect_distance`` cells apart (corner to corner along the pair axis),
    either side by side or one above the other.
    """
    if defect_distance < 2:
        raise GeometryError(f"defect distance must be >= 2, got {defect_distance}")
    side = 2 * (defect_distance // 4) + 1
    step = side - 1 + 2 * defect_distance
    horizontal = bool(rng.integers(2))
    span_r = side - 1 if horizontal else step + side - 1
    span_c = step + side - 1 if horizontal else side - 1
    # top-left corner: even row in [2, rows-3-span_r], odd col in [3, cols-4-span_c]
    rows_ok = list(range(2, board.rows - 3 - span_r + 1, 2))
    cols_ok = list(range(3, board.cols - 4 - span_c + 1, 2))
    if not rows_ok or not cols_ok:
        raise GeometryError(f"distance-{defect_distance} double cut does not fit on {board!r}")
    r0 = rows_ok[int(rng.integers(len(rows_ok)))]
    c0 = cols_ok[int(rng.integers(len(cols_ok)))]
    a = DefectSpec(r0, c0, r0 + side - 1, c0 + side - 1)
    if horizontal:
        b = DefectSpec(r0, c0 + step, r0 + side - 1, c0 + step + side - 1)
    else:
        b = DefectSpec(r0 + step, c0, r0 + step + side - 1, c0 + side - 1)
    return [a, b]


# -- board-spec text format ---------------------------------------------------------

def _board_from_directives(directives: Iterable[Directive], source: str) -> Board:
    directives = list(directives)
    if not directives or directives[0].key != "d":
        line = directives[0].line if directives else None
        raise ConfigError("board spec must start with 'd <int>'", source, line)
    first = directives[0]
    first.arity(1)
    d = first.convert(0, int, "distance")
    try:
        board = build_square_board(d)
    except InvalidDistanceError as exc:
        raise first.error(str(exc)) from None
    specs = []
    for item in directives[1:]:
        if item.key != "defect":
            raise item.error(f"unknown directive '{item.key}'")
        if len(item.args) != 5 or item.args[0].lower() != "zcut":
            raise item.error("expected 'defect zcut <row0> <col0> <row1> <col1>'")
        coords = [item.convert(i, int, "coordinate") for i in range(1, 5)]
        specs.append((item, DefectSpec(*coords)))
    for item, spec in specs:
        try:
            board = carve_defects(board, [spec])
        except GeometryError as exc:
            raise item.error(str(exc)) from None
    return board


def parse_board_spec(text: str, source: str = "<string>") -> Board:
    return _board_from_directives(iter_directives(text, source), source)


def load_board(path: str | Path) -> Board:
    return _board_from_directives(read_directives(path), str(path))


def format_board_spec(board: Board) -> str:
    lines = [f"d {board.distance}"]
    lines += [f"defect zcut {s.row0} {s.col0} {s.row1} {s.col1}" for s in board.defects]
    return "\n".join(lines) + "\n"
