"""SVG drawings of a board with an error frame and its syndrome."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .errors import ShapeError
from .lattice import Board, CellRole
from .syndrome import SyndromeImage

COLOURS = {
    "data": "#9e9e9e",
    "X": "#d62728",
    "Y": "#d81b9c",
    "Z": "#1f4fd6",
    "stab_plus": "#e4f2b8",
    "stab_minus": "#8fd400",
    "disabled": "#ffffff",
}

LEGEND = (
    ("data", "data qubit (I)"),
    ("X", "X error"),
    ("Y", "Y error"),
    ("Z", "Z error"),
    ("stab_plus", "stabilizer +1"),
    ("stab_minus", "stabilizer -1"),
)


def render_svg(board: Board, frame: np.ndarray | None = None, syn: SyndromeImage | None = None,
               cell: int = 16, title: str | None = None) -> str:
    """Data qubits are circles, vertex stabilizers diamonds, plaquettes squares."""
    if frame is None:
        frame = np.zeros(board.shape, np.uint8)
    if syn is None:
        syn = SyndromeImage.empty(board)
    if frame.shape != board.shape or syn.shape != board.shape:
        raise ShapeError("frame and syndrome must match the board shape")
    flipped = (syn.x_plane | syn.z_plane).astype(bool)
    pad = cell
    width = board.cols * cell + 2 * pad
    legend_h = (len(LEGEND) + 1) * cell
    height = board.rows * cell + 2 * pad + legend_h
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    if title:
        out.append(f'<title>{escape(title)}</title>')
    half = cell / 2
    r_data = cell * 0.32
    for r in range(board.rows):
        for c in range(board.cols):
            cx, cy = pad + c * cell + half, pad + r * cell + half
            role = board.roles[r, c]
            if role == CellRole.DATA_QUBIT:
                key = "data" if frame[r, c] == 0 else ".XZY"[frame[r, c]]
                out.append(f'<circle cx="{cx:g}" cy="{cy:g}" r="{r_data:g}" fill="{COLOURS[key]}"/>')
            elif role in (CellRole.X_STABILIZER, CellRole.Z_STABILIZER):
                fill = COLOURS["stab_minus" if flipped[r, c] else "stab_plus"]
                s = cell * 0.4
                if role == CellRole.X_STABILIZER:
                    pts = f"{cx:g},{cy - s:g} {cx + s:g},{cy:g} {cx:g},{cy + s:g} {cx - s:g},{cy:g}"
                    out.append(f'<polygon points="{pts}" fill="{fill}" stroke="#556b2f" stroke-width="0.5"/>')
                else:
                    out.append(f'<rect x="{cx - s:g}" y="{cy - s:g}" width="{2 * s:g}" height="{2 * s:g}" '
                               f'fill="{fill}" stroke="#556b2f" stroke-width="0.5"/>')
    y0 = pad * 2 + board.rows * cell
    for i, (key, label) in enumerate(LEGEND):
        y = y0 + i * cell
        out.append(f'<rect x="{pad}" y="{y}" width="{cell * 0.7:g}" height="{cell * 0.7:g}" '
                   f'fill="{COLOURS[key]}" stroke="#333333" stroke-width="0.5"/>')
        out.append(f'<text x="{pad + cell}" y="{y + cell * 0.6:g}" font-family="sans-serif" '
                   f'font-size="{cell * 0.6:g}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
