import numpy as np
import pytest

from oracles import brute_syndrome, in_stabilizer_group
from surfdec.lattice import build_square_board, logical_representatives
from surfdec.noise import PAULI_X, PAULI_Y, PAULI_Z, compose, sample_depolarizing, weight
from surfdec.syndrome import extract_syndrome
from surfdec.targets import (canonicalize_square_patterns, canonicalize_target, remove_weight4_stabilizers,
                             reshape_diagonals, toggle_majority_stabilizers)

B5 = build_square_board(5)
B7 = build_square_board(7)
VERTEX = (4, 3)     # interior X-type generator on d=5
PLAQUETTE = (3, 4)  # interior Z-type generator on d=5

OPS = [remove_weight4_stabilizers, toggle_majority_stabilizers, reshape_diagonals,
       canonicalize_square_patterns, canonicalize_target]


def frame(board, **paulis):
    f = np.zeros(board.shape, np.uint8)
    for pauli, cells in paulis.items():
        for r, c in cells:
            f[r, c] = {"X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}[pauli]
    return f


def around(r, c, *which):
    off = {"N": (-1, 0), "S": (1, 0), "W": (0, -1), "E": (0, 1)}
    return [(r + off[w][0], c + off[w][1]) for w in which]


def cells(f):
    return sorted(map(tuple, np.argwhere(f).tolist()))


def test_full_vertex_support_removed():
    f = frame(B5, X=around(*VERTEX, "N", "S", "W", "E"))
    assert weight(remove_weight4_stabilizers(B5, f)) == 0


def test_nothing_contained_is_unchanged():
    f = frame(B5, X=around(*VERTEX, "N", "S", "W"))
    assert np.array_equal(remove_weight4_stabilizers(B5, f), f)


def test_plaquette_removed_extra_x_survives():
    f = frame(B5, Z=around(*PLAQUETTE, "N", "S", "W", "E"), X=[(0, 0)])
    out = remove_weight4_stabilizers(B5, f)
    assert cells(out) == [(0, 0)] and out[0, 0] == PAULI_X
    assert extract_syndrome(B5, out) == extract_syndrome(B5, f)


def test_y_counts_for_both_types():
    f = frame(B5, Y=around(*PLAQUETTE, "N", "S", "W", "E"))
    out = remove_weight4_stabilizers(B5, f)
    # Z parts form the plaquette and go away, X parts stay
    assert set(out[out > 0].tolist()) == {PAULI_X}
    assert extract_syndrome(B5, out) == extract_syndrome(B5, f)


def test_majority_three_of_four():
    f = frame(B5, Z=around(*PLAQUETTE, "N", "S", "W"))
    out = toggle_majority_stabilizers(B5, f)
    assert cells(out) == around(*PLAQUETTE, "E") and out[PLAQUETTE[0], PLAQUETTE[1] + 1] == PAULI_Z


def test_majority_tie_unchanged():
    f = frame(B5, Z=around(*PLAQUETTE, "N", "S"))
    assert np.array_equal(toggle_majority_stabilizers(B5, f), f)


def test_l_shaped_cluster_shrinks():
    f = frame(B5, X=around(*VERTEX, "N", "W", "E"))
    out = toggle_majority_stabilizers(B5, f)
    assert weight(out) == 1
    assert extract_syndrome(B5, out) == extract_syndrome(B5, f)


def test_majority_on_edge_generator():
    # (0, 3) is a weight-3 vertex on the top edge
    f = frame(B5, X=[(0, 2), (1, 3)])
    out = toggle_majority_stabilizers(B5, f)
    assert cells(out) == [(0, 4)]


@pytest.mark.parametrize("gen,pauli", [(VERTEX, "X"), (PLAQUETTE, "Z")])
def test_diagonal_bends_pick_vertical_first(gen, pauli):
    r, c = gen
    for pair, canonical in ((("N", "E"), ("S", "W")), (("N", "W"), ("S", "E"))):
        top = frame(B5, **{pauli: around(r, c, *pair)})
        bottom = frame(B5, **{pauli: around(r, c, *canonical)})
        # both bends join the same two detectors
        assert extract_syndrome(B5, top) == extract_syndrome(B5, bottom)
        assert np.array_equal(reshape_diagonals(B5, top), bottom)
        assert np.array_equal(reshape_diagonals(B5, bottom), bottom)
        assert np.array_equal(canonicalize_target(B5, top), bottom)


def test_diagonal_absent_is_unchanged():
    f = frame(B5, X=[(0, 0), (4, 4)])
    assert np.array_equal(reshape_diagonals(B5, f), f)


def _square_corners(s, r, c):
    corners = {(r + dr, c + dc) for dr in (-1, 1) for dc in (-1, 1)}
    return set(map(tuple, np.argwhere(s.z_plane).tolist())) == corners


def test_square_patterns_become_horizontal():
    # every weight-2 X frame on d=5 whose syndrome is a minimal 4-corner square
    data = [tuple(q) for q in np.argwhere(B5.data_mask).tolist()]
    seen = 0
    for i, a in enumerate(data):
        for b in data[i + 1:]:
            f = frame(B5, X=[a, b])
            s = extract_syndrome(B5, f)
            if s.z_plane.sum() != 4:
                continue
            for (r, c) in B5.stabilizers(1):
                if 0 < r < 8 and 0 < c < 8 and _square_corners(s, r, c):
                    out = canonicalize_square_patterns(B5, f)
                    assert cells(out) == sorted(around(r, c, "N", "S"))
                    assert extract_syndrome(B5, out) == s
                    seen += 1
    assert seen == 24  # 12 weight-4 vertices, each with a vertical and a horizontal pair


def test_no_square_pattern_unchanged():
    f = frame(B5, X=[(0, 0), (8, 8)])
    assert np.array_equal(canonicalize_square_patterns(B5, f), f)
    # parallel vertical pair whose corners are masked by a third error is left alone
    g = frame(B5, X=around(*VERTEX, "W", "E") + [(VERTEX[0] - 1, VERTEX[1] - 2)])
    assert np.array_equal(canonicalize_square_patterns(B5, g), g)


def test_canonical_examples():
    single = frame(B7, X=[(6, 6)])
    assert np.array_equal(canonicalize_target(B7, single), single)
    plaquette = frame(B7, Z=around(5, 6, "N", "S", "W", "E"))
    assert weight(canonicalize_target(B7, plaquette)) == 0


@pytest.mark.parametrize("op", OPS)
def test_every_rule_is_sound_on_random_frames(op):
    lx, lz = logical_representatives(B7)
    for seed in range(150):
        f = sample_depolarizing(B7, 0.08, seed)
        out = op(B7, f)
        assert extract_syndrome(B7, out) == extract_syndrome(B7, f)
        bx, bz = brute_syndrome(B7, compose(f, out))
        assert not bx.any() and not bz.any()
        assert in_stabilizer_group(B7, compose(f, out), lx, lz)
        assert weight(out) <= weight(f)


def test_canonical_is_idempotent():
    b = build_square_board(9)
    for seed in range(200):
        f = sample_depolarizing(b, 0.1, seed)
        once = canonicalize_target(b, f)
        assert np.array_equal(canonicalize_target(b, once), once)


def test_divergence_cap():
    from surfdec.errors import CanonicalizationDivergenceError
    f = frame(B5, X=around(*VERTEX, "N", "E"))
    with pytest.raises(CanonicalizationDivergenceError):
        canonicalize_target(B5, f, max_sweeps=1)
