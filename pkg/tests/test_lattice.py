import numpy as np
import pytest

from oracles import anticommutes, brute_syndrome, generator_frames
from surfdec.errors import ConfigError, GeometryError, InvalidDistanceError, UnsupportedGeometryError
from surfdec.lattice import (CellRole, DefectSpec, boundary_channels, build_square_board, carve_defects,
                             format_board_spec, logical_representatives, parse_board_spec, random_double_zcut,
                             role_of)
from surfdec.noise import symplectic_product


def _counts(board):
    roles = board.roles
    return tuple(int((roles == r).sum()) for r in (CellRole.DATA_QUBIT, CellRole.X_STABILIZER, CellRole.Z_STABILIZER))


def test_small_board_role_counts():
    assert build_square_board(3).shape == (5, 5)
    assert _counts(build_square_board(3)) == (13, 6, 6)
    assert _counts(build_square_board(2)) == (5, 2, 2)
    assert build_square_board(33).shape == (65, 65)


@pytest.mark.parametrize("d", [2, 3, 4, 7, 12])
def test_data_qubit_count(d):
    b = build_square_board(d)
    assert b.n_data == d * d + (d - 1) ** 2
    for (r, c), role in np.ndenumerate(b.roles):
        assert role == role_of(r, c)


@pytest.mark.parametrize("bad", [1, 0, -3, 2.0, True])
def test_invalid_distance(bad):
    with pytest.raises(InvalidDistanceError):
        build_square_board(bad)


def _brute_boundary(board):
    xb = np.zeros(board.shape, np.uint8)
    zb = np.zeros(board.shape, np.uint8)
    for (r, c), role in np.ndenumerate(board.roles):
        if role != CellRole.DATA_QUBIT:
            continue
        for pauli, out in ((1, xb), (2, zb)):
            f = np.zeros(board.shape, np.uint8)
            f[r, c] = pauli
            sx, sz = brute_syndrome(board, f)
            out[r, c] = int(sx.sum() + sz.sum() == 1)
    return xb, zb


def test_boundary_examples():
    b = build_square_board(3)
    xb, zb = boundary_channels(b)
    assert xb[0, 0] == 1 and xb[2, 2] == 0
    assert not (xb & ~b.data_mask).any() and not (zb & ~b.data_mask).any()


@pytest.mark.parametrize("d", [2, 3, 5, 7])
def test_boundary_matches_brute_force(d):
    b = build_square_board(d)
    xb, zb = _brute_boundary(b)
    assert np.array_equal(xb, b.x_boundary) and np.array_equal(zb, b.z_boundary)


def _all_commute(board):
    gens = [op for *_, op in generator_frames(board)]
    return all(anticommutes(a, b) == 0 for i, a in enumerate(gens) for b in gens[i + 1:])


def test_stabilizers_commute_plain_and_carved():
    assert _all_commute(build_square_board(5))
    carved = carve_defects(build_square_board(9), [DefectSpec(6, 7, 8, 9)])
    assert _all_commute(carved)


def test_carve_single_hole():
    b = build_square_board(9)
    hole = DefectSpec(6, 7, 8, 9)  # centred on plaquette (7, 8)
    carved = carve_defects(b, [hole])
    assert int((carved.roles == CellRole.DISABLED).sum()) == 9
    assert (carved.roles[hole.cells()] == CellRole.DISABLED).all()
    # perimeter qubits pick up boundary membership, checked against the brute-force predicate
    xb, zb = _brute_boundary(carved)
    assert np.array_equal(xb, carved.x_boundary) and np.array_equal(zb, carved.z_boundary)
    assert (carved.x_boundary | carved.z_boundary).sum() > (b.x_boundary | b.z_boundary).sum()
    assert carved.z_boundary[6, 6] == 1 and b.z_boundary[6, 6] == 0
    # input untouched
    assert not (b.roles == CellRole.DISABLED).any()


def test_carve_empty_list_is_identity():
    b = build_square_board(5)
    assert carve_defects(b, []) is b


def test_carve_order_independent():
    b = build_square_board(11)
    h1, h2 = DefectSpec(4, 5, 6, 7), DefectSpec(12, 13, 14, 15)
    one = carve_defects(carve_defects(b, [h1]), [h2])
    two = carve_defects(carve_defects(b, [h2]), [h1])
    assert one.same_geometry(two)
    assert np.array_equal(one.x_boundary, two.x_boundary)


@pytest.mark.parametrize("spec", [
    DefectSpec(0, 1, 2, 3),      # touches the edge
    DefectSpec(6, 7, 7, 9),      # corner is not an X-stabilizer cell
    DefectSpec(8, 9, 6, 7),      # inverted
    DefectSpec(14, 15, 18, 19),  # halo leaves the board
])
def test_carve_rejects_bad_rectangles(spec):
    with pytest.raises(GeometryError):
        carve_defects(build_square_board(10), [spec])


def test_carve_rejects_overlap():
    b = build_square_board(11)
    with pytest.raises(GeometryError):
        carve_defects(b, [DefectSpec(4, 5, 6, 7), DefectSpec(6, 7, 8, 9)])
    with pytest.raises(GeometryError):
        carve_defects(carve_defects(b, [DefectSpec(4, 5, 6, 7)]), [DefectSpec(6, 7, 8, 9)])


def test_logicals_d3_and_d2():
    lx, lz = logical_representatives(build_square_board(3))
    assert sorted(map(tuple, np.argwhere(lz))) == [(0, 0), (0, 2), (0, 4)]
    assert sorted(map(tuple, np.argwhere(lx))) == [(0, 0), (2, 0), (4, 0)]
    assert (lz[lz > 0] == 2).all() and (lx[lx > 0] == 1).all()
    lx2, lz2 = logical_representatives(build_square_board(2))
    assert np.count_nonzero(lx2) == 2 and np.count_nonzero(lz2) == 2


@pytest.mark.parametrize("d", [2, 3, 6, 9])
def test_logicals_commute_with_stabilizers(d):
    b = build_square_board(d)
    lx, lz = logical_representatives(b)
    assert symplectic_product(lx, lz) == 1
    for *_, op in generator_frames(b):
        assert anticommutes(op, lx) == 0 and anticommutes(op, lz) == 0


def test_logicals_reject_broken_geometry():
    b = build_square_board(9)
    roles = np.array(b.roles)
    roles[4, 0] = CellRole.DISABLED
    from surfdec.lattice import _assemble
    broken = _assemble(b.rows, b.cols, roles, (), 9)
    with pytest.raises(UnsupportedGeometryError):
        logical_representatives(broken)


def test_random_double_zcut_is_valid(rng):
    b = build_square_board(33)
    for _ in range(20):
        pair = random_double_zcut(b, 8, rng)
        carved = carve_defects(b, pair)
        assert len(carved.defects) == 2
        assert _counts(carved)[0] < b.n_data
        logical_representatives(carved)  # outer logicals survive the holes


def test_random_double_zcut_too_big(rng):
    with pytest.raises(GeometryError):
        random_double_zcut(build_square_board(5), 8, rng)


def test_board_spec_round_trip():
    text = "# a board\nd 9\n\ndefect zcut 6 7 8 9   # hole\n"
    b = parse_board_spec(text)
    assert b.distance == 9 and len(b.defects) == 1
    again = parse_board_spec(format_board_spec(b))
    assert again.same_geometry(b)


@pytest.mark.parametrize("text,line", [
    ("defect zcut 6 7 8 9\n", 1),
    ("d 9\ndefect zcut 6 7 8\n", 2),
    ("d 9\n\nwall 1 2\n", 3),
    ("d nine\n", 1),
    ("d 9\ndefect zcut 0 1 2 3\n", 2),
    ("d 1\n", 1),
])
def test_board_spec_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as exc:
        parse_board_spec(text, "b.txt")
    assert exc.value.line == line
    assert f"b.txt:{line}:" in str(exc.value)
