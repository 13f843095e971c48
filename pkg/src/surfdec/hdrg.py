"""Hard-decision renormalization-group (HDRG) mop-up decoder.

Each syndrome plane is decoded on its own. At radius r = 1, 2, ... flipped
stabilizers within Manhattan distance 2r (cells) are clustered; clusters with
an even number of members, or within 2r of an open boundary, are neutral and
get annihilated: members are visited in row-major order and each unmatched
one is joined to its nearest unmatched partner, or to the boundary when that
is strictly closer (boundary-touching clusters only). Unresolved clusters wait
for a larger radius. Plaquette (Z-syndrome) flips are joined by X chains and
vertex (X-syndrome) flips by Z chains.
"""

from __future__ import annotations

import enum
import weakref
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from numba import njit

from .lattice import Board, CellRole
from .noise import from_bits
from .syndrome import SyndromeImage

INF = np.int32(2**30)


class SyndromePlane(enum.Enum):
    X_SYNDROME = "x"  # vertex flips, corrected by Z chains
    Z_SYNDROME = "z"  # plaquette flips, corrected by X chains


@dataclass(frozen=True)
class Cluster:
    plane: SyndromePlane
    members: frozenset[tuple[int, int]]
    touches_boundary: bool

    @property
    def neutral(self) -> bool:
        return len(self.members) % 2 == 0 or self.touches_boundary


@dataclass(frozen=True, eq=False)
class PlaneTables:
    """Per-board lookup tables for one syndrome plane (flat row-major indexing)."""

    stab: np.ndarray  # uint8, enabled stabilizers of the detecting type
    data: np.ndarray  # uint8, enabled data qubits
    bdist: np.ndarray  # int32, cells to the nearest open boundary (2 x chain weight)
    next_qubit: np.ndarray  # int32, qubit to toggle on the way to the boundary
    next_stab: np.ndarray  # int32, stabilizer reached after that toggle (-1: boundary)
    shape: tuple[int, int]


_TABLES: "weakref.WeakKeyDictionary[Board, dict[SyndromePlane, PlaneTables]]" = weakref.WeakKeyDictionary()


def plane_tables(board: Board, plane: SyndromePlane) -> PlaneTables:
    per_board = _TABLES.setdefault(board, {})
    if plane not in per_board:
        if plane is SyndromePlane.Z_SYNDROME:
            stab, bq = board.z_stab_mask, board.x_boundary
        else:
            stab, bq = board.x_stab_mask, board.z_boundary
        stab = np.ascontiguousarray(stab, dtype=np.uint8)
        data = np.ascontiguousarray(board.data_mask, dtype=np.uint8)
        dist, nq, ns = _boundary_bfs(stab, data, np.ascontiguousarray(bq, dtype=np.uint8))
        per_board[plane] = PlaneTables(stab.ravel(), data.ravel(), dist, nq, ns, board.shape)
    return per_board[plane]


def plane_of(board: Board, row: int, col: int) -> SyndromePlane:
    role = board.roles[row, col]
    if role == CellRole.X_STABILIZER:
        return SyndromePlane.X_SYNDROME
    if role == CellRole.Z_STABILIZER:
        return SyndromePlane.Z_SYNDROME
    raise ValueError(f"cell ({row}, {col}) is not an enabled stabilizer")


# -- numba kernels -------------------------------------------------------------------

@njit(cache=True)
def _boundary_bfs(stab, data, bq):
    rows, cols = stab.shape
    n = rows * cols
    dist = np.full(n, INF, np.int32)
    nq = np.full(n, -1, np.int32)
    ns = np.full(n, -1, np.int32)
    queue = np.empty(n, np.int64)
    dr = (-1, 1, 0, 0)
    dc = (0, 0, -1, 1)
    tail = 0
    for r in range(rows):
        for c in range(cols):
            if not stab[r, c]:
                continue
            for k in range(4):
                qr, qc = r + dr[k], c + dc[k]
                if 0 <= qr < rows and 0 <= qc < cols and data[qr, qc] and bq[qr, qc]:
                    s = r * cols + c
                    dist[s] = 2
                    nq[s] = qr * cols + qc
                    queue[tail] = s
                    tail += 1
                    break
    head = 0
    while head < tail:
        s = queue[head]
        head += 1
        r, c = s // cols, s % cols
        for k in range(4):
            qr, qc = r + dr[k], c + dc[k]
            tr, tc = r + 2 * dr[k], c + 2 * dc[k]
            if not (0 <= tr < rows and 0 <= tc < cols):
                continue
            if not data[qr, qc] or not stab[tr, tc]:
                continue
            t = tr * cols + tc
            if dist[t] != INF:
                continue
            dist[t] = dist[s] + 2
            nq[t] = qr * cols + qc
            ns[t] = s
            queue[tail] = t
            tail += 1
    return dist, nq, ns


@njit(cache=True)
def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@njit(cache=True)
def _close_pairs(fr, fc, active, reach, rows, cols):
    """All active pairs (i < j) within Manhattan ``reach``, found through a bucket grid."""
    n = fr.shape[0]
    b = max(reach, 1)
    nbr = rows // b + 1
    nbc = cols // b + 1
    head = np.full(nbr * nbc, -1, np.int64)
    link = np.full(n, -1, np.int64)
    # insert in reverse so that each bucket lists indices in ascending order
    for i in range(n - 1, -1, -1):
        if active[i]:
            cell = (fr[i] // b) * nbc + fc[i] // b
            link[i] = head[cell]
            head[cell] = i
    cap = 16
    ei = np.empty(cap, np.int64)
    ej = np.empty(cap, np.int64)
    ed = np.empty(cap, np.int64)
    m = 0
    for i in range(n):
        if not active[i]:
            continue
        br, bc = fr[i] // b, fc[i] // b
        for rr in range(br - 1, br + 2):
            if rr < 0 or rr >= nbr:
                continue
            for cc in range(bc - 1, bc + 2):
                if cc < 0 or cc >= nbc:
                    continue
                j = head[rr * nbc + cc]
                while j != -1:
                    if j > i:
                        dist = abs(fr[i] - fr[j]) + abs(fc[i] - fc[j])
                        if dist <= reach:
                            if m == cap:
                                cap *= 2
                                ei2 = np.empty(cap, np.int64)
                                ej2 = np.empty(cap, np.int64)
                                ed2 = np.empty(cap, np.int64)
                                ei2[:m] = ei[:m]
                                ej2[:m] = ej[:m]
                                ed2[:m] = ed[:m]
                                ei, ej, ed = ei2, ej2, ed2
                            ei[m] = i
                            ej[m] = j
                            ed[m] = dist
                            m += 1
                    j = link[j]
    return ei[:m], ej[:m], ed[:m]


@njit(cache=True)
def _cluster_roots(fr, fc, active, reach, rows, cols):
    n = fr.shape[0]
    ei, ej, ed = _close_pairs(fr, fc, active, reach, rows, cols)
    parent = np.arange(n)
    for k in range(ei.shape[0]):
        a = _find(parent, ei[k])
        b = _find(parent, ej[k])
        if a != b:
            # smaller index becomes the root so labels are order-stable
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
    roots = np.full(n, -1, np.int64)
    for i in range(n):
        if active[i]:
            roots[i] = _find(parent, i)
    return roots, ei, ej, ed


@njit(cache=True)
def _toggle_l_path(out, data, stab, rows, cols, a, b):
    """Toggle the vertical-then-horizontal chain from stabilizer a to b; False if it leaves the code."""
    ra, ca = a // cols, a % cols
    rb, cb = b // cols, b % cols
    # validate first so that a failed attempt leaves ``out`` untouched
    r, c = ra, ca
    while r != rb:
        s = 1 if rb > r else -1
        if not data[(r + s) * cols + c] or not stab[(r + 2 * s) * cols + c]:
            return False
        r += 2 * s
    while c != cb:
        s = 1 if cb > c else -1
        if not data[r * cols + c + s] or not stab[r * cols + c + 2 * s]:
            return False
        c += 2 * s
    r, c = ra, ca
    while r != rb:
        s = 1 if rb > r else -1
        out[(r + s) * cols + c] ^= 1
        r += 2 * s
    while c != cb:
        s = 1 if cb > c else -1
        out[r * cols + c + s] ^= 1
        c += 2 * s
    return True


@njit(cache=True)
def _toggle_bfs_path(out, data, stab, rows, cols, a, b):
    n = rows * cols
    prev_s = np.full(n, -1, np.int64)
    prev_q = np.full(n, -1, np.int64)
    seen = np.zeros(n, np.uint8)
    queue = np.empty(n, np.int64)
    dr = (-1, 1, 0, 0)
    dc = (0, 0, -1, 1)
    queue[0] = a
    seen[a] = 1
    head, tail = 0, 1
    while head < tail:
        s = queue[head]
        head += 1
        if s == b:
            break
        r, c = s // cols, s % cols
        for k in range(4):
            tr, tc = r + 2 * dr[k], c + 2 * dc[k]
            if not (0 <= tr < rows and 0 <= tc < cols):
                continue
            q = (r + dr[k]) * cols + c + dc[k]
            t = tr * cols + tc
            if data[q] and stab[t] and not seen[t]:
                seen[t] = 1
                prev_s[t] = s
                prev_q[t] = q
                queue[tail] = t
                tail += 1
    if not seen[b]:
        return False
    s = b
    while s != a:
        out[prev_q[s]] ^= 1
        s = prev_s[s]
    return True


@njit(cache=True)
def _join(out, data, stab, rows, cols, a, b):
    if not _toggle_l_path(out, data, stab, rows, cols, a, b):
        if not _toggle_bfs_path(out, data, stab, rows, cols, a, b):
            raise RuntimeError("HDRG: no chain between matched stabilizers")


@njit(cache=True)
def _to_boundary(out, nq, ns, s):
    while s != -1:
        out[nq[s]] ^= 1
        s = ns[s]


@njit(cache=True)
def _decode_plane(flat, rows, cols, stab, data, bdist, nq, ns, out):
    n = flat.shape[0]
    fr = flat // cols
    fc = flat % cols
    bd = np.empty(n, np.int64)
    for i in range(n):
        bd[i] = bdist[flat[i]]
    active = np.ones(n, np.bool_)
    matched = np.zeros(n, np.bool_)
    mate = np.full(n, -1, np.int64)
    remaining = n
    radius = 0
    limit = rows + cols + 2
    while remaining > 0:
        radius += 1
        if radius > limit:
            raise RuntimeError("HDRG: radius exceeded the board diameter")
        reach = 2 * radius
        roots, _, _, _ = _cluster_roots(fr, fc, active, reach, rows, cols)
        size = np.zeros(n, np.int64)
        touch = np.zeros(n, np.bool_)
        for i in range(n):
            if active[i]:
                size[roots[i]] += 1
                if bd[i] <= reach:
                    touch[roots[i]] = True
        neutral = np.zeros(n, np.bool_)
        for i in range(n):
            if active[i] and roots[i] == i:
                neutral[i] = size[i] % 2 == 0 or touch[i]
        # members of each neutral cluster, in flat (lexicographic) order, take
        # their nearest unmatched partner or the boundary if it is strictly closer
        order = np.argsort(roots * (n + 1) + np.arange(n), kind="mergesort")
        members = np.empty(n, np.int64)
        start = 0
        while start < n:
            i0 = order[start]
            stop = start
            while stop < n and roots[order[stop]] == roots[i0]:
                stop += 1
            if roots[i0] >= 0 and neutral[roots[i0]]:
                k = 0
                for u in range(start, stop):
                    members[k] = order[u]
                    k += 1
                ct = touch[roots[i0]]
                for x in range(k):
                    a = members[x]
                    if matched[a]:
                        continue
                    best = -1
                    bestd = INF
                    for y in range(k):
                        b = members[y]
                        if b == a or matched[b]:
                            continue
                        dd = abs(fr[a] - fr[b]) + abs(fc[a] - fc[b])
                        if dd < bestd:
                            bestd = dd
                            best = b
                    if ct and bd[a] < bestd:
                        matched[a] = True
                        mate[a] = -1
                    elif best >= 0:
                        matched[a] = True
                        matched[best] = True
                        mate[a] = best
                        mate[best] = a
            start = stop
        for i in range(n):
            if active[i] and neutral[roots[i]]:
                if mate[i] == -1:
                    _to_boundary(out, nq, ns, flat[i])
                elif mate[i] > i:
                    _join(out, data, stab, rows, cols, flat[i], flat[mate[i]])
                active[i] = False
                remaining -= 1
    return radius


# -- public API ----------------------------------------------------------------------

def decode_plane(board: Board, plane: SyndromePlane, flips: np.ndarray) -> tuple[np.ndarray, int]:
    """Resolve one binary syndrome plane; returns the correction bits and the final radius."""
    tables = plane_tables(board, plane)
    rows, cols = board.shape
    flat = np.flatnonzero(np.asarray(flips).ravel()).astype(np.int64)
    out = np.zeros(rows * cols, np.uint8)
    radius = 0
    if flat.size:
        radius = _decode_plane(flat, rows, cols, tables.stab, tables.data, tables.bdist,
                               tables.next_qubit, tables.next_stab, out)
    return out.reshape(rows, cols), int(radius)


def hdrg_decode(board: Board, syn: SyndromeImage) -> np.ndarray:
    """Correction frame whose syndrome equals ``syn`` exactly."""
    x_corr, _ = decode_plane(board, SyndromePlane.Z_SYNDROME, syn.z_plane)
    z_corr, _ = decode_plane(board, SyndromePlane.X_SYNDROME, syn.x_plane)
    return from_bits(x_corr, z_corr)


def grow_clusters(flips: Iterable[tuple[int, int]], r: int, board: Board,
                  plane: SyndromePlane | None = None) -> list[Cluster]:
    """Connected components of ``flips`` under Manhattan distance <= 2r.

    The plane is inferred from the role of the first flip when not given.
    Clusters come back ordered by their lexicographically smallest member.
    """
    if r < 1:
        raise ValueError(f"clustering radius must be >= 1, got {r}")
    coords = sorted(set((int(a), int(b)) for a, b in flips))
    if not coords:
        return []
    if plane is None:
        plane = plane_of(board, *coords[0])
    tables = plane_tables(board, plane)
    fr = np.array([a for a, _ in coords], np.int64)
    fc = np.array([b for _, b in coords], np.int64)
    active = np.ones(len(coords), np.bool_)
    roots, *_ = _cluster_roots(fr, fc, active, 2 * r, board.rows, board.cols)
    groups: dict[int, list[int]] = {}
    for i, root in enumerate(roots.tolist()):
        groups.setdefault(root, []).append(i)
    out = []
    for root in sorted(groups):
        idx = groups[root]
        touches = any(int(tables.bdist[coords[i][0] * board.cols + coords[i][1]]) <= 2 * r for i in idx)
        out.append(Cluster(plane, frozenset(coords[i] for i in idx), touches))
    return out
