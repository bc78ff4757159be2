"""Exact operator algebra of the semion code on small edge supports.

Phases are tracked as Z4 exponents (powers of i) until the Walsh
transform, so every operator identity in this module is exact.  A
diagonal-plus-permutation operator acts as

    op |j> = i^exp(j) |j XOR x_mask>

i.e. the diagonal phase is applied before the bit-flip part, matching
the convention used for both plaquette and string operators.

The key derived objects are the string-phase tables F over the support
Conn(P) of an X-error cluster P, their Walsh spectra c(Z_Q), and the
plaquette-syndrome distribution P(s) = |sum_{Q in sector s} c(Z_Q)|^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from semionsim.lattice import CodeLattice, bits

DEFAULT_CAP = 22


class CapExceeded(Exception):
    """Support larger than the configured exact-evaluation cap."""


class InfeasibleConstraints(Exception):
    """The string-phase linear system has no solution (conventions bug)."""


@dataclass
class DiagonalPhaseTable:
    """Z4-exponent function on bitstrings over an ordered edge support."""

    support: list[int]
    exps: np.ndarray  # int8, length 2**len(support), values in {0,1,2,3}

    def phases(self) -> np.ndarray:
        return 1j ** self.exps.astype(np.complex128)

    def __len__(self) -> int:
        return len(self.support)


@dataclass
class SignedPermutationOp:
    """Operator |j> -> i^exp(j) |j ^ x_mask> over an ordered support."""

    support: list[int]
    x_mask: int  # bitmask over support positions
    phase: DiagonalPhaseTable

    def apply_exponents(self) -> tuple[np.ndarray, np.ndarray]:
        """(image index, Z4 exponent) for each basis state."""
        n = len(self.support)
        idx = np.arange(1 << n, dtype=np.int64) ^ self.x_mask
        return idx, self.phase.exps


@dataclass
class AmplitudeTable:
    """Walsh spectrum c(Z_Q) of a diagonal string phase over Conn(P)."""

    support: list[int]
    c: np.ndarray  # complex128, indexed by the Q bitmask over support


@dataclass
class SyndromeDistribution:
    """Plaquette-syndrome sectors of one X-error cluster.

    Patterns are bitmasks over `plaquettes` (bit k set = plaquette
    `plaquettes[k]` flips).  `reps` holds, per pattern, the sector
    representative Q maximizing |c| (ties: lowest mask), as a bitmask
    over `support` positions.
    """

    support: list[int]
    plaquettes: list[int]
    patterns: np.ndarray   # uint64, sorted unique
    probs: np.ndarray      # float64, same length
    reps: np.ndarray       # int64 Q-masks over support positions
    wrapped: bool

    def total(self) -> float:
        return float(self.probs.sum())


# -- plaquette phase tables --------------------------------------------------

@lru_cache(maxsize=None)
def _position_bits(n: int) -> np.ndarray:
    j = np.arange(1 << n, dtype=np.int64)
    return np.stack([((j >> k) & 1).astype(np.int8) for k in range(n)])


@lru_cache(maxsize=1)
def _hexagon_exponents() -> np.ndarray:
    """Z4 exponents of the (-1) factors on the hexagon, positions 1..6."""
    b = _position_bits(12)
    exp = np.zeros(1 << 12, dtype=np.int16)
    # factors (-1)^{n-_{k-1} n+_k} for hexagon positions k = 1..6 cyclic
    for prev, cur in ((5, 0), (0, 1), (1, 2), (2, 3), (3, 4), (4, 5)):
        exp += 2 * b[prev] * (1 - b[cur])
    return (exp % 4).astype(np.int8)


@lru_cache(maxsize=1)
def _leg_exponents() -> np.ndarray:
    """Z4 exponents of the six vertex factors, positions 1..12.

    Position bits: hexagon edges 1..6 are bits 0..5, legs 7..12 are bits
    6..11.  Each factor is i^(leg occupation times a +-1 weight built
    from the two neighboring hexagon edges).
    """
    b = _position_bits(12)

    def n_minus(k):  # occupation of position k (1-based)
        return b[k - 1].astype(np.int16)

    def n_plus(k):
        return (1 - b[k - 1]).astype(np.int16)

    exp = np.zeros(1 << 12, dtype=np.int16)
    exp += n_minus(12) * (n_minus(1) * n_minus(6) - n_plus(1) * n_plus(6))
    exp += n_minus(7) * (n_plus(1) * n_plus(2) - n_minus(1) * n_minus(2))
    exp += n_plus(8) * (n_minus(2) * n_plus(3) - n_plus(2) * n_minus(3))
    exp += n_minus(9) * (n_minus(3) * n_minus(4) - n_plus(3) * n_plus(4))
    exp += n_minus(10) * (n_plus(4) * n_plus(5) - n_minus(4) * n_minus(5))
    exp += n_plus(11) * (n_minus(5) * n_plus(6) - n_plus(5) * n_minus(6))
    return (exp % 4).astype(np.int8)


def beta_product(lat: CodeLattice, p: int) -> DiagonalPhaseTable:
    """Product of the six vertex phase factors of plaquette p (0-based)."""
    support = [int(e) for e in lat.plaq_support[p]]
    return DiagonalPhaseTable(support, _leg_exponents().copy())


def plaquette_op(lat: CodeLattice, p: int) -> SignedPermutationOp:
    """Full plaquette stabilizer: hexagon X-flips with exact phases."""
    support = [int(e) for e in lat.plaq_support[p]]
    exps = (_hexagon_exponents() + _leg_exponents()) % 4
    return SignedPermutationOp(
        support, 0b111111, DiagonalPhaseTable(support, exps.astype(np.int8)))


def naive_plaquette_op(lat: CodeLattice, p: int) -> SignedPermutationOp:
    """Plaquette operator without the vertex phases (not Hermitian)."""
    support = [int(e) for e in lat.plaq_support[p]]
    exps = _hexagon_exponents().astype(np.int8).copy()
    return SignedPermutationOp(
        support, 0b111111, DiagonalPhaseTable(support, exps))


def vertex_op(lat: CodeLattice, v: int) -> SignedPermutationOp:
    """Vertex stabilizer: Z on the three star edges."""
    support = [int(e) for e in lat.vertex_edges[v]]
    j = np.arange(8, dtype=np.int64)
    pop = ((j & 1) + ((j >> 1) & 1) + ((j >> 2) & 1)).astype(np.int8)
    return SignedPermutationOp(
        support, 0, DiagonalPhaseTable(support, (2 * pop) % 4))


# -- string phases ------------------------------------------------------------

def connected_support(lat: CodeLattice, x_edges: list[int]) -> list[int]:
    """Conn(P): the path edges plus every edge sharing a vertex with P."""
    conn = set()
    for e in x_edges:
        conn.add(int(e))
        for v in lat.edge_endpoints[e]:
            for e2 in lat.vertex_edges[v]:
                conn.add(int(e2))
    return sorted(conn)


def _check_connected(lat: CodeLattice, x_edges: list[int]) -> None:
    if not x_edges:
        return
    vert_of = {}
    for e in x_edges:
        for v in lat.edge_endpoints[e]:
            vert_of.setdefault(int(v), []).append(int(e))
    seen = {x_edges[0]}
    stack = [x_edges[0]]
    while stack:
        e = stack.pop()
        for v in lat.edge_endpoints[e]:
            for e2 in vert_of[int(v)]:
                if e2 not in seen:
                    seen.add(e2)
                    stack.append(e2)
    if len(seen) != len(set(map(int, x_edges))):
        raise ValueError("x_support is not a single connected component")


def _gather(values: np.ndarray, positions: list[int]) -> np.ndarray:
    """Compress bits at `positions` of each index into a small index."""
    out = np.zeros(values.shape, dtype=np.int64)
    for rank, pos in enumerate(positions):
        out |= ((values >> pos) & 1) << rank
    return out


def solve_string_phase(
    lat: CodeLattice,
    x_edges: list[int],
    cap: int = DEFAULT_CAP,
) -> DiagonalPhaseTable:
    """Solve the linear constraint system for the string phase F = i^g.

    Constraints: the string squares to one and commutes with every
    plaquette operator whose hexagon meets Conn(P).  (It automatically
    anticommutes with exactly the vertex operators at odd-degree
    vertices of P, which imposes nothing on F.)  Free directions are
    fixed deterministically: each propagation orbit starts at exponent
    0 before the squaring constraint aligns orbit pairs.
    """
    x_edges = sorted(set(int(e) for e in x_edges))
    if not x_edges:
        return DiagonalPhaseTable([], np.zeros(1, dtype=np.int8))
    _check_connected(lat, x_edges)
    conn = connected_support(lat, x_edges)
    n = len(conn)
    if n > cap:
        raise CapExceeded(f"|Conn| = {n} exceeds cap {cap}")
    pos_of = {e: i for i, e in enumerate(conn)}
    x_mask = 0
    for e in x_edges:
        x_mask |= 1 << pos_of[e]

    bexp = ((_hexagon_exponents() + _leg_exponents()) % 4).astype(np.int16)
    plaqs = sorted({int(p) for e in conn for p in lat.edge_plaquettes[e]})

    moves = []
    for p in plaqs:
        support = [int(e) for e in lat.plaq_support[p]]
        move = 0
        for k in range(6):  # hexagon edges are support positions 0..5
            e = support[k]
            if e in pos_of:
                move |= 1 << pos_of[e]
        xh = 0
        for k, e in enumerate(support):
            if e in x_edges:
                xh |= 1 << k
        delta = (bexp[np.arange(1 << 12) ^ xh] - bexp) % 4
        inner = [k for k, e in enumerate(support) if e in pos_of]
        imask = 0
        for k in inner:
            imask |= 1 << k
        # The exponent difference must only depend on bits inside Conn.
        if not np.array_equal(delta, delta[np.arange(1 << 12) & imask]):
            raise InfeasibleConstraints(
                f"plaquette {p} couples Conn to outside bits")
        small = delta[_spread_indices(tuple(inner))]
        conn_positions = [pos_of[support[k]] for k in inner]
        moves.append((move, small.astype(np.int8), conn_positions))

    size = 1 << n
    g = np.zeros(size, dtype=np.int8)
    visited = np.zeros(size, dtype=bool)
    orbit_id = np.full(size, -1, dtype=np.int32)
    orbit_bases: list[int] = []
    scan = 0
    while scan < size:
        if visited[scan]:
            scan += 1
            continue
        base = scan
        oid = len(orbit_bases)
        orbit_bases.append(base)
        visited[base] = True
        orbit_id[base] = oid
        frontier = np.array([base], dtype=np.int64)
        while frontier.size:
            nxt_frontier = []
            for move, small, cpos in moves:
                nxt = frontier ^ move
                rhs = small[_gather(frontier, cpos)]
                new = ~visited[nxt]
                if new.any():
                    nn = nxt[new]
                    g[nn] = (g[frontier[new]] + rhs[new]) % 4
                    visited[nn] = True
                    orbit_id[nn] = oid
                    nxt_frontier.append(nn)
                old = ~new
                if old.any():
                    ok = (g[nxt[old]] - g[frontier[old]] - rhs[old]) % 4 == 0
                    if not ok.all():
                        raise InfeasibleConstraints(
                            "inconsistent plaquette commutation constraints")
            frontier = (np.concatenate(nxt_frontier)
                        if nxt_frontier else np.array([], dtype=np.int64))

    # Squaring constraint: g(u) + g(u ^ x_mask) = 0 (mod 4).
    partner = np.arange(size, dtype=np.int64) ^ x_mask
    su = (g.astype(np.int16) + g[partner]) % 4
    base_idx = np.array(orbit_bases, dtype=np.int64)
    if not np.array_equal(su, su[base_idx[orbit_id]]):
        raise InfeasibleConstraints("squaring constraint not orbit-constant")
    shift = np.zeros(len(orbit_bases), dtype=np.int16)
    for oid, base in enumerate(orbit_bases):
        oid2 = int(orbit_id[base ^ x_mask])
        s = int(su[base])
        if oid2 == oid:
            if s % 2:
                raise InfeasibleConstraints("string cannot square to one")
            shift[oid] = ((4 - s) % 4) // 2
        elif oid2 > oid:
            shift[oid2] = (4 - s) % 4
    g = ((g + shift[orbit_id]) % 4).astype(np.int8)
    return DiagonalPhaseTable(conn, g)


@lru_cache(maxsize=None)
def _spread_indices(inner: tuple | list) -> np.ndarray:
    """Indices whose bits at `inner` positions enumerate all patterns."""
    inner = tuple(inner)
    out = np.zeros(1 << len(inner), dtype=np.int64)
    for rank, pos in enumerate(inner):
        half = 1 << rank
        out[half:2 * half] = out[:half] + (1 << pos)
    return out


def walsh_coefficients(table: DiagonalPhaseTable) -> AmplitudeTable:
    """Spectrum c(Z_Q) = 2^-n sum_j conj(F(j)) (-1)^{|Q & j|}.

    Computed by an in-place fast Walsh-Hadamard transform with a fixed
    summation order, O(n 2^n).
    """
    n = len(table.support)
    vals = 1j ** ((-table.exps.astype(np.int64)) % 4)
    vals = vals.astype(np.complex128)
    for bit in range(n):
        h = 1 << bit
        v = vals.reshape(-1, 2, h)
        a = v[:, 0, :].copy()
        b = v[:, 1, :].copy()
        v[:, 0, :] = a + b
        v[:, 1, :] = a - b
    return AmplitudeTable(list(table.support), vals / (1 << n))


def naive_walsh(table: DiagonalPhaseTable) -> AmplitudeTable:
    """O(4^n) double-loop spectrum; oracle for the fast transform."""
    n = len(table.support)
    vals = (1j ** ((-table.exps.astype(np.int64)) % 4)).astype(np.complex128)
    size = 1 << n
    c = np.zeros(size, dtype=np.complex128)
    j = np.arange(size)
    for q in range(size):
        signs = 1 - 2 * (np.bitwise_count(j & q) & 1).astype(np.int64)
        c[q] = (vals * signs).sum() / size
    return AmplitudeTable(list(table.support), c)


def _dual_wrapped(lat: CodeLattice, conn: list[int]) -> bool:
    """True if the dual subgraph on Conn edges has a non-contractible cycle."""
    # Lift plaquette coordinates to the plane while walking the Conn
    # edges; a closed dual loop is non-contractible exactly when some
    # non-tree edge disagrees with the lifted coordinates.
    steps: dict[int, list[tuple[int, int, int]]] = {}
    for e in conn:
        a, b = (int(q) for q in lat.edge_plaquettes[e])
        if lat.edge_kind[e] == 1:
            da, db = 0, 2  # left plaquette -> right plaquette
        else:
            g, x = int(lat.edge_row[e]), int(lat.edge_x[e])
            if (x - g) % 2 == 0:
                da, db = -1, 1   # "/": stored (above, below)
            else:
                da, db = -1, -1  # "\": stored (above, below)
        steps.setdefault(a, []).append((b, da, db))
        steps.setdefault(b, []).append((a, -da, -db))
    lift: dict[int, tuple[int, int]] = {}
    for start in sorted(steps):
        if start in lift:
            continue
        lift[start] = (0, 0)
        stack = [start]
        while stack:
            cur = stack.pop()
            cr, cx = lift[cur]
            for nxt, da, db in steps[cur]:
                want = (cr + da, cx + db)
                if nxt not in lift:
                    lift[nxt] = want
                    stack.append(nxt)
                elif lift[nxt] != want:
                    return True
    return False


def syndrome_distribution(
    lat: CodeLattice,
    x_edges: list[int],
    cap: int = DEFAULT_CAP,
) -> SyndromeDistribution:
    """Plaquette-syndrome sectors and probabilities for one X cluster.

    Buckets the Walsh spectrum of the string phase by which plaquettes
    each Z_Q flips (odd overlap with the hexagon), in one pass over all
    2^n amplitudes.
    """
    table = solve_string_phase(lat, x_edges, cap=cap)
    conn = table.support
    if not conn:
        return SyndromeDistribution(
            [], [], np.array([0], dtype=np.uint64),
            np.array([1.0]), np.array([0], dtype=np.int64), False)
    amp = walsh_coefficients(table)
    plaqs = sorted({int(p) for e in conn for p in lat.edge_plaquettes[e]})
    rank = {p: k for k, p in enumerate(plaqs)}
    size = 1 << len(conn)
    patterns = np.zeros(size, dtype=np.uint64)
    for i, e in enumerate(conn):
        contrib = np.uint64(0)
        for p in lat.edge_plaquettes[e]:
            contrib ^= np.uint64(1 << rank[int(p)])
        half = 1 << i
        patterns[half:2 * half] = patterns[:half] ^ contrib

    uniq, inverse = np.unique(patterns, return_inverse=True)
    sums = np.zeros(len(uniq), dtype=np.complex128)
    np.add.at(sums, inverse, amp.c)
    probs = np.abs(sums) ** 2

    mag = np.abs(amp.c) ** 2
    best = np.zeros(len(uniq), dtype=np.float64)
    np.maximum.at(best, inverse, mag)
    reps = np.full(len(uniq), size, dtype=np.int64)
    is_best = mag >= best[inverse] - 1e-15
    np.minimum.at(reps, inverse[is_best],
                  np.flatnonzero(is_best).astype(np.int64))

    keep = probs > 1e-24
    return SyndromeDistribution(
        conn, plaqs, uniq[keep], probs[keep], reps[keep],
        _dual_wrapped(lat, conn))
