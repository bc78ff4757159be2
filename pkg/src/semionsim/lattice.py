"""Hexagonal torus lattice for the semion code.

The distance-d code lives on a brick-wall drawing of the hexagonal lattice
wrapped on a torus: d rows of d hexagons, 2d^2 vertices, 3d^2 edges.  Each
row of hexagons is offset half a cell from the row below, so the vertical
identification of the torus carries a horizontal shift of d columns (one
half of the 2d-column period).

Internal coordinates (0-based):

* vertex (g, x): zigzag row g in [0, d), horizontal position x in [0, 2d).
  A vertex is a "low" (pointy-down) site iff (x - g) is even.
* plaquette (r, x): hexagon row r in [0, d), center column x with
  x == r (mod 2).
* slant edge (g, x): joins vertices (g, x)-(g, x+1); orientation A ("/")
  when x == g (mod 2), else C ("\\").
* vertical edge (r, x): joins (g=r, x) to (g=r+1, x); x == r+1 (mod 2);
  orientation B.

Row wrap-around: (g + d, x) is the same site as (g, x + d).

Sequential ids (1-based externally) follow the figure convention: vertices
and plaquettes raster left-to-right, bottom-to-top.  Edge ids raster per
hexagon row: the bottom zigzag's slant edges first, then for each hexagon
row its top zigzag slants followed by its vertical edges.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

ORIENTATION_NAMES = ("A", "B", "C")


class CodeLattice:
    """Immutable topology of the distance-d hexagonal torus.

    All arrays are 0-based; the spec-facing query methods below speak
    1-based ids to match the published figure labels.
    """

    def __init__(self, d: int):
        if d < 2:
            raise ValueError(f"code distance must be >= 2, got {d}")
        self.d = d
        self.n_edges = 3 * d * d
        self.n_vertices = 2 * d * d
        self.n_plaquettes = d * d

        self._build_edges()
        self._build_plaquettes()
        self._build_masks()
        self._build_cuts()
        self._build_graphs()
        self._path_cache: dict[tuple[int, int, int], int] = {}

    # -- coordinate helpers -------------------------------------------------

    def _norm_vrow(self, g: int, x: int) -> tuple[int, int]:
        gg = g % self.d
        shift = (g - gg) // self.d
        return gg, (x + self.d * shift) % (2 * self.d)

    def vertex_id(self, g: int, x: int) -> int:
        g, x = self._norm_vrow(g, x)
        return g * 2 * self.d + (x - g) % (2 * self.d)

    def plaquette_id(self, r: int, x: int) -> int:
        r, x = self._norm_vrow(r, x)  # same wrap rule as vertex rows
        return r * self.d + ((x - r - 2) // 2) % self.d

    def slant_id(self, g: int, x: int) -> int:
        g, x = self._norm_vrow(g, x)
        base = 0 if g == 0 else 2 * self.d + (g - 1) * 3 * self.d
        return base + x

    def vertical_id(self, r: int, x: int) -> int:
        r, x = self._norm_vrow(r, x)
        d = self.d
        base = 4 * d + 3 * d * r if r < d - 1 else 3 * d * d - d
        return base + x // 2

    # -- construction -------------------------------------------------------

    def _build_edges(self) -> None:
        d = self.d
        n = self.n_edges
        self.edge_kind = np.zeros(n, dtype=np.int8)  # 0 slant, 1 vertical
        self.edge_row = np.zeros(n, dtype=np.int32)
        self.edge_x = np.zeros(n, dtype=np.int32)
        self.edge_orient = np.zeros(n, dtype=np.int8)  # 0=A, 1=B, 2=C
        self.edge_endpoints = np.zeros((n, 2), dtype=np.int32)
        self.edge_plaquettes = np.zeros((n, 2), dtype=np.int32)
        self.edge_surround = np.zeros((n, 4), dtype=np.int32)

        for g in range(d):
            for x in range(2 * d):
                e = self.slant_id(g, x)
                self.edge_kind[e] = 0
                self.edge_row[e] = g
                self.edge_x[e] = x
                a = self.vertex_id(g, x)
                b = self.vertex_id(g, x + 1)
                self.edge_endpoints[e] = (a, b)
                if (x - g) % 2 == 0:
                    # "/" edge: low end left.  Surrounding plaquettes
                    # (p, q, r, s) = (below-left, above-left, below-right,
                    # above-right); the edge belongs to q and r.
                    self.edge_orient[e] = 0
                    q = self.plaquette_id(g, x)
                    rr = self.plaquette_id(g - 1, x + 1)
                    self.edge_plaquettes[e] = (q, rr)
                    self.edge_surround[e] = (
                        self.plaquette_id(g - 1, x - 1), q, rr,
                        self.plaquette_id(g, x + 2))
                else:
                    # "\" edge: high end left; belongs to q (below the high
                    # end) and r (above the low end).
                    self.edge_orient[e] = 2
                    q = self.plaquette_id(g - 1, x)
                    rr = self.plaquette_id(g, x + 1)
                    self.edge_plaquettes[e] = (rr, q)
                    self.edge_surround[e] = (
                        self.plaquette_id(g, x - 1), q, rr,
                        self.plaquette_id(g - 1, x + 2))
        for r in range(d):
            for x in range((r + 1) % 2, 2 * d, 2):
                e = self.vertical_id(r, x)
                self.edge_kind[e] = 1
                self.edge_row[e] = r
                self.edge_x[e] = x
                a = self.vertex_id(r, x)
                b = self.vertex_id(r + 1, x)
                self.edge_endpoints[e] = (a, b)
                self.edge_orient[e] = 1
                left = self.plaquette_id(r, x - 1)
                right = self.plaquette_id(r, x + 1)
                self.edge_plaquettes[e] = (left, right)
                self.edge_surround[e] = (
                    self.plaquette_id(r - 1, x), left, right,
                    self.plaquette_id(r + 1, x))

        self.vertex_edges = [[] for _ in range(self.n_vertices)]
        for e in range(n):
            for v in self.edge_endpoints[e]:
                self.vertex_edges[v].append(e)
        for v in range(self.n_vertices):
            self.vertex_edges[v].sort()
            assert len(self.vertex_edges[v]) == 3
        self.vertex_edges = np.array(self.vertex_edges, dtype=np.int32)

    def _build_plaquettes(self) -> None:
        d = self.d
        self.plaq_row = np.zeros(self.n_plaquettes, dtype=np.int32)
        self.plaq_x = np.zeros(self.n_plaquettes, dtype=np.int32)
        self.plaq_hexagon = np.zeros((self.n_plaquettes, 6), dtype=np.int32)
        self.plaq_support = np.zeros((self.n_plaquettes, 12), dtype=np.int32)
        self.plaq_vertices = np.zeros((self.n_plaquettes, 6), dtype=np.int32)
        for r in range(d):
            for x in range(r % 2, 2 * d, 2):
                p = self.plaquette_id(r, x)
                self.plaq_row[p] = r
                self.plaq_x[p] = x
                # Hexagon edge positions 1..6: right vertical, bottom-right
                # slant, bottom-left slant, left vertical, top-left slant,
                # top-right slant.  Leg k+6 hangs off the vertex between
                # hexagon edges k and k+1.
                hexagon = [
                    self.vertical_id(r, x + 1),
                    self.slant_id(r, x),
                    self.slant_id(r, x - 1),
                    self.vertical_id(r, x - 1),
                    self.slant_id(r + 1, x - 1),
                    self.slant_id(r + 1, x),
                ]
                legs = [
                    self.slant_id(r, x + 1),      # at bottom-right vertex
                    self.vertical_id(r - 1, x),   # at bottom vertex
                    self.slant_id(r, x - 2),      # at bottom-left vertex
                    self.slant_id(r + 1, x - 2),  # at top-left vertex
                    self.vertical_id(r + 1, x),   # at top vertex
                    self.slant_id(r + 1, x + 1),  # at top-right vertex
                ]
                self.plaq_hexagon[p] = hexagon
                self.plaq_support[p] = hexagon + legs
                # Vertices in the same cyclic order as the hexagon edges:
                # vertex k sits between hexagon edges k and k+1.
                self.plaq_vertices[p] = [
                    self.vertex_id(r, x + 1),      # bottom-right
                    self.vertex_id(r, x),          # bottom
                    self.vertex_id(r, x - 1),      # bottom-left
                    self.vertex_id(r + 1, x - 1),  # top-left
                    self.vertex_id(r + 1, x),      # top
                    self.vertex_id(r + 1, x + 1),  # top-right
                ]

    def _build_masks(self) -> None:
        self.star_mask = [0] * self.n_vertices
        for v in range(self.n_vertices):
            m = 0
            for e in self.vertex_edges[v]:
                m |= 1 << int(e)
            self.star_mask[v] = m
        self.hex_mask = [0] * self.n_plaquettes
        self.support_mask = [0] * self.n_plaquettes
        for p in range(self.n_plaquettes):
            m = 0
            for e in self.plaq_hexagon[p]:
                m |= 1 << int(e)
            self.hex_mask[p] = m
            s = 0
            for e in self.plaq_support[p]:
                s |= 1 << int(e)
            self.support_mask[p] = s
        # per-edge incidence masks, used by the syndrome hot path
        self.edge_vertex_mask = [
            (1 << int(a)) | (1 << int(b)) for a, b in self.edge_endpoints]
        self.edge_hex_bits = [
            (1 << int(a)) ^ (1 << int(b)) for a, b in self.edge_plaquettes]

    def _build_cuts(self) -> None:
        d = self.d
        # Primal horizontal cycle: the full bottom zigzag row.
        self.cut_primal_h = [self.slant_id(0, x) for x in range(2 * d)]
        # Primal vertical cycle: staircase of slant+vertical pairs.
        self.cut_primal_v = []
        for g in range(d):
            self.cut_primal_v.append(self.slant_id(g, g))
            self.cut_primal_v.append(self.vertical_id(g, g + 1))
        # Dual horizontal cycle: the verticals of hexagon row 0.
        self.cut_dual_h = [self.vertical_id(0, x) for x in range(1, 2 * d, 2)]
        # Dual vertical cycle: staircase of slants, one per zigzag row,
        # offset to stay disjoint from the primal staircase.
        self.cut_dual_v = [self.slant_id(g + 1, 2 + g) for g in range(d)]

        def mask(edges):
            m = 0
            for e in edges:
                m |= 1 << e
            return m

        self.cut_primal_h_mask = mask(self.cut_primal_h)
        self.cut_primal_v_mask = mask(self.cut_primal_v)
        self.cut_dual_h_mask = mask(self.cut_dual_h)
        self.cut_dual_v_mask = mask(self.cut_dual_v)

        # Frame representatives of the four logical generators.  The
        # X-type operator on the horizontal path is negative-chirality, so
        # it carries a parallel dual Z-loop alongside its X-support.
        self.logical_frames = {
            "X1": (self.cut_primal_h_mask, self.cut_dual_h_mask),
            "Z1": (0, self.cut_dual_v_mask),
            "X2": (self.cut_primal_v_mask, 0),
            "Z2": (0, self.cut_dual_h_mask),
        }

    def _build_graphs(self) -> None:
        # Neighbor lists sorted by edge id give deterministic shortest
        # paths (lexicographically smallest edge-id sequence).
        self.primal_adj = [[] for _ in range(self.n_vertices)]
        for e in range(self.n_edges):
            a, b = self.edge_endpoints[e]
            self.primal_adj[a].append((e, int(b)))
            self.primal_adj[b].append((e, int(a)))
        for lst in self.primal_adj:
            lst.sort()
        self.dual_adj = [[] for _ in range(self.n_plaquettes)]
        for e in range(self.n_edges):
            a, b = self.edge_plaquettes[e]
            self.dual_adj[a].append((e, int(b)))
            self.dual_adj[b].append((e, int(a)))
        for lst in self.dual_adj:
            lst.sort()
        self.primal_dist = _all_pairs_bfs(self.primal_adj)
        self.dual_dist = _all_pairs_bfs(self.dual_adj)

    # -- translations --------------------------------------------------------

    @lru_cache(maxsize=None)
    def translation(self, a: int, b: int):
        """Permutations (edges, plaquettes, vertices) of the translation by
        a rows up and b cells right: (row, x) -> (row + a, x + a + 2b)."""
        d = self.d
        edge_perm = np.zeros(self.n_edges, dtype=np.int32)
        for e in range(self.n_edges):
            row, x = int(self.edge_row[e]), int(self.edge_x[e])
            if self.edge_kind[e] == 0:
                edge_perm[e] = self.slant_id(row + a, x + a + 2 * b)
            else:
                edge_perm[e] = self.vertical_id(row + a, x + a + 2 * b)
        plaq_perm = np.zeros(self.n_plaquettes, dtype=np.int32)
        for p in range(self.n_plaquettes):
            plaq_perm[p] = self.plaquette_id(
                int(self.plaq_row[p]) + a, int(self.plaq_x[p]) + a + 2 * b)
        vert_perm = np.zeros(self.n_vertices, dtype=np.int32)
        for g in range(d):
            for x in range(2 * d):
                vert_perm[self.vertex_id(g, x)] = self.vertex_id(
                    g + a, x + a + 2 * b)
        return edge_perm, plaq_perm, vert_perm

    # -- spec-facing queries (1-based ids, matching the figure labels) -------

    def plaquette_support_1b(self, p: int) -> list[int]:
        """Ordered 12-edge support of plaquette p (1-based ids)."""
        if not 1 <= p <= self.n_plaquettes:
            raise ValueError(f"invalid plaquette id {p}")
        return [int(e) + 1 for e in self.plaq_support[p - 1]]

    def plaquette_hexagon_1b(self, p: int) -> list[int]:
        if not 1 <= p <= self.n_plaquettes:
            raise ValueError(f"invalid plaquette id {p}")
        return [int(e) + 1 for e in self.plaq_hexagon[p - 1]]

    def edge_orientation_1b(self, e: int) -> str:
        if not 1 <= e <= self.n_edges:
            raise ValueError(f"invalid edge id {e}")
        return ORIENTATION_NAMES[self.edge_orient[e - 1]]

    def edge_surround_1b(self, e: int) -> tuple[int, int, int, int]:
        """The four plaquettes (p, q, r, s) around edge e, in the fixed
        orientation-dependent order used by the single-flip syndrome table."""
        if not 1 <= e <= self.n_edges:
            raise ValueError(f"invalid edge id {e}")
        return tuple(int(p) + 1 for p in self.edge_surround[e - 1])

    def shortest_path(self, kind: str, a: int, b: int) -> list[int]:
        """Deterministic shortest path between two 1-based sites.

        kind "primal" walks vertex-to-vertex along edges; "dual" walks
        plaquette-to-plaquette across shared edges.  Returns edge ids
        (1-based); ties broken by smallest lexicographic edge-id sequence.
        """
        if kind not in ("primal", "dual"):
            raise ValueError(f"kind must be primal or dual, got {kind!r}")
        n = self.n_vertices if kind == "primal" else self.n_plaquettes
        if not (1 <= a <= n and 1 <= b <= n):
            raise ValueError(f"invalid {kind} site ids ({a}, {b})")
        mask = self.path_mask(kind, a - 1, b - 1)
        return [e + 1 for e in bits(mask)]

    # -- path machinery (0-based, used by the decoders) ----------------------

    def path_mask(self, kind: str, a: int, b: int) -> int:
        """Edge bit-mask of the deterministic shortest path a -> b."""
        if a == b:
            return 0
        key = (0 if kind == "primal" else 1, a, b)
        cached = self._path_cache.get(key)
        if cached is not None:
            return cached
        adj = self.primal_adj if kind == "primal" else self.dual_adj
        dist = self.primal_dist if kind == "primal" else self.dual_dist
        mask = 0
        cur = a
        while cur != b:
            for e, nxt in adj[cur]:
                if dist[nxt, b] == dist[cur, b] - 1:
                    mask |= 1 << e
                    cur = nxt
                    break
            else:  # pragma: no cover - BFS guarantees progress
                raise RuntimeError("path reconstruction failed")
        self._path_cache[key] = mask
        return mask

    # -- debug ---------------------------------------------------------------

    def dump(self) -> str:
        """Text rendering of vertex/plaquette/edge ids for fixture diffing."""
        lines = [f"distance {self.d}: {self.n_vertices} vertices, "
                 f"{self.n_plaquettes} plaquettes, {self.n_edges} edges"]
        for g in range(self.d):
            verts = [self.vertex_id(g, x) + 1 for x in range(2 * self.d)]
            lines.append(f"zigzag row {g}: vertices {verts}")
            slants = [self.slant_id(g, x) + 1 for x in range(2 * self.d)]
            lines.append(f"zigzag row {g}: slant edges {slants}")
            plaqs = [self.plaquette_id(g, x) + 1
                     for x in range(g % 2, 2 * self.d, 2)]
            verticals = [self.vertical_id(g, x) + 1
                         for x in range((g + 1) % 2, 2 * self.d, 2)]
            lines.append(f"hex row {g}: plaquettes {plaqs} "
                         f"verticals {verticals}")
        return "\n".join(lines)


def _all_pairs_bfs(adj) -> np.ndarray:
    n = len(adj)
    dist = np.full((n, n), -1, dtype=np.int16)
    for s in range(n):
        row = dist[s]
        row[s] = 0
        frontier = [s]
        dcur = 0
        while frontier:
            dcur += 1
            nxt = []
            for u in frontier:
                for _, v in adj[u]:
                    if row[v] < 0:
                        row[v] = dcur
                        nxt.append(v)
            frontier = nxt
    return dist


def bits(mask: int) -> list[int]:
    """Indices of set bits, ascending."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def mask_of(edges) -> int:
    m = 0
    for e in edges:
        m |= 1 << int(e)
    return m


def build_lattice(d: int) -> CodeLattice:
    """Build the distance-d hexagonal torus; rejects d < 2."""
    return CodeLattice(d)
