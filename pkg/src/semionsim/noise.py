"""Pauli noise models and full syndrome sampling.

Errors are sampled as Pauli frames (X/Z bit-masks per edge).  The
vertex syndrome and the Z-part plaquette flips are deterministic; the
X-part plaquette syndrome is probabilistic and sampled per connected
X-cluster from its exact sector distribution, with the max-amplitude
sector representative kept as the residual Z string.

All randomness is counter-based: each sample owns a Philox stream keyed
by (master seed, sample index), so results are bit-identical for any
worker count or call order.  Cluster distributions are cached by
translation-canonical shape; clusters whose support exceeds the cap are
split into edge-disjoint paths sampled independently (flagged).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from semionsim import algebra
from semionsim.lattice import CodeLattice, bits
from semionsim.rng import SampleStream

DEFAULT_CAP = algebra.DEFAULT_CAP


@dataclass(frozen=True)
class NoiseModel:
    kind: str        # "independent" or "depolarizing"
    p_x: float
    p_y: float
    p_z: float
    p_eff: float
    p0: float | None = None

    @property
    def p(self) -> float:
        return self.p_x + self.p_y + self.p_z

    @classmethod
    def independent(cls, p0: float | None = None,
                    p_eff: float | None = None) -> "NoiseModel":
        """Independent bit-flip and phase noise, each at rate p0."""
        if (p0 is None) == (p_eff is None):
            raise ValueError("give exactly one of p0, p_eff")
        if p0 is None:
            p0 = 1.0 - math.sqrt(1.0 - p_eff)
        if not 0 <= p0 < 1:
            raise ValueError(f"p0 out of range: {p0}")
        return cls("independent", p0 - p0 * p0, p0 * p0, p0 - p0 * p0,
                   2 * p0 - p0 * p0, p0)

    @classmethod
    def depolarizing(cls, p_eff: float) -> "NoiseModel":
        if not 0 <= p_eff < 1:
            raise ValueError(f"p_eff out of range: {p_eff}")
        return cls("depolarizing", p_eff / 3, p_eff / 3, p_eff / 3, p_eff)


@dataclass
class PauliFrame:
    x_mask: int = 0
    z_mask: int = 0

    def __xor__(self, other: "PauliFrame") -> "PauliFrame":
        return PauliFrame(self.x_mask ^ other.x_mask,
                          self.z_mask ^ other.z_mask)


@dataclass
class SyndromeSample:
    vertex_bits: int
    plaquette_bits: int
    residual_zq: int
    used_fallback: bool = False
    wrapped_component: bool = False
    master_seed: int = 0
    sample_index: int = 0


def sample_rng(master_seed: int, sample_index: int) -> SampleStream:
    """Counter-based per-sample stream; independent of worker scheduling."""
    return SampleStream(master_seed, sample_index)


def sample_error(model: NoiseModel, lat: CodeLattice,
                 rng: SampleStream) -> PauliFrame:
    """I.i.d. per edge: identity w.p. 1-p, else X/Y/Z w.p. p_X/p_Y/p_Z."""
    u = rng.random(lat.n_edges)
    t = rng.random(lat.n_edges)
    frame = PauliFrame()
    p = model.p
    if p == 0:
        return frame
    for e in np.flatnonzero(u < p):
        r = t[e] * p
        if r < model.p_x:
            frame.x_mask |= 1 << int(e)
        elif r < model.p_x + model.p_y:
            frame.x_mask |= 1 << int(e)
            frame.z_mask |= 1 << int(e)
        else:
            frame.z_mask |= 1 << int(e)
    return frame


def vertex_syndrome(lat: CodeLattice, frame_or_mask) -> int:
    """Vertex v excited iff an odd number of its edges carry X."""
    x_mask = getattr(frame_or_mask, "x_mask", frame_or_mask)
    out = 0
    for e in bits(x_mask):
        out ^= lat.edge_vertex_mask[e]
    return out


def z_plaquette_flips(lat: CodeLattice, z_mask: int) -> int:
    """Plaquette p flips iff z_mask overlaps its hexagon oddly."""
    out = 0
    for e in bits(z_mask):
        out ^= lat.edge_hex_bits[e]
    return out


def x_components(lat: CodeLattice, x_mask: int) -> list[list[int]]:
    """Connected components of the X-support, ordered by smallest edge."""
    edges = bits(x_mask)
    if not edges:
        return []
    vert_edges: dict[int, list[int]] = {}
    for e in edges:
        for v in lat.edge_endpoints[e]:
            vert_edges.setdefault(int(v), []).append(e)
    seen = set()
    comps = []
    for e0 in edges:
        if e0 in seen:
            continue
        comp = [e0]
        seen.add(e0)
        stack = [e0]
        while stack:
            e = stack.pop()
            for v in lat.edge_endpoints[e]:
                for e2 in vert_edges[int(v)]:
                    if e2 not in seen:
                        seen.add(e2)
                        comp.append(e2)
                        stack.append(e2)
        comps.append(sorted(comp))
    return comps


class _CachedCluster:
    """Sector distribution of one canonical cluster shape."""

    __slots__ = ("support", "plaquettes", "cum", "patterns", "reps",
                 "wrapped", "paths")

    def __init__(self, dist: algebra.SyndromeDistribution):
        self.support = dist.support
        self.plaquettes = dist.plaquettes
        total = dist.probs.sum()
        self.cum = np.cumsum(dist.probs / total)
        self.patterns = dist.patterns
        self.reps = dist.reps
        self.wrapped = dist.wrapped
        self.paths = None


class ClusterSampler:
    """Per-lattice cache of exact cluster distributions.

    Shapes are canonicalized over the d^2 lattice translations, so all
    translates of a cluster share one solved table.
    """

    def __init__(self, lat: CodeLattice, cap: int = DEFAULT_CAP):
        self.lat = lat
        self.cap = cap
        self._cache: dict[tuple, _CachedCluster | None] = {}
        self._canon: dict[tuple, tuple] = {}
        self._translations = [
            lat.translation(a, b)
            for a in range(lat.d) for b in range(lat.d)]
        self._inverse = {}
        d = lat.d
        for i, (a, b) in enumerate(
                (a, b) for a in range(d) for b in range(d)):
            self._inverse[(a, b)] = ((d - a) % d, (d - b) % d)
        self._keys = [(a, b) for a in range(d) for b in range(d)]

    def _canonical(self, comp: tuple) -> tuple[tuple, tuple]:
        hit = self._canon.get(comp)
        if hit is not None:
            return hit
        best = None
        best_t = None
        for (a, b), (eperm, _, _) in zip(self._keys, self._translations):
            cand = tuple(sorted(int(eperm[e]) for e in comp))
            if best is None or cand < best:
                best = cand
                best_t = (a, b)
        self._canon[comp] = (best, best_t)
        return best, best_t

    def _lookup(self, key: tuple) -> _CachedCluster:
        entry = self._cache.get(key)
        if entry is None:
            try:
                entry = _CachedCluster(
                    algebra.syndrome_distribution(self.lat, list(key),
                                                  cap=self.cap))
            except algebra.CapExceeded:
                entry = _CachedCluster.__new__(_CachedCluster)
                entry.support = None
                entry.paths = split_into_paths(self.lat, list(key), self.cap)
                entry.wrapped = False
            self._cache[key] = entry
        return entry

    def sample(self, comp: list[int], rng: SampleStream
               ) -> tuple[int, int, bool, bool]:
        """(plaquette flip mask, residual Z mask, used_fallback, wrapped)."""
        key, (a, b) = self._canonical(tuple(comp))
        entry = self._lookup(key)
        ia, ib = self._inverse[(a, b)]
        eperm, pperm, _ = self.lat.translation(ia, ib)
        if entry.support is not None:
            u = rng.random()
            k = int(np.searchsorted(entry.cum, u, side="right"))
            k = min(k, len(entry.cum) - 1)
            pattern = int(entry.patterns[k])
            rep = int(entry.reps[k])
            flip = 0
            for i, p in enumerate(entry.plaquettes):
                if (pattern >> i) & 1:
                    flip |= 1 << int(pperm[p])
            residual = 0
            for i, e in enumerate(entry.support):
                if (rep >> i) & 1:
                    residual |= 1 << int(eperm[e])
            return flip, residual, False, entry.wrapped
        # over-cap cluster: sample each split path independently
        flip = 0
        residual = 0
        wrapped = False
        for path in entry.paths:
            global_path = sorted(int(eperm[e]) for e in path)
            f, r, _, w = self.sample(global_path, rng)
            flip ^= f
            residual ^= r
            wrapped = wrapped or w
        return flip, residual, True, wrapped


def split_into_paths(lat: CodeLattice, comp: list[int],
                     cap: int) -> list[list[int]]:
    """Split a cluster into edge-disjoint simple paths under the cap.

    Odd-degree vertices are paired greedily by in-cluster path length,
    the connecting paths peeled off, then the remaining even subgraph is
    peeled into closed walks; anything still over the cap is halved.
    """
    edges = set(comp)
    adj: dict[int, list[int]] = {}
    for e in comp:
        for v in lat.edge_endpoints[e]:
            adj.setdefault(int(v), []).append(e)

    def degree(v):
        return sum(1 for e in adj[v] if e in edges)

    def bfs_path(src, targets):
        # shortest walk within the remaining cluster edges
        prev = {src: (None, None)}
        frontier = [src]
        while frontier:
            nxt = []
            for u in frontier:
                for e in sorted(adj[u]):
                    if e not in edges:
                        continue
                    a, b = (int(x) for x in lat.edge_endpoints[e])
                    w = b if a == u else a
                    if w not in prev:
                        prev[w] = (u, e)
                        if w in targets:
                            path = []
                            cur = w
                            while prev[cur][0] is not None:
                                path.append(prev[cur][1])
                                cur = prev[cur][0]
                            return path
                        nxt.append(w)
            frontier = nxt
        return None

    pieces: list[list[int]] = []
    odd = sorted(v for v in adj if degree(v) % 2)
    while odd:
        src = odd[0]
        path = bfs_path(src, set(odd[1:]))
        assert path is not None
        edges.difference_update(path)
        pieces.append(sorted(path))
        odd = sorted(v for v in adj if v in adj and
                     sum(1 for e in adj[v] if e in edges) % 2)
    while edges:
        # peel a closed walk starting from the smallest remaining edge
        e0 = min(edges)
        walk = [e0]
        edges.discard(e0)
        start, cur = (int(v) for v in lat.edge_endpoints[e0])
        while cur != start:
            for e in sorted(adj[cur]):
                if e in edges:
                    walk.append(e)
                    edges.discard(e)
                    a, b = (int(x) for x in lat.edge_endpoints[e])
                    cur = b if a == cur else a
                    break
            else:  # open ends can appear if the walk self-intersects
                break
        pieces.append(sorted(walk))

    out: list[list[int]] = []
    stack = list(pieces)
    while stack:
        piece = stack.pop(0)
        if len(algebra.connected_support(lat, piece)) <= cap:
            out.append(piece)
        else:
            half = len(piece) // 2
            for part in x_components(lat, _mask(piece[:half])):
                stack.append(part)
            for part in x_components(lat, _mask(piece[half:])):
                stack.append(part)
    return out


def _mask(edges):
    m = 0
    for e in edges:
        m |= 1 << e
    return m


def sample_plaquette_syndrome(
    lat: CodeLattice,
    x_mask: int,
    rng: SampleStream,
    sampler: ClusterSampler | None = None,
) -> tuple[int, int, bool, bool]:
    """Sample the probabilistic plaquette syndrome of the X-part.

    Returns (plaquette bits, residual Z mask, used_fallback, wrapped).
    """
    if sampler is None:
        sampler = get_sampler(lat)
    flip = 0
    residual = 0
    fallback = False
    wrapped = False
    for comp in x_components(lat, x_mask):
        f, r, fb, w = sampler.sample(comp, rng)
        flip ^= f
        residual ^= r
        fallback = fallback or fb
        wrapped = wrapped or w
    return flip, residual, fallback, wrapped


_SAMPLERS: dict[tuple[int, int], ClusterSampler] = {}


def get_sampler(lat: CodeLattice, cap: int = DEFAULT_CAP) -> ClusterSampler:
    key = (id(lat), cap)
    sampler = _SAMPLERS.get(key)
    if sampler is None:
        sampler = ClusterSampler(lat, cap)
        _SAMPLERS[key] = sampler
    return sampler


def sample_syndrome(
    lat: CodeLattice,
    frame: PauliFrame,
    rng: SampleStream,
    sampler: ClusterSampler | None = None,
    master_seed: int = 0,
    sample_index: int = 0,
) -> SyndromeSample:
    """Full semion syndrome: deterministic vertex bits and Z flips plus
    the sampled X-part plaquette pattern and its residual Z string."""
    vbits = vertex_syndrome(lat, frame.x_mask)
    zflips = z_plaquette_flips(lat, frame.z_mask)
    xflips, residual, fallback, wrapped = sample_plaquette_syndrome(
        lat, frame.x_mask, rng, sampler)
    return SyndromeSample(
        vertex_bits=vbits,
        plaquette_bits=zflips ^ xflips,
        residual_zq=residual,
        used_fallback=fallback,
        wrapped_component=wrapped,
        master_seed=master_seed,
        sample_index=sample_index,
    )


def kitaev_hex_syndrome(lat: CodeLattice, frame: PauliFrame,
                        master_seed: int = 0,
                        sample_index: int = 0) -> SyndromeSample:
    """CSS syndromes on the same lattice: bare hexagon X-stabilizers, so
    the X-part flips no plaquettes and there is no residual."""
    return SyndromeSample(
        vertex_bits=vertex_syndrome(lat, frame.x_mask),
        plaquette_bits=z_plaquette_flips(lat, frame.z_mask),
        residual_zq=0,
        master_seed=master_seed,
        sample_index=sample_index,
    )
