"""Exact minimum-weight perfect matching on small complete graphs.

Primal-dual blossom algorithm, O(n^3), operating on a dense integer
weight matrix; compiled with numba for the Monte-Carlo hot path.  The
minimum-weight perfect matching is obtained as a maximum-weight
matching of the flipped weights (big - w), which on a complete graph
with positive weights is always perfect.

`brute_force_minimum` provides the exhaustive pairing oracle used to
verify optimality on small instances.
"""

from __future__ import annotations

import numpy as np
from numba import njit

INF = np.int64(1 << 60)


@njit(cache=True)
def _blossom_max_weight(w: np.ndarray) -> np.ndarray:
    """Maximum-weight matching of the dense symmetric int64 matrix w.

    1-indexed internally; vertex 0 unused.  w[u, v] == 0 means no edge.
    Returns match[1..n] (0 = unmatched).
    """
    n = w.shape[0] - 1
    N = 2 * n + 1
    gw = np.empty((N + 1, N + 1), dtype=np.int64)
    gu = np.empty((N + 1, N + 1), dtype=np.int64)
    gv = np.empty((N + 1, N + 1), dtype=np.int64)
    gw[:] = 0
    for u in range(1, n + 1):
        for v in range(1, n + 1):
            gw[u, v] = w[u, v]
            gu[u, v] = u
            gv[u, v] = v
    lab = np.zeros(N + 1, dtype=np.int64)
    match = np.zeros(N + 1, dtype=np.int64)
    slack = np.zeros(N + 1, dtype=np.int64)
    st = np.zeros(N + 1, dtype=np.int64)
    pa = np.zeros(N + 1, dtype=np.int64)
    S = np.full(N + 1, -1, dtype=np.int64)
    vis = np.zeros(N + 1, dtype=np.int64)
    flower = np.empty((N + 1, N + 2), dtype=np.int64)
    flower_len = np.zeros(N + 1, dtype=np.int64)
    flower_from = np.zeros((N + 1, n + 1), dtype=np.int64)
    queue = np.empty(2 * N * N + 64, dtype=np.int64)
    work = np.empty(N + 2, dtype=np.int64)
    stack = np.empty(4 * N + 16, dtype=np.int64)
    sm_stack = np.empty((2 * N * N + 64, 2), dtype=np.int64)
    # state[0] = queue head, state[1] = queue tail,
    # state[2] = blossom capacity n_x, state[3] = lca timestamp
    state = np.zeros(4, dtype=np.int64)
    state[2] = n

    def e_delta(u, v):
        return lab[gu[u, v]] + lab[gv[u, v]] - 2 * gw[u, v]

    def update_slack(u, x):
        if slack[x] == 0 or e_delta(u, x) < e_delta(slack[x], x):
            slack[x] = u

    def set_slack(x):
        slack[x] = 0
        for u in range(1, n + 1):
            if gw[u, x] > 0 and st[u] != x and S[st[u]] == 0:
                update_slack(u, x)

    def q_push(x0):
        sp = 0
        stack[sp] = x0
        sp += 1
        while sp > 0:
            sp -= 1
            x = stack[sp]
            if x <= n:
                queue[state[1]] = x
                state[1] += 1
            else:
                for i in range(flower_len[x]):
                    stack[sp] = flower[x, i]
                    sp += 1

    def set_st(x0, b):
        sp = 0
        stack[sp] = x0
        sp += 1
        while sp > 0:
            sp -= 1
            x = stack[sp]
            st[x] = b
            if x > n:
                for i in range(flower_len[x]):
                    stack[sp] = flower[x, i]
                    sp += 1

    def get_pr(b, xr):
        pr = 0
        for i in range(flower_len[b]):
            if flower[b, i] == xr:
                pr = i
                break
        if pr % 2 == 1:
            lo = 1
            hi = flower_len[b] - 1
            while lo < hi:
                tmp = flower[b, lo]
                flower[b, lo] = flower[b, hi]
                flower[b, hi] = tmp
                lo += 1
                hi -= 1
            return flower_len[b] - pr
        return pr

    def set_match(u0, v0):
        sp = 0
        sm_stack[sp, 0] = u0
        sm_stack[sp, 1] = v0
        sp += 1
        while sp > 0:
            sp -= 1
            u = sm_stack[sp, 0]
            v = sm_stack[sp, 1]
            match[u] = gv[u, v]
            if u > n:
                xr = flower_from[u, gu[u, v]]
                pr = get_pr(u, xr)
                for i in range(pr):
                    sm_stack[sp, 0] = flower[u, i]
                    sm_stack[sp, 1] = flower[u, i ^ 1]
                    sp += 1
                sm_stack[sp, 0] = xr
                sm_stack[sp, 1] = v
                sp += 1
                ln = flower_len[u]
                for i in range(ln):
                    work[i] = flower[u, (i + pr) % ln]
                for i in range(ln):
                    flower[u, i] = work[i]

    def augment(u, v):
        while True:
            xnv = st[match[u]]
            set_match(u, v)
            if xnv == 0:
                return
            set_match(xnv, st[pa[xnv]])
            nu = st[pa[xnv]]
            v = xnv
            u = nu

    def get_lca(u, v):
        state[3] += 1
        t = state[3]
        while u != 0 or v != 0:
            if u != 0:
                if vis[u] == t:
                    return u
                vis[u] = t
                u = st[match[u]]
                if u != 0:
                    u = st[pa[u]]
            tmp = u
            u = v
            v = tmp
        return 0

    def add_blossom(u, lca, v):
        b = n + 1
        while b <= state[2] and st[b] != 0:
            b += 1
        if b > state[2]:
            state[2] += 1
        lab[b] = 0
        S[b] = 0
        match[b] = match[lca]
        flower_len[b] = 1
        flower[b, 0] = lca
        x = u
        while x != lca:
            flower[b, flower_len[b]] = x
            flower_len[b] += 1
            y = st[match[x]]
            flower[b, flower_len[b]] = y
            flower_len[b] += 1
            q_push(y)
            x = st[pa[y]]
        lo = 1
        hi = flower_len[b] - 1
        while lo < hi:
            tmp = flower[b, lo]
            flower[b, lo] = flower[b, hi]
            flower[b, hi] = tmp
            lo += 1
            hi -= 1
        x = v
        while x != lca:
            flower[b, flower_len[b]] = x
            flower_len[b] += 1
            y = st[match[x]]
            flower[b, flower_len[b]] = y
            flower_len[b] += 1
            q_push(y)
            x = st[pa[y]]
        set_st(b, b)
        n_x = state[2]
        for x in range(1, n_x + 1):
            gw[b, x] = 0
            gw[x, b] = 0
        for x in range(1, n + 1):
            flower_from[b, x] = 0
        for i in range(flower_len[b]):
            xs = flower[b, i]
            for x in range(1, n_x + 1):
                if gw[b, x] == 0 or e_delta(xs, x) < e_delta(b, x):
                    gw[b, x] = gw[xs, x]
                    gu[b, x] = gu[xs, x]
                    gv[b, x] = gv[xs, x]
                    gw[x, b] = gw[x, xs]
                    gu[x, b] = gu[x, xs]
                    gv[x, b] = gv[x, xs]
            for x in range(1, n + 1):
                if flower_from[xs, x] != 0:
                    flower_from[b, x] = xs
        set_slack(b)

    def expand_blossom(b):
        for i in range(flower_len[b]):
            set_st(flower[b, i], flower[b, i])
        xr = flower_from[b, gu[b, pa[b]]]
        pr = get_pr(b, xr)
        i = 0
        while i < pr:
            xs = flower[b, i]
            xns = flower[b, i + 1]
            pa[xs] = gu[xns, xs]
            S[xs] = 1
            S[xns] = 0
            slack[xs] = 0
            set_slack(xns)
            q_push(xns)
            i += 2
        S[xr] = 1
        pa[xr] = pa[b]
        for i in range(pr + 1, flower_len[b]):
            xs = flower[b, i]
            S[xs] = -1
            set_slack(xs)
        st[b] = 0

    def on_found_edge(eu, ev):
        u = st[eu]
        v = st[ev]
        if S[v] == -1:
            pa[v] = eu
            S[v] = 1
            nu = st[match[v]]
            slack[v] = 0
            slack[nu] = 0
            S[nu] = 0
            q_push(nu)
        elif S[v] == 0:
            lca = get_lca(u, v)
            if lca == 0:
                augment(u, v)
                augment(v, u)
                return True
            add_blossom(u, lca, v)
        return False

    def matching_round():
        n_x = state[2]
        for x in range(1, n_x + 1):
            S[x] = -1
            slack[x] = 0
        state[0] = 0
        state[1] = 0
        for x in range(1, n_x + 1):
            if st[x] == x and match[x] == 0:
                pa[x] = 0
                S[x] = 0
                q_push(x)
        if state[0] == state[1]:
            return False
        while True:
            while state[0] < state[1]:
                u = queue[state[0]]
                state[0] += 1
                if S[st[u]] == 1:
                    continue
                for v in range(1, n + 1):
                    if gw[u, v] > 0 and st[u] != st[v]:
                        if e_delta(u, v) == 0:
                            if on_found_edge(u, v):
                                return True
                        else:
                            update_slack(u, st[v])
            n_x = state[2]
            d = INF
            for b in range(n + 1, n_x + 1):
                if st[b] == b and S[b] == 1:
                    val = lab[b] // 2
                    if val < d:
                        d = val
            for x in range(1, n_x + 1):
                if st[x] == x and slack[x] != 0:
                    if S[x] == -1:
                        val = e_delta(slack[x], x)
                        if val < d:
                            d = val
                    elif S[x] == 0:
                        val = e_delta(slack[x], x) // 2
                        if val < d:
                            d = val
            for u in range(1, n + 1):
                if S[st[u]] == 0:
                    if lab[u] <= d:
                        return False
                    lab[u] -= d
                elif S[st[u]] == 1:
                    lab[u] += d
            for b in range(n + 1, n_x + 1):
                if st[b] == b:
                    if S[b] == 0:
                        lab[b] += 2 * d
                    elif S[b] == 1:
                        lab[b] -= 2 * d
            state[0] = 0
            state[1] = 0
            for x in range(1, n_x + 1):
                if (st[x] == x and slack[x] != 0 and st[slack[x]] != x
                        and e_delta(slack[x], x) == 0):
                    if on_found_edge(slack[x], x):
                        return True
            for b in range(n + 1, n_x + 1):
                if st[b] == b and S[b] == 1 and lab[b] == 0:
                    expand_blossom(b)
        return False

    for u in range(0, N + 1):
        st[u] = u
    w_max = np.int64(0)
    for u in range(1, n + 1):
        flower_from[u, u] = u
        for v in range(1, n + 1):
            if gw[u, v] > w_max:
                w_max = gw[u, v]
    for u in range(1, n + 1):
        lab[u] = w_max
    while matching_round():
        pass
    return match[1:n + 1].copy()


def min_weight_perfect_matching(dist: np.ndarray) -> list[tuple[int, int]]:
    """Exact minimum-weight perfect matching of a complete graph.

    dist: symmetric (k, k) integer matrix of nonnegative weights, k even.
    Returns the matched index pairs (i < j, 0-based).
    """
    k = int(dist.shape[0])
    if k == 0:
        return []
    if k % 2:
        raise ValueError("perfect matching needs an even vertex count")
    if k == 2:
        return [(0, 1)]
    big = int(dist.max()) + 1
    w = np.zeros((k + 1, k + 1), dtype=np.int64)
    w[1:, 1:] = big - dist
    np.fill_diagonal(w, 0)
    match = _blossom_max_weight(w)
    pairs = []
    for i in range(k):
        j = int(match[i]) - 1
        if j < 0:
            raise RuntimeError("matching is not perfect")
        if i < j:
            pairs.append((i, j))
    return pairs


def matching_weight(dist: np.ndarray, pairs) -> int:
    return int(sum(int(dist[i, j]) for i, j in pairs))


def brute_force_minimum(dist: np.ndarray) -> int:
    """Exhaustive minimum pairing weight; oracle for small instances."""
    k = dist.shape[0]
    if k == 0:
        return 0

    def rec(rest):
        if not rest:
            return 0
        a = rest[0]
        best = None
        for m in range(1, len(rest)):
            b = rest[m]
            sub = rest[1:m] + rest[m + 1:]
            val = int(dist[a, b]) + rec(sub)
            if best is None or val < best:
                best = val
        return best

    return rec(list(range(k)))
