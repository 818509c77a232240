"""Constructed cubic hosts with long geodesics and controlled local
structure, used to exercise the geodesic-colouring cases and tests.

All builders certify their geodesic by BFS before returning. Free valences
are closed with 5-vertex caps (K4 minus an edge plus an apex), which attach
through a bridge and therefore never create shortcuts or shared
neighbourhoods.
"""

from __future__ import annotations

from random import Random
from typing import Optional

from .colouring import RED, BLUE, UNCOLOURED, Colouring
from .graph import CubicGraph, Geodesic, is_geodesic


class _Builder:
    def __init__(self):
        self.edges: list[tuple[int, int]] = []
        self.n = 0
        self.deg: dict[int, int] = {}

    def vertex(self) -> int:
        v = self.n
        self.n += 1
        return v

    def vertices(self, k: int) -> list[int]:
        return [self.vertex() for _ in range(k)]

    def edge(self, u: int, v: int) -> None:
        assert u != v
        self.edges.append((u, v))
        self.deg[u] = self.deg.get(u, 0) + 1
        self.deg[v] = self.deg.get(v, 0) + 1

    def cap(self, v: int) -> None:
        a, b, c, d, w = self.vertices(5)
        for (x, y) in ((a, b), (a, c), (a, d), (b, c), (b, d), (c, w), (d, w)):
            self.edge(x, y)
        self.edge(w, v)

    def close(self) -> CubicGraph:
        for v in range(self.n):
            while self.deg.get(v, 0) < 3:
                self.cap(v)
        return CubicGraph(self.n, self.edges)


def _finish(b: _Builder, path: list[int]) -> tuple[CubicGraph, Geodesic]:
    g = b.close()
    geo = Geodesic(tuple(path))
    assert is_geodesic(g, path), "fixture path is not a geodesic"
    return g, geo


def comb_fixture(case: str, ell: int,
                 L: Optional[int] = None) -> tuple[CubicGraph, Geodesic]:
    """Caterpillar host for the comb cases.

    Case II is a plain ladder (pendants chained); Cases I and III use a
    mirror path with paired pendants, Case III inserting one external
    common neighbour for the pendants at the witness index.
    """
    if L is None:
        L = ell + 40
    b = _Builder()
    p = b.vertices(L + 1)
    for i in range(L):
        b.edge(p[i], p[i + 1])
    pend = {i: b.vertex() for i in range(1, L)}
    for i in range(1, L):
        b.edge(p[i], pend[i])
    if case == "II":
        for i in range(1, L - 1):
            b.edge(pend[i], pend[i + 1])
        return _finish(b, p)
    # mirror path keeps P a geodesic while pendant pairs stay independent
    q = {i: b.vertex() for i in range(1, L)}
    for i in range(1, L - 1):
        b.edge(q[i], q[i + 1])
    for i in range(1, L):
        b.edge(pend[i], q[i])
    s = None
    if case == "III":
        s = (L - ell) // 2
        if s % 2 == 0:
            s += 1
        w = b.vertex()
        b.edge(pend[s - 1], w)
        b.edge(pend[s + 1], w)
    paired = set()
    if case == "III":
        paired.update((s - 1, s + 1))
    for k in range(1, L, 2):
        if k + 1 < L and k not in paired and k + 1 not in paired:
            b.edge(pend[k], pend[k + 1])
    if case == "I":
        return _finish(b, p)
    if case == "III":
        return _finish(b, p)
    raise ValueError(f"unknown comb case {case!r}")


def gadget_fixture(case: str, ell: int,
                   L: Optional[int] = None) -> tuple[CubicGraph, Geodesic]:
    """Ladder-backed host for the staged route: a clean ladder falls back
    to the comb; 'I' plants an exceptional copy mid-path, 'II' one shared
    neighbour of a consecutive pair, 'III' one shared outside neighbour of
    a distance-2 pair."""
    if L is None:
        L = 5 * ell + 220
    t = L // 2
    b = _Builder()
    p = b.vertices(L + 1)
    for i in range(L):
        b.edge(p[i], p[i + 1])
    skip: set[int] = set()
    if case == "I":
        skip = set(range(t, t + 5))
        y1, y2, y3 = b.vertices(3)
        b.edge(p[t], y1)
        b.edge(p[t + 1], y1)
        b.edge(p[t + 2], y2)
        b.edge(p[t + 3], y3)
        b.edge(p[t + 4], y3)
        b.edge(y1, y2)
        b.edge(y2, y3)
    elif case == "II":
        skip = {t, t + 1}
        w = b.vertex()
        b.edge(p[t], w)
        b.edge(p[t + 1], w)
    elif case == "III":
        skip = {t - 1, t + 1}
        w = b.vertex()
        b.edge(p[t - 1], w)
        b.edge(p[t + 1], w)
    elif case != "fallback":
        raise ValueError(f"unknown gadget case {case!r}")
    pend = {}
    for i in range(1, L):
        if i in skip:
            continue
        pend[i] = b.vertex()
        b.edge(p[i], pend[i])
    idx = sorted(pend)
    for a, c in zip(idx, idx[1:]):
        if c == a + 1:
            b.edge(pend[a], pend[c])
    return _finish(b, p)


def prism_host(m: int) -> CubicGraph:
    """Circular ladder CL_m: diameter ~ m/2, every rim path a geodesic."""
    assert m >= 3
    edges = []
    for i in range(m):
        j = (i + 1) % m
        edges.append((i, j))
        edges.append((m + i, m + j))
        edges.append((i, m + i))
    return CubicGraph(2 * m, edges)


def plant_e4_bad(g: CubicGraph, rng: Random,
                 plants: int = 1) -> Optional[Colouring]:
    """Partial colouring with `plants` planted E4-bad cycles: odd cycles
    left uncoloured whose vertices (except at most two) get a coloured
    third edge. Returns None when the graph resists (caller reseeds)."""
    from .colouring import enumerate_e4_bad, check_e1, enumerate_e3_bad
    cycles = _odd_cycles(g, rng, want=plants, max_len=9)
    if len(cycles) < plants:
        return None
    chi = Colouring(g)
    used = set()
    planted = 0
    for cyc in cycles:
        if planted == plants:
            break
        if any(v in used for v in cyc):
            continue
        ok = True
        stems = []
        for v in cyc[:-2] if len(cyc) > 3 else cyc[:1]:
            prv = cyc[cyc.index(v) - 1]
            nxt = cyc[(cyc.index(v) + 1) % len(cyc)]
            w, e = g.third_neighbour(v, prv, nxt)
            if w in used or w in cyc:
                ok = False
                break
            stems.append((v, w, e))
        if not ok:
            continue
        for (v, w, e) in stems:
            if chi.values[e] != UNCOLOURED:
                continue
            # alternate colours; keep E1 at far endpoints
            far_r = sum(1 for k in range(3) if chi.values[g.eid[3 * w + k]] == RED)
            far_b = sum(1 for k in range(3) if chi.values[g.eid[3 * w + k]] == BLUE)
            if far_r and not far_b:
                chi.values[e] = BLUE
            elif far_b and not far_r:
                chi.values[e] = RED
            else:
                chi.values[e] = RED if rng.getrandbits(1) else BLUE
        used.update(cyc)
        for (_, w, _) in stems:
            used.add(w)
        planted += 1
    if planted < plants:
        return None
    if check_e1(g, chi) is not None or enumerate_e3_bad(g, chi):
        return None
    if not enumerate_e4_bad(g, chi):
        return None
    return chi


def _odd_cycles(g: CubicGraph, rng: Random, want: int,
                max_len: int) -> list[list[int]]:
    """Short odd cycles found from random BFS roots (vertex lists)."""
    out = []
    seen_sets = []
    starts = list(range(g.n))
    rng.shuffle(starts)
    for root in starts:
        if len(out) >= want * 3:
            break
        parent = {root: -1}
        depth = {root: 0}
        queue = [root]
        qi = 0
        found = None
        while qi < len(queue) and found is None:
            v = queue[qi]
            qi += 1
            if depth[v] > max_len // 2:
                break
            for k in range(3):
                w = g.nbr[3 * v + k]
                if w not in depth:
                    depth[w] = depth[v] + 1
                    parent[w] = v
                    queue.append(w)
                elif parent[v] != w and depth[w] == depth[v]:
                    # odd cycle through the two BFS branches
                    pa, pb = v, w
                    left, right = [v], [w]
                    while pa != pb:
                        pa, pb = parent[pa], parent[pb]
                        left.append(pa)
                        right.append(pb)
                    cyc = left + right[-2::-1]
                    if len(cyc) % 2 == 1 and len(set(cyc)) == len(cyc) \
                            and len(cyc) <= max_len:
                        found = cyc
                        break
        if found and not any(set(found) & s for s in seen_sets):
            out.append(found)
            seen_sets.append(set(found))
    return out
