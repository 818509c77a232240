"""Ground truth at desk scale: exhaustive decomposition search over all
2^m colourings with path-fragment pruning, exhaustive generation of small
cubic graphs up to isomorphism, and randomized verification of the gadget
swap semantics.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random
from typing import Iterator, Optional

from .colouring import (BLUE, RED, Colouring, is_isomorphic_linear_forests,
                        profile)
from .graph import CubicGraph, mix_seed, to_graph6
from .union_find import RollbackDSU

SEARCH_EDGE_CAP = 30


def exhaustive_decompose(g: CubicGraph) -> Optional[Colouring]:
    """First (in canonical edge order, red before blue, edge 0 fixed red)
    total colouring splitting the edges into isomorphic linear forests, or
    None when none exists. Deterministic; |E| <= 30."""
    if g.m > SEARCH_EDGE_CAP:
        raise ValueError(f"edge count {g.m} above search cap {SEARCH_EDGE_CAP}")
    if g.m % 2 != 0:
        return None            # classes cannot have equal sizes
    chi = Colouring(g)
    red_deg = [0] * g.n
    blue_deg = [0] * g.n
    dsu = {RED: RollbackDSU(g.n), BLUE: RollbackDSU(g.n)}
    half = g.m // 2
    counts = {RED: 0, BLUE: 0}

    def place(e: int) -> bool:
        if e == g.m:
            return is_isomorphic_linear_forests(g, chi)
        u, v = g.edges[e]
        for c in ((RED,) if e == 0 else (RED, BLUE)):
            if counts[c] == half:
                continue
            degs = red_deg if c == RED else blue_deg
            if degs[u] >= 2 or degs[v] >= 2:
                continue
            if dsu[c].find(u) == dsu[c].find(v):
                continue       # closing a monochromatic cycle
            chi.values[e] = c
            degs[u] += 1
            degs[v] += 1
            dsu[c].union(u, v)
            counts[c] += 1
            if place(e + 1):
                return True
            dsu[c].undo()
            counts[c] -= 1
            degs[u] -= 1
            degs[v] -= 1
            chi.values[e] = 0
        return False

    return chi if place(0) else None


def naive_decompose(g: CubicGraph) -> Optional[Colouring]:
    """Unpruned 2^m meta-oracle used to cross-check the pruned search on
    tiny graphs."""
    if g.m > 16:
        raise ValueError("naive search capped at 16 edges")
    for mask in range(1 << g.m):
        chi = Colouring(g)
        for e in range(g.m):
            chi.values[e] = RED if (mask >> e) & 1 else BLUE
        if is_isomorphic_linear_forests(g, chi):
            return chi
    return None


# ---------------------------------------------------------------------------
# canonical labeling and exhaustive generation
# ---------------------------------------------------------------------------

def _refine_colours(n: int, adj, rounds: int = 4) -> list[int]:
    colours = [0] * n
    for _ in range(rounds):
        sig = [tuple(sorted(colours[w] for w in adj[v])) for v in range(n)]
        pal = {s: i for i, s in enumerate(sorted(set(zip(colours, sig))))}
        colours = [pal[(colours[v], sig[v])] for v in range(n)]
    return colours


def _wl_refinement(n: int, adj, rounds: int = 4) -> tuple:
    return tuple(sorted(_refine_colours(n, adj, rounds)))


def canonical_form(g: CubicGraph) -> tuple:
    """Canonical form: the lexicographically largest adjacency bit string
    in graph6 column order over all vertex orderings. Placing vertex i
    appends exactly the bits against vertices 0..i-1, so prefix pruning is
    sound; ties (automorphisms) are explored but cut quickly."""
    n = g.n
    adj = [set(g.neighbours(v)) for v in range(n)]
    best: Optional[tuple] = None
    placed = [-1] * n
    order = []

    def search(prefix: tuple):
        nonlocal best
        i = len(order)
        if i == n:
            if best is None or prefix > best:
                best = prefix
            return
        scored = []
        for v in range(n):
            if placed[v] >= 0:
                continue
            bits = tuple(1 if order[j] in adj[v] else 0 for j in range(i))
            scored.append((bits, v))
        scored.sort(reverse=True)
        top = scored[0][0]
        for bits, v in scored:
            if bits != top:
                break             # only maximal rows can extend the maximum
            cand = prefix + bits
            if best is not None and cand < best[:len(cand)]:
                continue
            placed[v] = i
            order.append(v)
            search(cand)
            order.pop()
            placed[v] = -1

    search(())
    return best


def _iso_adj(n: int, s1, c1, s2, c2) -> bool:
    """Backtracking isomorphism on adjacency sets with refinement colours.

    The search order interleaves BFS from the first vertex so every placed
    vertex (after the first) has a mapped neighbour, which keeps adjacency
    propagation tight on connected graphs."""
    if sorted(c1) != sorted(c2):
        return False
    order = []
    seen = set()
    stack = [min(range(n), key=lambda v: (c1.count(c1[v]), v))]
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        order.append(v)
        for w in sorted(s1[v]):
            if w not in seen:
                stack.append(w)
    for v in range(n):
        if v not in seen:
            order.append(v)
    mapping = [-1] * n
    used = [False] * n

    def bt(i):
        if i == n:
            return True
        v = order[i]
        anchor = next((x for x in s1[v] if mapping[x] >= 0), None)
        cand = range(n) if anchor is None else s2[mapping[anchor]]
        for w in cand:
            if used[w] or c2[w] != c1[v]:
                continue
            ok = True
            for x in s1[v]:
                mx = mapping[x]
                if mx >= 0 and mx not in s2[w]:
                    ok = False
                    break
            if not ok:
                continue
            mapping[v] = w
            used[w] = True
            if bt(i + 1):
                return True
            mapping[v] = -1
            used[w] = False
        return False

    return bt(0)


def is_isomorphic(g1: CubicGraph, g2: CubicGraph) -> bool:
    """Isomorphism test seeded by iterated-refinement colours."""
    if g1.n != g2.n or g1.m != g2.m:
        return False
    n = g1.n
    s1 = [set(g1.neighbours(v)) for v in range(n)]
    s2 = [set(g2.neighbours(v)) for v in range(n)]
    return _iso_adj(n, s1, _refine_colours(n, s1), s2, _refine_colours(n, s2))


def enumerate_cubic_graphs(n: int, connected_only: bool = True
                           ) -> Iterator[CubicGraph]:
    """All cubic graphs on n vertices up to isomorphism (n <= 10 intended;
    the first vertex's neighbourhood is fixed to {1,2,3} and leaves are
    deduplicated through refinement-invariant buckets plus isomorphism
    tests against stored representatives)."""
    if n % 2 or n < 4:
        return
    buckets: dict[tuple, list[tuple]] = {}   # wl key -> [(adj sets, colours)]
    deg = [0] * n
    adj = [set() for _ in range(n)]

    def emit():
        if connected_only:
            seen = {0}
            stack = [0]
            while stack:
                v = stack.pop()
                for w in adj[v]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            if len(seen) != n:
                return None
        cols = _refine_colours(n, adj)
        wl = tuple(sorted(cols))
        for rep_adj, rep_cols in buckets.get(wl, []):
            if _iso_adj(n, adj, cols, rep_adj, rep_cols):
                return None
        frozen = [set(a) for a in adj]
        buckets.setdefault(wl, []).append((frozen, cols))
        edges = sorted((u, v) for u in range(n) for v in adj[u] if u < v)
        return CubicGraph(n, edges)

    results = []

    def extend(v: int):
        if v == n:
            g = emit()
            if g is not None:
                results.append(g)
            return
        if deg[v] == 3:
            extend(v + 1)
            return
        # complete vertex v with later vertices; so-far-isolated vertices
        # are interchangeable, so only the first of them is ever branched on
        cands = [w for w in range(v + 1, n) if deg[w] < 3 and w not in adj[v]]

        def pick(idx: int, need: int):
            if need == 0:
                extend(v + 1)
                return
            if len(cands) - idx < need:
                return
            tried_isolated = False
            for j in range(idx, len(cands)):
                w = cands[j]
                if deg[w] == 3:
                    continue
                if deg[w] == 0:
                    if tried_isolated:
                        continue
                    tried_isolated = True
                adj[v].add(w)
                adj[w].add(v)
                deg[v] += 1
                deg[w] += 1
                pick(j + 1, need - 1)
                adj[v].remove(w)
                adj[w].remove(v)
                deg[v] -= 1
                deg[w] -= 1

        pick(0, 3 - deg[v])

    # fix vertex 0's neighbourhood (isomorphism-safe)
    for w in (1, 2, 3):
        adj[0].add(w)
        adj[w].add(0)
        deg[w] = 1
    deg[0] = 3
    extend(1)
    yield from results


@dataclass
class SweepEntry:
    graph6: str
    decomposable: bool
    red_profile: dict


def verify_small_range(n_max: int, samples_at_12: int = 200,
                       seed: int = 0) -> list[SweepEntry]:
    """Exhaustively decompose every connected cubic graph with n = 0 mod 4
    up to n_max (exhaustive for n <= 10, seeded samples at n = 12). Any
    non-decomposable entry is a finite counterexample and is surfaced."""
    if n_max > 12:
        raise ValueError("verify_small_range capped at n = 12")
    out = []
    for n in range(4, n_max + 1, 2):
        if n % 4 != 0:
            continue
        if n <= 10:
            graphs = list(enumerate_cubic_graphs(n))
        else:
            from .graph import random_cubic
            graphs = []
            seen = set()
            for s in range(samples_at_12 * 4):
                g = random_cubic(n, seed=mix_seed(seed, s),
                                 require_connected=True)
                key = to_graph6(g)
                if key not in seen:
                    seen.add(key)
                    graphs.append(g)
                if len(graphs) >= samples_at_12:
                    break
        for g in graphs:
            chi = exhaustive_decompose(g)
            prof = profile(g, chi).red_paths if chi is not None else {}
            out.append(SweepEntry(to_graph6(g), chi is not None, dict(prof)))
    return out


def sweep_report(entries: list[SweepEntry]) -> str:
    lines = []
    for e in entries:
        verdict = "decomposable" if e.decomposable else "NOT-DECOMPOSABLE"
        prof = " ".join(f"P{t}x{c}" for t, c in sorted(e.red_profile.items()))
        lines.append(f"{e.graph6} {verdict} [{prof}]")
    return "\n".join(lines) + "\n"


def verify_gadget_semantics(kind: str, ell: int, trials: int,
                            seed: int = 0) -> dict:
    """Over `trials` random host embeddings, check measure_delta against the
    swap contract exactly; any mismatch is returned as a counterexample."""
    from .gadgets import (build_template_host, expected_swap_delta,
                          measure_delta, apply_swap)
    if not 3 <= ell <= 8:
        raise ValueError("gadget semantics verified for ell in [3, 8]")
    rng = Random(mix_seed(seed, kind, ell))
    ok = 0
    failures = []
    for t in range(trials):
        red = t % 2 == 1
        g, chi, inst = build_template_host(kind, ell, rng, red_gadget=red)
        delta = measure_delta(g, chi, inst)
        expect = expected_swap_delta(ell, blue_gadget=not red)
        if delta == expect:
            ok += 1
        else:
            failures.append({"trial": t, "graph6": to_graph6(g),
                             "delta": delta, "expected": expect})
    return {"kind": kind, "ell": ell, "trials": trials, "ok": ok,
            "failures": failures}
