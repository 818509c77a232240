"""Starting structures: proper 4-edge-colouring, the two-class merge, the
bounded-length linear-forest colouring, the H1/H2/H3 decomposition of the
uncoloured part, and the purple-green base colouring chi0.

"Purple" and "green" reuse the RED/BLUE constants; chi0 lives in its own
Colouring whose coloured support is exactly the complement of G0.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random
from typing import Callable, Optional, Sequence

from .colouring import (BLUE, RED, UNCOLOURED, Colouring,
                        monochromatic_components)
from .graph import Config, CubicGraph
from .transversal import TransversalFailure, find_independent_transversal


# ---------------------------------------------------------------------------
# Misra-Gries edge colouring with Delta+1 = 4 colours
# ---------------------------------------------------------------------------

def vizing_four_colour(g: CubicGraph) -> list[int]:
    """Proper edge colouring with colours 1..4 (Misra-Gries: maximal fan,
    cd-path inversion, prefix rotation). Returns the colour per edge id."""
    m = g.m
    colour = [0] * m
    # at[v*5 + c] = edge id coloured c at v, or -1
    at = [-1] * (g.n * 5)

    def free(v):
        base = 5 * v
        for c in (1, 2, 3, 4):
            if at[base + c] < 0:
                return c
        raise AssertionError("no free colour at degree-3 vertex")

    def assign(e, c):
        # during fan rotation two edges briefly share a colour at u; only
        # clear a slot that still points at this edge
        u, v = g.edges[e]
        old = colour[e]
        if old:
            if at[5 * u + old] == e:
                at[5 * u + old] = -1
            if at[5 * v + old] == e:
                at[5 * v + old] = -1
        colour[e] = c
        if c:
            at[5 * u + c] = e
            at[5 * v + c] = e

    def invert_cd_path(start, c, d):
        """Flip the maximal path from `start` whose first edge is coloured
        d, alternating d, c; returns its far endpoint."""
        x, want = start, d
        flips = []
        while True:
            e = at[5 * x + want]
            if e < 0:
                break
            flips.append(e)
            x = g.other_end(e, x)
            want = c if want == d else d
        for e in flips:
            assign(e, c if colour[e] == d else d)
        return x

    for e0 in range(m):
        u, v = g.edges[e0]
        # maximal fan at u starting from v: next vertex reached through the
        # u-edge coloured with the current tip's free colour
        fan = [v]
        fan_edge = [e0]
        in_fan = {v}
        while True:
            dd = free(fan[-1])
            e = at[5 * u + dd]
            if e < 0:
                break
            w = g.other_end(e, u)
            if w in in_fan:
                break
            fan.append(w)
            fan_edge.append(e)
            in_fan.add(w)
        c = free(u)
        d = free(fan[-1])
        cut = len(fan)
        if at[5 * u + d] >= 0:
            # the d-edge at u is a fan edge u-fan[h] (fan maximality);
            # after inverting the cd path from u, the full fan works iff the
            # path ends at fan[h-1], otherwise the prefix up to fan[h-1]
            h = next(i for i in range(1, len(fan))
                     if colour[fan_edge[i]] == d)
            far = invert_cd_path(u, c, d)
            if far != fan[h - 1]:
                cut = h
        for i in range(cut - 1):
            assign(fan_edge[i], colour[fan_edge[i + 1]])
        assign(fan_edge[cut - 1], d)
    return colour


def validate_proper(g: CubicGraph, colour: Sequence[int]) -> bool:
    seen = set()
    for e in range(g.m):
        if not 1 <= colour[e] <= 4:
            return False
        for v in g.edges[e]:
            if (v, colour[e]) in seen:
                return False
            seen.add((v, colour[e]))
    return True


def merge_to_two(g: CubicGraph, four: Sequence[int]) -> Colouring:
    """Classes {1,2} -> red, {3,4} -> blue. On a cubic graph every vertex
    sees three distinct colours, hence always a 2+1 red/blue split."""
    if not validate_proper(g, four):
        raise ValueError("input is not a proper edge colouring")
    chi = Colouring(g)
    for e in range(g.m):
        chi.values[e] = RED if four[e] in (1, 2) else BLUE
    return chi


# ---------------------------------------------------------------------------
# deterministic cycle breaking (the chi2/chi3 device, reused)
# ---------------------------------------------------------------------------

def break_monochromatic_cycles(g: CubicGraph, chi: Colouring, rng: Random) -> None:
    """Destroy all monochromatic cycles in place without creating
    monochromatic degree-3 vertices (flip one edge per cycle, then repair
    fresh cycles through their petals)."""
    from .pipeline import chi2_step, chi3_step
    flips = chi2_step(g, chi, rng)
    chi3_step(g, chi, flips, rng)


# ---------------------------------------------------------------------------
# weakened Thomassen
# ---------------------------------------------------------------------------

def weak_thomassen(g: CubicGraph, cfg: Config, rng: Optional[Random] = None,
                   attempts: int = 10) -> Colouring:
    """Red-blue colouring whose classes are linear forests with every
    component of length at most 2c+1, c = cfg.weak_thomassen_bound.

    Matching merge, then cycle breaking, then one transversal flip per
    segment of each long path. Output is validated; failed attempts
    re-randomize. Raises TransversalFailure when all attempts fail.
    """
    c = cfg.weak_thomassen_bound
    bound = 2 * c + 1
    if rng is None:
        rng = cfg.sub_rng(0x7000, g.n)
    last_error: Exception | None = None
    four = vizing_four_colour(g)
    for _ in range(attempts):
        arng = Random(rng.getrandbits(64))
        chi = merge_to_two(g, four)
        break_monochromatic_cycles(g, chi, arng)
        try:
            split_long_paths(g, chi, threshold=c, seg_hi=c, opp_cap=c - 1,
                             rng=arng)
        except TransversalFailure as exc:
            last_error = exc
            continue
        comps = monochromatic_components(g, chi)
        if comps.nonlinear or comps.cycles:
            last_error = RuntimeError("cycle or branch vertex survived")
            continue
        if all(p.length <= bound for p in comps.paths):
            return chi
        last_error = RuntimeError("component length bound missed")
    raise TransversalFailure(
        f"weak_thomassen failed after {attempts} attempts: {last_error}")


def split_long_paths(g: CubicGraph, chi: Colouring, threshold: int,
                     seg_hi: int, opp_cap: int, rng: Random,
                     select: Optional[Callable] = None) -> int:
    """Flip one interior edge per length-<=seg_hi segment of every
    monochromatic path of length >= threshold (or of paths selected by
    `select`), in place; returns the number of flips.

    Candidates join two distinct opposite-colour paths of length <= opp_cap,
    and the transversal keeps flips from sharing an opposite component, so
    no flip creates a cycle, a branch vertex, or a long joined component.
    """
    comps = monochromatic_components(g, chi)
    comp_of = {}
    comp_idx = {}
    for i, comp in enumerate(comps.paths + comps.cycles):
        comp_idx[i] = comp
        for v in comp.vertices:
            comp_of[(comp.colour, v)] = i
    if select is None:
        victims = [p for p in comps.paths if p.length >= threshold]
    else:
        victims = [p for p in comps.paths if select(p)]
    if not victims:
        return 0

    parts = []
    for path in victims:
        L = path.length
        nseg = max(1, -(-L // seg_hi))
        bounds = [round(j * L / nseg) for j in range(nseg + 1)]
        opp = BLUE if path.colour == RED else RED
        for j in range(nseg):
            lo, hi = bounds[j], bounds[j + 1]
            cand = []
            for k in range(max(lo, 1), min(hi, L - 1)):
                e = path.edge_ids[k]
                x, y = path.vertices[k], path.vertices[k + 1]
                cx = comp_of.get((opp, x))
                cy = comp_of.get((opp, y))
                if cx is None or cy is None or cx == cy:
                    continue
                if comp_idx[cx].is_cycle or comp_idx[cy].is_cycle:
                    continue
                if comp_idx[cx].length > opp_cap or comp_idx[cy].length > opp_cap:
                    continue
                cand.append((e, cx, cy))
            if not cand:
                raise TransversalFailure("segment with no candidate edges")
            parts.append(cand)
    chosen = find_independent_transversal(
        parts, conflict_keys=lambda item: (item[1], item[2]), rng=rng)
    for (e, _, _) in chosen:
        chi.values[e] = BLUE if chi.values[e] == RED else RED
    return len(chosen)


# ---------------------------------------------------------------------------
# degree-{1,3} graphs: pad to cubic with caps, colour, restrict
# ---------------------------------------------------------------------------

def _pad_to_cubic(n: int, edges: list[tuple[int, int]]) -> tuple[CubicGraph, int]:
    """Attach a 5-vertex cap (K4 minus an edge plus an apex) per missing
    degree unit; returns the padded graph and the original edge count."""
    deg = [0] * n
    for (u, v) in edges:
        deg[u] += 1
        deg[v] += 1
    if any(d > 3 for d in deg):
        raise ValueError("degree above 3")
    out = list(edges)
    free = n
    for v in range(n):
        for _ in range(3 - deg[v]):
            a, b, c, d, w = range(free, free + 5)
            free += 5
            out += [(a, b), (a, c), (a, d), (b, c), (b, d), (c, w), (d, w),
                    (w, v)]
    if free % 2:  # cannot happen: caps add 5 vertices each, parity kept
        raise AssertionError
    return CubicGraph(free, out), len(edges)


def forest_colour_bounded(n: int, edges: list[tuple[int, int]], cfg: Config,
                          rng: Optional[Random] = None) -> list[int]:
    """weak_thomassen for graphs with degrees in {1, 2, 3}: pad with caps,
    colour the cubic host, restrict. Returns RED/BLUE per input edge index."""
    if not edges:
        return []
    padded, m0 = _pad_to_cubic(n, edges)
    chi = weak_thomassen(padded, cfg, rng=rng)
    return [chi.values[e] for e in range(m0)]


# ---------------------------------------------------------------------------
# H1 / H2 / H3 decomposition of the uncoloured part
# ---------------------------------------------------------------------------

class H123Error(ValueError):
    """The uncoloured part has an odd cycle with at most two degree-3
    vertices (an E4-bad structure); carries the witness cycle."""

    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"E4-bad structure: {witness}")


@dataclass
class H123Decomposition:
    h1_edges: list[int]
    h2_cycles: list[list[int]]            # edge-id cycles (expanded)
    h3_components: list[list[list[int]]]  # per theta: three edge-id arms
    f_vertices: list[int]
    f_edges: list[tuple[int, int, list[int]]]  # (fu, fv, subdivided edge ids)

    def all_edges(self) -> set[int]:
        out = set(self.h1_edges)
        for cyc in self.h2_cycles:
            out.update(cyc)
        for theta in self.h3_components:
            for p in theta:
                out.update(p)
        return out


def decompose_h123(g: CubicGraph, uncoloured: Sequence[int]) -> H123Decomposition:
    """Contract degree-2 chains of the uncoloured subgraph; double edges
    expand to the H2 even cycles, triple edges to the H3 thetas, and the
    remaining simple part is H1, a subdivision of a {1,3}-degree graph F."""
    from .colouring import enumerate_e4_bad
    in_set = bytearray(g.m)
    for e in uncoloured:
        in_set[e] = 1
    marker = Colouring(g, bytearray(
        UNCOLOURED if in_set[e] else RED for e in range(g.m)))
    bad = enumerate_e4_bad(g, marker)
    if bad:
        raise H123Error(bad[0])

    deg = [0] * g.n
    for e in uncoloured:
        u, v = g.edges[e]
        deg[u] += 1
        deg[v] += 1
    seen = bytearray(g.m)

    def follow(v, e):
        eids = [e]
        seen[e] = 1
        w = g.other_end(e, v)
        while deg[w] == 2:
            nxt = -1
            base = 3 * w
            for k in range(3):
                ee = g.eid[base + k]
                if in_set[ee] and not seen[ee]:
                    nxt = ee
                    break
            if nxt < 0:
                break
            seen[nxt] = 1
            eids.append(nxt)
            w = g.other_end(nxt, w)
        return w, eids

    chains = []
    for v in range(g.n):
        if deg[v] in (0, 2):
            continue
        base = 3 * v
        for k in range(3):
            e = g.eid[base + k]
            if in_set[e] and not seen[e]:
                w, eids = follow(v, e)
                chains.append((v, w, eids))
    iso_cycles = []
    for e0 in range(g.m):
        if in_set[e0] and not seen[e0]:
            _, eids = follow(g.edges[e0][0], e0)
            iso_cycles.append(eids)

    groups: dict[tuple[int, int], list[list[int]]] = {}
    for (u, v, eids) in chains:
        key = (u, v) if u <= v else (v, u)
        groups.setdefault(key, []).append(eids)

    h1_edges: list[int] = []
    f_edges = []
    h2 = []
    h3 = []
    for (u, v), lst in sorted(groups.items()):
        if u == v:
            for eids in lst:   # chain looping back at one branch vertex
                if len(eids) % 2 == 1:
                    raise H123Error(cycle_vertices(g, eids))
                h2.append(eids)
        elif len(lst) == 1:
            h1_edges.extend(lst[0])
            f_edges.append((u, v, lst[0]))
        elif len(lst) == 2:
            cyc = lst[0] + lst[1]
            if len(cyc) % 2 == 1:
                raise H123Error(cycle_vertices(g, cyc))
            h2.append(cyc)
        elif len(lst) == 3:
            h3.append(sorted(lst, key=lambda p: (len(p), p)))
        else:
            raise H123Error((u, v, "multiplicity above 3"))
    for eids in iso_cycles:
        if len(eids) % 2 == 1:
            raise H123Error(cycle_vertices(g, eids))
        h2.append(eids)

    f_vertices = sorted({u for (u, _, _) in f_edges}
                        | {v for (_, v, _) in f_edges})
    dec = H123Decomposition(h1_edges, h2, h3, f_vertices, f_edges)
    assert dec.all_edges() == set(uncoloured), "H123 parts do not partition"
    fdeg: dict[int, int] = {}
    for (u, v, _) in f_edges:
        fdeg[u] = fdeg.get(u, 0) + 1
        fdeg[v] = fdeg.get(v, 0) + 1
    assert all(d in (1, 3) for d in fdeg.values()), "F degree outside {1,3}"
    return dec


def cycle_vertices(g: CubicGraph, eids: list[int]) -> list[int]:
    """Vertex sequence of an edge-id cycle."""
    from collections import defaultdict
    adj = defaultdict(list)
    for e in eids:
        u, v = g.edges[e]
        adj[u].append(v)
        adj[v].append(u)
    start = g.edges[eids[0]][0]
    verts = [start]
    prev = -1
    while True:
        v = verts[-1]
        nxt = adj[v][0] if adj[v][0] != prev else adj[v][1]
        if nxt == start:
            break
        verts.append(nxt)
        prev = v
    return verts


# ---------------------------------------------------------------------------
# chi0
# ---------------------------------------------------------------------------

def build_chi0(g: CubicGraph, g0: Colouring, dec: H123Decomposition,
               cfg: Config, rng: Optional[Random] = None) -> Colouring:
    """Purple-green colouring of the uncoloured part. Purple is stored as
    RED, green as BLUE.

    H1 takes the bounded linear-forest colouring of F lifted through the
    subdivision; each H2 cycle reacts to the colours of its at most two
    touching H1 edges; each H3 theta gets two same-parity arms purple and
    the third green. Validated: monochromatic components are paths or even
    cycles, and every vertex of degree >= 2 in the uncoloured part touches
    two same-coloured edges.
    """
    chi0 = Colouring(g)
    if dec.f_edges:
        fmap = {v: i for i, v in enumerate(dec.f_vertices)}
        fedges = [(fmap[u], fmap[v]) for (u, v, _) in dec.f_edges]
        fcol = forest_colour_bounded(len(dec.f_vertices), fedges, cfg, rng)
        for idx, (_, _, eids) in enumerate(dec.f_edges):
            for e in eids:
                chi0.values[e] = fcol[idx]
    h1set = set(dec.h1_edges)
    for cyc in dec.h2_cycles:
        _colour_h2_cycle(g, chi0, h1set, cyc)
    for theta in dec.h3_components:
        arms = theta
        if (len(arms[0]) - len(arms[1])) % 2 == 0:
            p1, p2, p3 = arms[0], arms[1], arms[2]
        elif (len(arms[0]) - len(arms[2])) % 2 == 0:
            p1, p2, p3 = arms[0], arms[2], arms[1]
        else:
            p1, p2, p3 = arms[1], arms[2], arms[0]
        for e in p1 + p2:
            chi0.values[e] = RED
        for e in p3:
            chi0.values[e] = BLUE
    validate_chi0(g, chi0)
    return chi0


def _colour_h2_cycle(g: CubicGraph, chi0: Colouring, h1set: set,
                     cyc: list[int]) -> None:
    verts = cycle_vertices(g, cyc)
    in_cyc = set(cyc)
    touching: dict[int, list[int]] = {}   # H1 edge -> cycle vertices touched
    for v in verts:
        base = 3 * v
        for k in range(3):
            e = g.eid[base + k]
            if e not in in_cyc and e in h1set:
                touching.setdefault(e, []).append(v)
    if not touching:
        for e in cyc:
            chi0.values[e] = RED
        return
    cols = {chi0.values[e] for e in touching}
    if len(touching) == 1 or len(cols) == 1:
        fill = BLUE if cols == {RED} else RED
        for e in cyc:
            chi0.values[e] = fill
        return
    # two touching edges of opposite colours: purple one arc, green the other
    (ea, va), (eb, vb) = list(touching.items())[:2]
    ia, ib = verts.index(va[0]), verts.index(vb[0])
    k = len(verts)
    arc = set()
    i = ia
    while i != ib:
        arc.add(i)
        i = (i + 1) % k
    for i in range(k):
        e = g.edge_id(verts[i], verts[(i + 1) % k])
        chi0.values[e] = RED if i in arc else BLUE


def validate_chi0(g: CubicGraph, chi0: Colouring) -> None:
    comps = monochromatic_components(g, chi0)
    if comps.nonlinear:
        raise AssertionError(f"chi0 branch vertex {comps.nonlinear[0]}")
    for cyc in comps.cycles:
        if cyc.length % 2 == 1:
            raise AssertionError("chi0 odd monochromatic cycle")
    vals = chi0.values
    for v in range(g.n):
        r = b = 0
        base = 3 * v
        for k in range(3):
            c = vals[g.eid[base + k]]
            if c == RED:
                r += 1
            elif c == BLUE:
                b += 1
        if r + b >= 2 and r < 2 and b < 2:
            raise AssertionError(f"chi0 vertex {v} lacks a same-coloured pair")
