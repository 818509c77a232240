"""Gadget-bearing partial colourings around a geodesic.

Two routes, dispatched by local structure:

* the comb route, for geodesics none of whose vertices share an outside
  neighbour: one shot of window colouring around a chosen index;
* the staged route: an initial colouring that grows a long blue path P'
  around the geodesic while orienting what it colours (stage I), a repair
  of the single structure that can produce a monochromatic vertex (stage
  II), and a local recolouring that plants the gadget on P' (stage III).

Every stage is machine-validated against the properties its lemma states;
validation failures raise and the caller harvests another geodesic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .colouring import (BLUE, RED, UNCOLOURED, Colouring, check_e1,
                        enumerate_e3_bad, monochromatic_components)
from .gadgets import GadgetInstance, instantiate
from .graph import CubicGraph, Geodesic, bfs_distances


class GeodesicColouringError(RuntimeError):
    """Structure drift or failed validation; caller should re-harvest."""


# ---------------------------------------------------------------------------
# context
# ---------------------------------------------------------------------------

@dataclass
class GeodesicContext:
    g: CubicGraph
    path: list[int]                      # P

    def __post_init__(self):
        self.pos = {v: i for i, v in enumerate(self.path)}
        self.pendant: dict[int, int] = {}
        g = self.g
        for i in range(1, len(self.path) - 1):
            v = self.path[i]
            w, _ = g.third_neighbour(v, self.path[i - 1], self.path[i + 1])
            self.pendant[i] = w

    @property
    def length(self) -> int:
        return len(self.path) - 1


@dataclass
class OrientedOverlay:
    """Directed edges added during the initial colouring."""

    heads: dict[int, tuple[int, int]] = field(default_factory=dict)
    # edge id -> (tail, head)

    def add(self, e: int, tail: int, head: int) -> None:
        self.heads[e] = (tail, head)

    def in_edges(self, v: int) -> list[int]:
        return [e for e, (_, h) in self.heads.items() if h == v]

    def out_degree(self, v: int) -> int:
        return sum(1 for (t, _) in self.heads.values() if t == v)


@dataclass
class ExceptionalConfig:
    """A copy of the exceptional local structure, labelled so that x1 comes
    first along P'. xs = (x1..x5) on P, ys = (y1, y2, y3) off P."""

    xs: tuple[int, ...]
    ys: tuple[int, ...]

    def vertices(self) -> set[int]:
        return set(self.xs) | set(self.ys)

    def edge_pairs(self) -> list[tuple[int, int]]:
        x1, x2, x3, x4, x5 = self.xs
        y1, y2, y3 = self.ys
        return [(x1, x2), (x2, x3), (x3, x4), (x4, x5), (y1, y2), (y2, y3),
                (x1, y1), (x2, y1), (x3, y2), (x4, y3), (x5, y3)]


# ---------------------------------------------------------------------------
# stage I: initial partial colouring (S1-S6)
# ---------------------------------------------------------------------------

def precolour(ctx: GeodesicContext) -> tuple[Colouring, OrientedOverlay, list[int]]:
    """Colour P blue, reroute over shared neighbours of consecutive pairs,
    pendant-colour, propagate in-degree-2 rules, and patch the two ends.
    Returns (phi1, overlay D, P')."""
    g, path = ctx.g, ctx.path
    L = ctx.length
    phi = Colouring(g)
    D = OrientedOverlay()
    pprime = list(path)

    def pedge(i, j):
        e = g.edge_id(path[i], path[j])
        assert e is not None
        return e

    # S1
    for i in range(L):
        phi.values[pedge(i, i + 1)] = BLUE

    # S2: diamonds over interior edges
    for i in range(1, L - 1):
        u, v = path[i], path[i + 1]
        e = g.edge_id(u, v)
        if phi.values[e] != BLUE:
            continue
        wu = ctx.pendant.get(i)
        wv = ctx.pendant.get(i + 1)
        if wu is None or wv is None or wu != wv or wu in ctx.pos:
            continue
        w = wu
        eu, ev = g.edge_id(u, w), g.edge_id(v, w)
        if phi.values[eu] != UNCOLOURED or phi.values[ev] != UNCOLOURED:
            continue
        phi.values[e] = RED
        phi.values[eu] = BLUE
        phi.values[ev] = BLUE
        D.add(eu, u, w)
        D.add(ev, v, w)
        k = pprime.index(u)
        assert pprime[k + 1] == v
        pprime.insert(k + 1, w)

    # S3: pendants of vertices whose two P-edges stayed blue
    for i in range(1, L):
        v = path[i]
        if phi.values[pedge(i - 1, i)] != BLUE or phi.values[pedge(i, i + 1)] != BLUE:
            continue
        z = ctx.pendant[i]
        e = g.edge_id(v, z)
        if phi.values[e] == UNCOLOURED:
            phi.values[e] = RED
            D.add(e, v, z)

    # S4 / S5 worklist, S4 first, lowest uncoloured edge id first
    blue_in = [0] * g.n
    red_in = [0] * g.n
    for e, (_, h) in D.heads.items():
        if phi.values[e] == BLUE:
            blue_in[h] += 1
        else:
            red_in[h] += 1

    def uncoloured_at(v):
        out = []
        base = 3 * v
        for k in range(3):
            e = g.eid[base + k]
            if phi.values[e] == UNCOLOURED:
                out.append((e, g.nbr[base + k]))
        return out

    frontier = {h for (_, h) in D.heads.values()}
    while True:
        cands = []
        for v in frontier:
            unc = uncoloured_at(v)
            if len(unc) != 1:
                continue
            if blue_in[v] == 2:
                cands.append((0, unc[0][0], v, unc[0][1]))
            elif red_in[v] == 2:
                cands.append((1, unc[0][0], v, unc[0][1]))
        if not cands:
            break
        rule, e, v, z = min(cands)
        col = RED if rule == 0 else BLUE
        phi.values[e] = col
        D.add(e, v, z)
        if col == RED:
            red_in[z] += 1
        else:
            blue_in[z] += 1
        frontier.add(z)

    # S6 at the two ends of P
    for end_i in (0, L):
        v = path[end_i]
        uv = pedge(*((0, 1) if end_i == 0 else (L - 1, L)))
        if phi.values[uv] != BLUE:
            continue
        ins = [e for e in D.heads if D.heads[e][1] == v]
        blue_ins = [e for e in ins if phi.values[e] == BLUE]
        red_ins = [e for e in ins if phi.values[e] == RED]
        unc = uncoloured_at(v)
        if len(blue_ins) == 2:
            phi.values[uv] = RED
            _pprime_drop_end(pprime, v)
        elif len(blue_ins) == 1 and not red_ins and len(unc) == 1:
            e_vz, z = unc[0]
            z_red_in = any(phi.values[e] == RED and D.heads[e][1] == z
                           for e in D.heads)
            if z_red_in:
                phi.values[e_vz] = BLUE       # undirected
                phi.values[uv] = RED
                _pprime_drop_end(pprime, v)
            else:
                others_ok = True
                base = 3 * z
                for k in range(3):
                    e2 = g.eid[base + k]
                    if e2 == e_vz:
                        continue
                    if phi.values[e2] == UNCOLOURED:
                        continue
                    if phi.values[e2] == BLUE and \
                            D.heads.get(e2, (None, None))[1] == z:
                        continue
                    others_ok = False
                if others_ok:
                    phi.values[e_vz] = RED    # undirected
    return phi, D, pprime


def _pprime_drop_end(pprime: list[int], v: int) -> None:
    if pprime[0] == v:
        pprime.pop(0)
    elif pprime[-1] == v:
        pprime.pop()
    else:
        raise GeodesicColouringError("S6 tried to trim a non-end vertex")


# ---------------------------------------------------------------------------
# exceptional structures
# ---------------------------------------------------------------------------

def find_exceptional(ctx: GeodesicContext, phi: Colouring, D: OrientedOverlay,
                     pprime: list[int]) -> list[ExceptionalConfig]:
    """Locate every monochromatic-degree-3 vertex and verify it is the
    centre of an exceptional copy parallel to P; anything else raises."""
    g = ctx.g
    out = []
    for v in range(g.n):
        r = sum(1 for k in range(3) if phi.values[g.eid[3 * v + k]] == RED)
        b = sum(1 for k in range(3) if phi.values[g.eid[3 * v + k]] == BLUE)
        if r != 3 and b != 3:
            continue
        if b == 3:
            raise GeodesicColouringError(f"blue-degree-3 vertex {v}")
        y2 = v
        in_nbrs = []
        for k in range(3):
            e = g.eid[3 * y2 + k]
            t_h = D.heads.get(e)
            if t_h is None or t_h[1] != y2:
                raise GeodesicColouringError(
                    f"monochromatic vertex {y2} with undirected edge")
            in_nbrs.append(t_h[0])
        on_p = [w for w in in_nbrs if w in ctx.pos]
        off_p = [w for w in in_nbrs if w not in ctx.pos]
        if len(on_p) != 1 or len(off_p) != 2:
            raise GeodesicColouringError(f"vertex {y2}: wrong neighbour split")
        x3 = on_p[0]
        sides = []
        for y in off_p:
            xs = []
            for k in range(3):
                e = g.eid[3 * y + k]
                w = g.nbr[3 * y + k]
                if w == y2:
                    continue
                if phi.values[e] != BLUE or D.heads.get(e, (None, None))[1] != y:
                    raise GeodesicColouringError(
                        f"exceptional arm at {y} is not two blue in-edges")
                xs.append(w)
            sides.append((y, xs))
        i3 = ctx.pos[x3]
        idx = {}
        for y, xs in sides:
            for x in xs:
                if x not in ctx.pos:
                    raise GeodesicColouringError("arm foot off the geodesic")
                idx[x] = ctx.pos[x]
        span = sorted(idx.values()) + [i3]
        span.sort()
        if span != list(range(i3 - 2, i3 + 3)):
            raise GeodesicColouringError("exceptional copy not parallel to P")
        left = min(sides, key=lambda s: min(ctx.pos[x] for x in s[1]))
        right = max(sides, key=lambda s: min(ctx.pos[x] for x in s[1]))
        y1, y3 = left[0], right[0]
        xs = tuple(ctx.path[i] for i in range(i3 - 2, i3 + 3))
        out.append(ExceptionalConfig(xs=xs, ys=(y1, y2, y3)))
    return out


def fix_exceptional(ctx: GeodesicContext, phi: Colouring, D: OrientedOverlay,
                    pprime: list[int]
                    ) -> tuple[Colouring, list[int], list[ExceptionalConfig]]:
    """Stage II: recolour every exceptional copy so its centre loses the
    monochromatic degree, reroute P' through the repaired copy (keeping P'
    entirely blue), and drop all orientations."""
    g = ctx.g
    phi2 = phi.copy()
    new_pprime = list(pprime)
    copies = find_exceptional(ctx, phi, D, pprime)
    oriented = []
    for cfg in copies:
        x1, x2, x3, x4, x5 = cfg.xs
        y1, y2, y3 = cfg.ys
        # orient along P': x1 end first
        if pprime.index(x1) > pprime.index(x5):
            x1, x2, x3, x4, x5 = x5, x4, x3, x2, x1
            y1, y3 = y3, y1
        cfg = ExceptionalConfig(xs=(x1, x2, x3, x4, x5), ys=(y1, y2, y3))
        oriented.append(cfg)
        red = [(x1, x2), (x3, x4), (y1, y2), (x5, y3)]
        blue = [(x1, y1), (x2, y1), (x2, x3), (x3, y2), (y2, y3), (y3, x4),
                (x4, x5)]
        for (a, b) in red:
            phi2.values[g.edge_id(a, b)] = RED
        for (a, b) in blue:
            phi2.values[g.edge_id(a, b)] = BLUE
        i1, i5 = new_pprime.index(x1), new_pprime.index(x5)
        assert i1 < i5 and new_pprime[i1:i5 + 1] == [x1, y1, x2, x3, x4, y3, x5], \
            "unexpected P' segment through the exceptional copy"
        new_pprime[i1:i5 + 1] = [x1, y1, x2, x3, y2, y3, x4, x5]
    return phi2, new_pprime, oriented


# ---------------------------------------------------------------------------
# stage III: detect a gadget window and create the gadget
# ---------------------------------------------------------------------------

@dataclass
class GadgetCase:
    case: str                      # "I", "II", "III", "fallback-comb"
    s: Optional[int] = None        # P'-index
    w: Optional[int] = None        # Case III outside vertex
    copy: Optional[ExceptionalConfig] = None
    subpath: Optional[list[int]] = None   # fallback-comb geodesic


def off_path_neighbour(g: CubicGraph, pprime: list[int], i: int) -> int:
    """The unique neighbour of interior P'-vertex pprime[i] not on P'."""
    v = pprime[i]
    w, _ = g.third_neighbour(v, pprime[i - 1], pprime[i + 1])
    return w


def detect_gadget_case(ctx: GeodesicContext, phi2: Colouring,
                       pprime: list[int], ell: int,
                       copies: list[ExceptionalConfig]) -> GadgetCase:
    """Decide which window the repaired colouring offers for an ell-gadget.

    Case I: a repaired exceptional copy at P'-distance >= ell+20 from both
    ends. Case II: a P'-vertex off P in the middle window. Case III: two
    P-vertices at distance 2 sharing an outside neighbour. Otherwise the
    central subpath is a clean caterpillar geodesic (fallback-comb).
    """
    g = ctx.g
    L = len(pprime) - 1
    if L < 5 * ell + 200:
        raise GeodesicColouringError(f"P' too short for ell={ell}: {L}")
    pos = {v: i for i, v in enumerate(pprime)}
    for copy in copies:
        idxs = [pos[v] for v in copy.vertices() if v in pos]
        if idxs and min(idxs) >= ell + 20 and max(idxs) <= L - (ell + 20):
            return GadgetCase("I", s=pos[copy.xs[3]], copy=copy)
    for s in range(2 * ell + 40, L - 2 * ell - 40 + 1):
        if pprime[s] not in ctx.pos:
            return GadgetCase("II", s=s)
    for s in range(2 * ell + 100, L - 2 * ell - 100 + 1):
        a, b = pprime[s - 1], pprime[s + 1]
        common = set(ctx.g.neighbours(a)) & set(ctx.g.neighbours(b))
        common -= set(pos)
        if common:
            return GadgetCase("III", s=s, w=min(common))
    lo, hi = 2 * ell + 80, L - 2 * ell - 80
    sub = pprime[lo:hi + 1]
    if any(v not in ctx.pos for v in sub):
        raise GeodesicColouringError("fallback subpath leaves the geodesic")
    _check_caterpillar_precondition(g, sub)
    return GadgetCase("fallback-comb", subpath=sub)


def _check_caterpillar_precondition(g: CubicGraph, path: list[int]) -> None:
    onpath = set(path)
    for i, u in enumerate(path):
        for j in range(i + 1, min(i + 3, len(path))):
            v = path[j]
            common = (set(g.neighbours(u)) & set(g.neighbours(v))) - onpath
            if common:
                raise GeodesicColouringError(
                    f"path vertices {u},{v} share outside neighbour "
                    f"{min(common)}")


def create_gadget(ctx: GeodesicContext, phi2: Colouring, pprime: list[int],
                  case: GadgetCase, ell: int) -> tuple[Colouring, GadgetInstance]:
    """Stage III: recolour the three window edges red (plus the guard
    edges blue where they exist) and emit the planted gadget instance."""
    g = ctx.g
    phi3 = phi2.copy()
    pos = {v: i for i, v in enumerate(pprime)}
    s = case.s
    L = len(pprime) - 1

    def pe(i, j):
        e = g.edge_id(pprime[i], pprime[j])
        if e is None:
            raise GeodesicColouringError("P' consecutive vertices not adjacent")
        return e

    def offp(i):
        return off_path_neighbour(g, pprime, i)

    if case.case == "I":
        copy = case.copy
        x1, x2, x3, x4, x5 = copy.xs
        y1, y2, y3 = copy.ys
        assert pprime[s] == x4 and pprime[s + 1] == x5
        for (i, j) in ((s - 1, s), (s - 3, s - 2), (s + ell, s + ell + 1)):
            phi3.values[pe(i, j)] = RED
        _guard_blue(g, phi3, offp(s + ell), offp(s + ell + 1))
        arm = (pprime[s - 1], pprime[s + 1])          # y3 -> x5
        e1 = (y1, y2)
        e2 = (x3, y2)
        e3 = (x3, x4)
    elif case.case == "II":
        for (i, j) in ((s - 3, s - 2), (s - 1, s), (s + ell, s + ell + 1)):
            phi3.values[pe(i, j)] = RED
        _guard_blue(g, phi3, offp(s - 2), offp(s - 3))
        _guard_blue(g, phi3, offp(s + ell), offp(s + ell + 1))
        arm = (pprime[s - 1], pprime[s + 1])
        e1 = (pprime[s - 3], pprime[s - 2])
        e2 = (pprime[s - 2], offp(s - 2))
        e3 = (pprime[s], offp(s))
    elif case.case == "III":
        for (i, j) in ((s - 3, s - 2), (s - 1, s), (s + ell, s + ell + 1)):
            phi3.values[pe(i, j)] = RED
        _guard_blue(g, phi3, offp(s - 2), offp(s - 3))
        _guard_blue(g, phi3, offp(s + ell), offp(s + ell + 1))
        arm = (pprime[s - 1], case.w, pprime[s + 1])
        e1 = (pprime[s - 3], pprime[s - 2])
        e2 = (pprime[s - 2], offp(s - 2))
        e3 = (pprime[s], offp(s))
    else:
        raise ValueError("create_gadget cannot handle the fallback case")

    inst = _type2_instance(g, phi3, pprime, s, ell, arm, e1, e2, e3)
    validate_partial_col(ctx, phi3, require_connected=True)
    if not inst.matches(g, phi3, "a"):
        raise GeodesicColouringError("planted gadget does not match phi3")
    return phi3, inst


def _guard_blue(g: CubicGraph, phi: Colouring, a: int, b: int) -> None:
    e = g.edge_id(a, b)
    if e is not None and phi.values[e] == UNCOLOURED:
        phi.values[e] = BLUE


def _type2_instance(g, phi, pprime, s, ell, arm, e1, e2, e3) -> GadgetInstance:
    tpl = instantiate("II", ell, arm_length=len(arm) - 1)
    core: dict[int, int] = {}
    for i, q in enumerate(tpl.q_path):
        core[q] = pprime[s - 2 + i]
    for local, host in zip(tpl.arm1, arm):
        core[local] = host
    ends = [uv for uv in tpl.boundary]
    # boundary order from instantiate: e1, e2 at q0; e3 at q2; e4, e5 at tail
    far = [e1[0] if e1[1] == pprime[s - 2] else e1[1],
           e2[0] if e2[1] == pprime[s - 2] else e2[1],
           e3[0] if e3[1] == pprime[s] else e3[1],
           pprime[s + ell + 1],
           off_path_neighbour(g, pprime, s + ell)]
    for (local_uv, host_far) in zip(ends, far):
        core[local_uv[1]] = host_far
    return GadgetInstance(tpl, core, orientation="blue")


# ---------------------------------------------------------------------------
# the comb route (caterpillar geodesics)
# ---------------------------------------------------------------------------

def classify_comb_case(ctx: GeodesicContext, ell: int) -> GadgetCase:
    """One of the three comb shapes, with its witness index.

    The underlying claim is a disjunction, so any holding case is valid
    input to the colouring; the search order here is II (universal ladder
    condition), then III, then I.
    """
    g, path = ctx.g, ctx.path
    L = ctx.length
    if L < ell + 36:
        raise GeodesicColouringError(f"geodesic too short: {L} < {ell + 36}")
    _check_caterpillar_precondition(g, path)
    pend = ctx.pendant
    pendants = set(pend.values())

    def common_outside(i, j):
        return set(g.neighbours(pend[i])) & set(g.neighbours(pend[j]))

    case2 = True
    for i in range(12, L - ell - 12 + 1):
        allowed = {pend.get(i - 2), pend.get(i), pend.get(i + 2)}
        if not (common_outside(i - 1, i + 1) & allowed) \
                or pend[i - 1] == pend[i + 1]:
            case2 = False
            break
    if case2 and _pendant_window_acyclic(ctx, 14, L - ell - 14):
        return GadgetCase("II", s=18)
    for s in range(12, L - ell - 10 + 1):
        common = common_outside(s - 1, s + 1)
        outside = common - pendants - set(ctx.pos)
        if len(common) == 1 and outside:
            return GadgetCase("III", s=s, w=min(outside))
    for s in range(10, L - ell - 10 + 1):
        if not common_outside(s - 1, s + 1):
            return GadgetCase("I", s=s)
    raise GeodesicColouringError("no comb case applies")


def _pendant_window_acyclic(ctx: GeodesicContext, lo: int, hi: int) -> bool:
    from .union_find import DSU
    verts = [ctx.pendant[i] for i in range(max(lo, 1), min(hi, ctx.length - 1) + 1)
             if i in ctx.pendant]
    index = {v: i for i, v in enumerate(verts)}
    dsu = DSU(len(verts))
    seen = set()
    for v in verts:
        for w in ctx.g.neighbours(v):
            if w in index and (w, v) not in seen:
                seen.add((v, w))
                if not dsu.union(index[v], index[w]):
                    return False
    return True


def comb_colour(ctx: GeodesicContext, ell: int,
                case: GadgetCase) -> tuple[Colouring, GadgetInstance]:
    """Window colouring around index s per the case, producing a blue
    ell-gadget (unit-arm Type I in Cases I/II, Type II through the common
    neighbour in Case III). Validated against the comb lemma."""
    g, path = ctx.g, ctx.path
    L = ctx.length
    s = case.s
    phi = Colouring(g)
    pend = ctx.pendant

    def pe(i, j):
        return g.edge_id(path[i], path[j])

    def stem(i):
        return g.edge_id(path[i], pend[i])

    red_p = {(s - 3, s - 2), (s - 1, s), (s + ell, s + ell + 1)}
    if case.case == "I":
        for i in range(s - 10, s + ell + 10):
            phi.values[pe(i, i + 1)] = RED if (i, i + 1) in red_p else BLUE
        for i in range(s - 9, s + ell + 10):
            if i in (s - 3, s + ell + 1):
                phi.values[stem(i)] = BLUE
            else:
                phi.values[stem(i)] = RED
        fs = []
        for tip_i in (s - 1, s + 1):
            tip = pend[tip_i]
            for k in range(3):
                e = g.eid[3 * tip + k]
                if phi.values[e] == UNCOLOURED:
                    phi.values[e] = BLUE
                    fs.append((tip, g.nbr[3 * tip + k]))
        outer = {b for (_, b) in fs} - {pend[s - 1], pend[s + 1]}
        inner_edges = []
        for u in outer:
            for k in range(3):
                e = g.eid[3 * u + k]
                v = g.nbr[3 * u + k]
                if v in outer and phi.values[e] == UNCOLOURED:
                    inner_edges.append((min(u, v), max(u, v), e))
        inner_edges = sorted(set(inner_edges))
        cycle_edge = _find_cycle_cross_edge(
            g, outer, [e for (_, _, e) in inner_edges],
            side1={b for (a, b) in fs if a == pend[s - 1]},
            side2={b for (a, b) in fs if a == pend[s + 1]})
        for (_, _, e) in inner_edges:
            phi.values[e] = BLUE if e == cycle_edge else RED
        inst = _comb_type1_instance(ctx, phi, s, ell, fs)
    elif case.case == "II":
        for i in range(s - 2, s + ell):
            phi.values[pe(i, i + 1)] = BLUE
        for (i, j) in red_p:
            phi.values[pe(i, j)] = RED
        for i in range(s - 2, s + ell + 1):
            phi.values[stem(i)] = RED
        fs = []
        for tip_i in (s - 1, s + 1):
            tip = pend[tip_i]
            for k in range(3):
                e = g.eid[3 * tip + k]
                v = g.nbr[3 * tip + k]
                if v in ctx.pos:
                    continue
                if phi.values[e] == UNCOLOURED:
                    phi.values[e] = BLUE
                    fs.append((tip, v))
        inst = _comb_type1_instance(ctx, phi, s, ell, fs)
    else:  # Case III
        w = case.w
        for i in range(s - 2, s + ell):
            phi.values[pe(i, i + 1)] = BLUE
        for (i, j) in red_p:
            phi.values[pe(i, j)] = RED
        for i in range(s - 2, s + ell + 1):
            phi.values[stem(i)] = RED
        phi.values[g.edge_id(pend[s - 1], w)] = RED
        phi.values[g.edge_id(pend[s + 1], w)] = RED
        _propagate_two_of_a_colour(g, phi, max_rounds=4)
        arm = (path[s - 1], pend[s - 1], w, pend[s + 1], path[s + 1])
        tpl = instantiate("II", ell, arm_length=4)
        core = {}
        for i, q in enumerate(tpl.q_path):
            core[q] = path[s - 2 + i]
        for local, host in zip(tpl.arm1, arm):
            core[local] = host
        fars = [path[s - 3], pend[s - 2], pend[s], path[s + ell + 1],
                pend[s + ell]]
        for (local_uv, host_far) in zip(tpl.boundary, fars):
            core[local_uv[1]] = host_far
        inst = GadgetInstance(tpl, core, orientation="blue")
    validate_comb(ctx, phi)
    if not inst.matches(g, phi, "a"):
        raise GeodesicColouringError("comb gadget does not match its colours")
    return phi, inst


def _find_cycle_cross_edge(g, vertices, edge_ids, side1, side2) -> Optional[int]:
    """Lowest-id edge on a cycle of the small induced graph with one end on
    each side, or None when the induced edges are acyclic."""
    from .union_find import DSU
    verts = sorted(vertices)
    index = {v: i for i, v in enumerate(verts)}
    dsu = DSU(len(verts))
    acyclic = True
    for e in sorted(edge_ids):
        u, v = g.edges[e]
        if not dsu.union(index[u], index[v]):
            acyclic = False
    if acyclic:
        return None
    for e in sorted(edge_ids):
        u, v = g.edges[e]
        if (u in side1 and v in side2) or (u in side2 and v in side1):
            return e
    raise GeodesicColouringError("induced cycle without a crossing edge")


def _propagate_two_of_a_colour(g: CubicGraph, phi: Colouring,
                               max_rounds: int) -> None:
    """Alternately colour uncoloured edges at red-degree-2 vertices blue and
    at blue-degree-2 vertices red, until stable."""
    for round_no in range(max_rounds + 1):
        fired = False
        for want, give in ((RED, BLUE), (BLUE, RED)):
            batch = []
            for v in range(g.n):
                cnt = unc = 0
                base = 3 * v
                for k in range(3):
                    c = phi.values[g.eid[base + k]]
                    if c == want:
                        cnt += 1
                    elif c == UNCOLOURED:
                        unc += 1
                if cnt == 2 and unc:
                    for k in range(3):
                        e = g.eid[base + k]
                        if phi.values[e] == UNCOLOURED:
                            batch.append(e)
            for e in batch:
                if phi.values[e] == UNCOLOURED:
                    phi.values[e] = give
                    fired = True
        if not fired:
            return
    raise GeodesicColouringError(
        f"comb propagation exceeded {max_rounds} rounds")


def _comb_type1_instance(ctx, phi, s, ell, fs) -> GadgetInstance:
    g, path, pend = ctx.g, ctx.path, ctx.pendant
    tpl = instantiate("I", ell, arm_length=1)
    core = {}
    for i, q in enumerate(tpl.q_path):
        core[q] = path[s - 2 + i]
    core[tpl.arm1[-1]] = pend[s - 1]
    core[tpl.arm2[-1]] = pend[s + 1]
    fars = [path[s - 3], pend[s - 2], pend[s], path[s + ell + 1], pend[s + ell]]
    f_by_tip = {pend[s - 1]: [], pend[s + 1]: []}
    for (tip, far) in fs:
        f_by_tip[tip].append(far)
    for tip in (pend[s - 1], pend[s + 1]):
        while len(f_by_tip[tip]) < 2:
            # aliased pendant edge (tips adjacent): reuse the other tip
            other = pend[s + 1] if tip == pend[s - 1] else pend[s - 1]
            f_by_tip[tip].append(other)
    fars += f_by_tip[pend[s - 1]][:2] + f_by_tip[pend[s + 1]][:2]
    for (local_uv, host_far) in zip(tpl.boundary, fars):
        core[local_uv[1]] = host_far
    return GadgetInstance(tpl, core, orientation="blue")


# ---------------------------------------------------------------------------
# validators (the lemmas, restated as checks)
# ---------------------------------------------------------------------------

def _coloured_within(ctx: GeodesicContext, phi: Colouring, radius: int) -> bool:
    g = ctx.g
    dist = bfs_distances(g, ctx.path, cutoff=radius)
    for e in range(g.m):
        if phi.values[e] != UNCOLOURED:
            u, v = g.edges[e]
            du = dist[u] if dist[u] >= 0 else radius + 1
            dv = dist[v] if dist[v] >= 0 else radius + 1
            if min(du, dv) > radius:
                return False
    return True


def _mono_path_ends_ok(g: CubicGraph, phi: Colouring,
                       exempt_edges: set[int]) -> Optional[list[int]]:
    """Check every maximal monochromatic path not equal to the exempt edge
    set has an end meeting two opposite-coloured edges; returns a witness
    path on failure."""
    comps = monochromatic_components(g, phi)
    for comp in comps.paths:
        if set(comp.edge_ids) == exempt_edges:
            continue
        opp = BLUE if comp.colour == RED else RED
        ok = False
        for end in (comp.vertices[0], comp.vertices[-1]):
            cnt = sum(1 for k in range(3)
                      if phi.values[g.eid[3 * end + k]] == opp)
            if cnt == 2:
                ok = True
                break
        if not ok:
            return comp.vertices
    return None


def validate_only_mono(ctx: GeodesicContext, phi: Colouring,
                       D: OrientedOverlay, pprime: list[int]) -> None:
    """Stage I postconditions (the five properties of the initial
    colouring lemma)."""
    g = ctx.g
    for v in range(g.n):
        r = b = 0
        for k in range(3):
            c = phi.values[g.eid[3 * v + k]]
            if c == RED:
                r += 1
            elif c == BLUE:
                b += 1
        if r + b == 2 and (r == 0 or b == 0):
            raise GeodesicColouringError(f"(1) fails at vertex {v}")
    exempt = {g.edge_id(pprime[i], pprime[i + 1]) for i in range(len(pprime) - 1)}
    witness = _mono_path_ends_ok(g, phi, exempt)
    if witness is not None:
        raise GeodesicColouringError(f"(2) fails at path {witness[:6]}...")
    comps = monochromatic_components(g, phi)
    if comps.cycles:
        raise GeodesicColouringError("(3) monochromatic cycle")
    if not _coloured_within(ctx, phi, 3):
        raise GeodesicColouringError("(4) coloured edge beyond distance 3")
    find_exceptional(ctx, phi, D, pprime)   # (5): raises unless all centres fit
    validate_overlay(ctx, D)


def validate_overlay(ctx: GeodesicContext, D: OrientedOverlay) -> None:
    """Structural facts about the oriented forest: out-degree <= 1, forest,
    one sink per tree, leaves interior to P, diameter >= leaves - 1, and
    3-binary good trees are caterpillars."""
    g = ctx.g
    adj: dict[int, list[int]] = {}
    outdeg: dict[int, int] = {}
    for e, (t, h) in D.heads.items():
        adj.setdefault(t, []).append(h)
        adj.setdefault(h, []).append(t)
        outdeg[t] = outdeg.get(t, 0) + 1
        if outdeg[t] > 1:
            raise GeodesicColouringError(f"out-degree 2 at {t}")
    seen: set[int] = set()
    for root in adj:
        if root in seen:
            continue
        stack = [root]
        comp = []
        seen.add(root)
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        nedges = sum(len(adj[v]) for v in comp) // 2
        if nedges != len(comp) - 1:
            raise GeodesicColouringError("overlay component has a cycle")
        sinks = [v for v in comp if outdeg.get(v, 0) == 0]
        if len(sinks) != 1:
            raise GeodesicColouringError("overlay tree without a single sink")
        sink = sinks[0]
        leaves = [v for v in comp if len(adj[v]) == 1 and v != sink]
        if any(v not in ctx.pos or ctx.pos[v] in (0, ctx.length)
               for v in leaves):
            raise GeodesicColouringError("overlay leaf off the interior of P")
        diam = _tree_diameter(adj, comp)
        if diam < len(leaves) - 1:
            raise GeodesicColouringError("overlay tree is not good")
        if len(adj[sink]) == 3 and all(len(adj[v]) in (1, 3) for v in comp):
            if not _is_caterpillar(adj, comp):
                raise GeodesicColouringError("good 3-binary tree not a caterpillar")


def _tree_diameter(adj, comp) -> int:
    from collections import deque
    def far(s):
        dist = {s: 0}
        q = deque([s])
        last, dl = s, 0
        while q:
            v = q.popleft()
            for w in adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    if dist[w] > dl:
                        last, dl = w, dist[w]
                    q.append(w)
        return last, dl
    a, _ = far(comp[0])
    _, d = far(a)
    return d


def _is_caterpillar(adj, comp) -> bool:
    if len(comp) <= 2:
        return True
    rest = [v for v in comp if len(adj[v]) > 1]
    deg = {v: sum(1 for w in adj[v] if w in set(rest)) for v in rest}
    return all(d <= 2 for d in deg.values()) and \
        sum(1 for d in deg.values() if d <= 1) <= 2


def validate_after_fix(ctx: GeodesicContext, phi2: Colouring,
                       pprime: list[int]) -> None:
    """Stage II postconditions."""
    g = ctx.g
    w = check_e1(g, phi2)
    if w is not None:
        raise GeodesicColouringError(f"(1) single-coloured vertex {w}")
    exempt = {g.edge_id(pprime[i], pprime[i + 1]) for i in range(len(pprime) - 1)}
    if None in exempt:
        raise GeodesicColouringError("P' not a path in the host")
    for e in exempt:
        if phi2.values[e] != BLUE:
            raise GeodesicColouringError("P' contains a non-blue edge")
    witness = _mono_path_ends_ok(g, phi2, exempt)
    if witness is not None:
        raise GeodesicColouringError(f"(2) fails at {witness[:6]}...")
    if monochromatic_components(g, phi2).cycles:
        raise GeodesicColouringError("(3) monochromatic cycle")
    if not _coloured_within(ctx, phi2, 3):
        raise GeodesicColouringError("(4) coloured edge beyond distance 3")


def _coloured_connected(ctx: GeodesicContext, phi: Colouring) -> bool:
    from .colouring import coloured_components
    return len(coloured_components(ctx.g, phi)) <= 1


def validate_comb(ctx: GeodesicContext, phi: Colouring) -> None:
    """Comb lemma: coloured edges within distance 3 of P and connected;
    bichromatic at coloured degree >= 2; single-colour cycles carry two
    consecutive uncoloured edges."""
    if not _coloured_within(ctx, phi, 3):
        raise GeodesicColouringError("comb (1): edge beyond distance 3")
    if not _coloured_connected(ctx, phi):
        raise GeodesicColouringError("comb (1): coloured part disconnected")
    w = check_e1(ctx.g, phi)
    if w is not None:
        raise GeodesicColouringError(f"comb (2): vertex {w}")
    bad = enumerate_e3_bad(ctx.g, phi)
    if bad:
        raise GeodesicColouringError(f"comb (3): bad cycle {bad[0][:8]}")


def validate_partial_col(ctx: GeodesicContext, phi: Colouring,
                         require_connected: bool = True) -> None:
    """Stage III postconditions (distance 4)."""
    if not _coloured_within(ctx, phi, 4):
        raise GeodesicColouringError("phi3 (1): edge beyond distance 4")
    if require_connected and not _coloured_connected(ctx, phi):
        raise GeodesicColouringError("phi3 (1): coloured part disconnected")
    w = check_e1(ctx.g, phi)
    if w is not None:
        raise GeodesicColouringError(f"phi3 (2): vertex {w}")
    bad = enumerate_e3_bad(ctx.g, phi)
    if bad:
        raise GeodesicColouringError(f"phi3 (3): bad cycle {bad[0][:8]}")


# ---------------------------------------------------------------------------
# the dispatcher
# ---------------------------------------------------------------------------

def colour_around_geodesic(g: CubicGraph, P: Geodesic,
                           ell: int) -> tuple[Colouring, GadgetInstance]:
    """Build a partial colouring near P containing a blue ell-gadget, with
    all coloured edges within distance 4 of P; the staged route unless the
    clean caterpillar fallback applies. Raises GeodesicColouringError when
    the structure drifts (caller re-harvests)."""
    ctx = GeodesicContext(g, list(P.vertices))
    if ctx.length < 5 * ell + 200:
        raise GeodesicColouringError(
            f"geodesic length {ctx.length} < {5 * ell + 200}")
    phi1, D, pprime = precolour(ctx)
    validate_only_mono(ctx, phi1, D, pprime)
    phi2, pprime2, copies = fix_exceptional(ctx, phi1, D, pprime)
    validate_after_fix(ctx, phi2, pprime2)
    case = detect_gadget_case(ctx, phi2, pprime2, ell, copies)
    if case.case == "fallback-comb":
        sub_ctx = GeodesicContext(g, case.subpath)
        comb_case = classify_comb_case(sub_ctx, ell)
        phi, inst = comb_colour(sub_ctx, ell, comb_case)
        return phi, inst
    return create_gadget(ctx, phi2, pprime2, case, ell)
