"""Colour states, monochromatic component analysis, and the E1-E4 validator.

A colouring assigns every edge id one of UNCOLOURED / RED / BLUE. Partial
colourings are first class: all component analysis ignores uncoloured edges.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .graph import CubicGraph, bfs_distances

UNCOLOURED = 0
RED = 1
BLUE = 2

COLOUR_CHARS = {UNCOLOURED: "U", RED: "R", BLUE: "B"}
CHAR_COLOURS = {v: k for k, v in COLOUR_CHARS.items()}


def opposite(colour: int) -> int:
    if colour == RED:
        return BLUE
    if colour == BLUE:
        return RED
    raise ValueError("uncoloured edge has no opposite")


class Colouring:
    """Per-edge colour values over a host CubicGraph."""

    __slots__ = ("graph", "values")

    def __init__(self, graph: CubicGraph, values: Optional[bytearray] = None):
        self.graph = graph
        self.values = bytearray(graph.m) if values is None else values

    def copy(self) -> "Colouring":
        return Colouring(self.graph, bytearray(self.values))

    def is_total(self) -> bool:
        return UNCOLOURED not in self.values

    def coloured_edges(self) -> list[int]:
        return [e for e, c in enumerate(self.values) if c != UNCOLOURED]

    def colour_degree(self, v: int, colour: int) -> int:
        g = self.graph
        base = 3 * v
        vals = self.values
        return sum(1 for k in range(3) if vals[g.eid[base + k]] == colour)

    def count(self, colour: int) -> int:
        return self.values.count(colour)

    def __eq__(self, other):
        return isinstance(other, Colouring) and self.values == other.values \
            and self.graph is other.graph

    def __repr__(self):
        return (f"Colouring(r={self.count(RED)}, b={self.count(BLUE)}, "
                f"u={self.count(UNCOLOURED)})")


def colouring_to_text(chi: Colouring) -> str:
    """One line per edge: "edgeId u v {R|B|U}". Round-trips bit-exactly."""
    g = chi.graph
    lines = []
    for e, (u, v) in enumerate(g.edges):
        lines.append(f"{e} {u} {v} {COLOUR_CHARS[chi.values[e]]}")
    return "\n".join(lines) + "\n"


def colouring_from_text(g: CubicGraph, text: str) -> Colouring:
    chi = Colouring(g)
    seen = 0
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"bad colouring line: {raw!r}")
        e, u, v, c = int(parts[0]), int(parts[1]), int(parts[2]), parts[3]
        if not (0 <= e < g.m) or g.edges[e] != (min(u, v), max(u, v)):
            raise ValueError(f"edge {e} does not match host graph: {raw!r}")
        if c not in CHAR_COLOURS:
            raise ValueError(f"unknown colour {c!r}")
        chi.values[e] = CHAR_COLOURS[c]
        seen += 1
    if seen != g.m:
        raise ValueError(f"colouring covers {seen} of {g.m} edges")
    return chi


# ---------------------------------------------------------------------------
# monochromatic components
# ---------------------------------------------------------------------------

@dataclass
class MonoComponent:
    colour: int
    edge_ids: list[int]
    vertices: list[int]      # path: in order; cycle: cyclic order
    is_cycle: bool

    @property
    def length(self) -> int:
        return len(self.edge_ids)


@dataclass
class MonoComponents:
    paths: list[MonoComponent]
    cycles: list[MonoComponent]
    nonlinear: list[int]     # vertices with monochromatic degree >= 3

    def all(self):
        return self.paths + self.cycles


def monochromatic_components(g: CubicGraph, chi: Colouring) -> MonoComponents:
    """Split each colour class into paths, cycles, and degree witnesses.

    Every coloured edge lands in exactly one component. Vertices of
    monochromatic degree 3 are reported in `nonlinear`, and components
    through them are decomposed edge-by-edge into witness paths so the
    coverage invariant still holds.
    """
    vals = chi.values
    eid = g.eid
    paths: list[MonoComponent] = []
    cycles: list[MonoComponent] = []
    nonlinear: list[int] = []
    for colour in (RED, BLUE):
        deg = [0] * g.n
        for e in range(g.m):
            if vals[e] == colour:
                u, v = g.edges[e]
                deg[u] += 1
                deg[v] += 1
        bad = [v for v in range(g.n) if deg[v] >= 3]
        nonlinear.extend(bad)
        badset = set(bad)
        visited = bytearray(g.m)

        def walk(start_v, start_e):
            # follow the colour class from an endpoint; returns component
            verts = [start_v]
            eids = []
            v, e = start_v, start_e
            while True:
                visited[e] = 1
                eids.append(e)
                v = g.other_end(e, v)
                verts.append(v)
                if v in badset:
                    break
                nxt = -1
                base = 3 * v
                for k in range(3):
                    ee = eid[base + k]
                    if vals[ee] == colour and not visited[ee]:
                        nxt = ee
                        break
                if nxt < 0:
                    break
                e = nxt
            return verts, eids

        # components with degree-3 vertices: peel off arcs as witness paths
        for v in bad:
            base = 3 * v
            for k in range(3):
                e = eid[base + k]
                if vals[e] == colour and not visited[e]:
                    verts, eids = walk(v, e)
                    paths.append(MonoComponent(colour, eids, verts, False))
        # proper paths: start from degree-1 endpoints
        for v in range(g.n):
            if deg[v] != 1:
                continue
            base = 3 * v
            for k in range(3):
                e = eid[base + k]
                if vals[e] == colour and not visited[e]:
                    verts, eids = walk(v, e)
                    paths.append(MonoComponent(colour, eids, verts, False))
        # what remains of the colour class is a union of cycles
        for e0 in range(g.m):
            if vals[e0] != colour or visited[e0]:
                continue
            u0 = g.edges[e0][0]
            verts, eids = walk(u0, e0)
            cycles.append(MonoComponent(colour, eids, verts[:-1], True))
    return MonoComponents(paths, cycles, sorted(set(nonlinear)))


@dataclass
class ComponentProfile:
    """Path/cycle counts per colour: maps length t -> count."""

    red_paths: Counter = field(default_factory=Counter)
    blue_paths: Counter = field(default_factory=Counter)
    red_cycles: Counter = field(default_factory=Counter)
    blue_cycles: Counter = field(default_factory=Counter)

    def edge_total(self, colour: int) -> int:
        ps, cs = ((self.red_paths, self.red_cycles) if colour == RED
                  else (self.blue_paths, self.blue_cycles))
        return sum(t * c for t, c in ps.items()) + sum(t * c for t, c in cs.items())

    def max_component_length(self) -> int:
        return max(
            [t for t in self.red_paths] + [t for t in self.blue_paths]
            + [t for t in self.red_cycles] + [t for t in self.blue_cycles]
            + [0])

    def max_imbalance(self) -> int:
        ts = set(self.red_paths) | set(self.blue_paths)
        return max((abs(self.red_paths[t] - self.blue_paths[t]) for t in ts),
                   default=0)

    def path_delta(self, other: "ComponentProfile") -> tuple[dict, dict]:
        """(red delta, blue delta) of path counts: self minus other."""
        dr, db = {}, {}
        for t in set(self.red_paths) | set(other.red_paths):
            d = self.red_paths[t] - other.red_paths[t]
            if d:
                dr[t] = d
        for t in set(self.blue_paths) | set(other.blue_paths):
            d = self.blue_paths[t] - other.blue_paths[t]
            if d:
                db[t] = d
        return dr, db


def profile(g: CubicGraph, chi: Colouring,
            comps: Optional[MonoComponents] = None) -> ComponentProfile:
    if comps is None:
        comps = monochromatic_components(g, chi)
    prof = ComponentProfile()
    for c in comps.paths:
        (prof.red_paths if c.colour == RED else prof.blue_paths)[c.length] += 1
    for c in comps.cycles:
        (prof.red_cycles if c.colour == RED else prof.blue_cycles)[c.length] += 1
    return prof


def is_isomorphic_linear_forests(g: CubicGraph, chi: Colouring) -> bool:
    """True iff both classes are linear forests with equal path-length
    multisets (which characterises isomorphism for linear forests)."""
    if not chi.is_total():
        raise ValueError("colouring is not total")
    comps = monochromatic_components(g, chi)
    if comps.nonlinear or comps.cycles:
        return False
    prof = profile(g, chi, comps)
    return prof.red_paths == prof.blue_paths


# ---------------------------------------------------------------------------
# extendability (E1-E4)
# ---------------------------------------------------------------------------

@dataclass
class ExtendabilityReport:
    e1_ok: bool = True
    e2_ok: bool = True
    e3_ok: bool = True
    e4_ok: bool = True
    e1_witness: Optional[int] = None                 # offending vertex
    e2_witness: Optional[tuple] = None               # (kind, payload)
    e3_witness: Optional[list[int]] = None           # vertex cycle
    e4_witness: Optional[list[int]] = None           # vertex cycle

    @property
    def ok(self) -> bool:
        return self.e1_ok and self.e2_ok and self.e3_ok and self.e4_ok


def coloured_components(g: CubicGraph, chi: Colouring) -> list[list[int]]:
    """Connected components of the coloured subgraph (vertex lists)."""
    vals = chi.values
    seen = bytearray(g.n)
    comps = []
    for e in range(g.m):
        if vals[e] == UNCOLOURED:
            continue
        for start in g.edges[e]:
            if seen[start]:
                continue
            comp = [start]
            seen[start] = 1
            stack = [start]
            while stack:
                v = stack.pop()
                base = 3 * v
                for k in range(3):
                    if vals[g.eid[base + k]] != UNCOLOURED:
                        w = g.nbr[base + k]
                        if not seen[w]:
                            seen[w] = 1
                            comp.append(w)
                            stack.append(w)
            comps.append(comp)
    return comps


def check_e1(g: CubicGraph, chi: Colouring) -> Optional[int]:
    """First vertex with >= 2 coloured edges all of one colour, if any."""
    vals = chi.values
    for v in range(g.n):
        r = b = 0
        base = 3 * v
        for k in range(3):
            c = vals[g.eid[base + k]]
            if c == RED:
                r += 1
            elif c == BLUE:
                b += 1
        if r + b >= 2 and (r == 0 or b == 0):
            return v
    return None


def enumerate_e3_bad(g: CubicGraph, chi: Colouring,
                     length_cap: Optional[int] = None) -> list[list[int]]:
    """Cycles using only one colour (plus uncoloured edges) with no two
    consecutive uncoloured edges.

    The search walks out of every coloured edge, tracking whether the last
    step was uncoloured; with coloured components small and far apart, such
    cycles stay near one component, so the DFS is cheap. A `length_cap`
    (defaulting to 2*diam(coloured part)+4 per component, computed by the
    caller) bounds pathological hosts.
    """
    vals = chi.values
    found: list[list[int]] = []
    seen_keys: set = set()

    def canonical(cycle: list[int]) -> tuple:
        k = len(cycle)
        best = None
        for rot in range(k):
            for seq in (cycle[rot:] + cycle[:rot],
                        list(reversed(cycle[rot:] + cycle[:rot]))):
                t = tuple(seq)
                if best is None or t < best:
                    best = t
        return best

    comp_size = {}
    if length_cap is None:
        for comp in coloured_components(g, chi):
            for v in comp:
                comp_size[v] = len(comp)
    coloured = [e for e in range(g.m) if vals[e] != UNCOLOURED]
    for e0 in coloured:
        colour = vals[e0]
        u0, v0 = g.edges[e0]
        # sound cap: longer single-colour cycles must leave the coloured
        # ball and so contain two consecutive uncoloured edges
        cap = (length_cap if length_cap is not None
               else 2 * comp_size.get(u0, 1) + 4)
        # DFS for cycles through e0 using colours {colour, UNCOLOURED},
        # never two uncoloured edges in a row.
        stack = [(v0, [u0, v0], False, {u0, v0})]
        while stack:
            v, path, last_unc, onpath = stack.pop()
            if len(path) - 1 > cap:
                continue
            base = 3 * v
            for k in range(3):
                e = g.eid[base + k]
                w = g.nbr[base + k]
                c = vals[e]
                if c != UNCOLOURED and c != colour:
                    continue
                unc = c == UNCOLOURED
                if unc and last_unc:
                    continue
                if w == u0 and len(path) >= 3:
                    if e == e0:
                        continue
                    # closing edge; also forbid closing with double-uncoloured
                    first_unc = vals[g.edge_id(path[0], path[1])] == UNCOLOURED
                    if unc and (last_unc or first_unc):
                        continue
                    key = canonical(path)
                    if key not in seen_keys:
                        seen_keys.add(key)
                        found.append(list(path))
                    continue
                if w in onpath:
                    continue
                stack.append((w, path + [w], unc, onpath | {w}))
    return found


def enumerate_e4_bad(g: CubicGraph, chi: Colouring) -> list[list[int]]:
    """Cycles that are odd, fully uncoloured, and contain at most two
    vertices of uncoloured degree 3 (returned as vertex sequences).

    Works on the chain-contracted uncoloured subgraph: qualifying cycles are
    isolated cycles, chain self-loops at one branch vertex, or chain pairs
    between two branch vertices.
    """
    vals = chi.values
    udeg = [0] * g.n
    for e in range(g.m):
        if vals[e] == UNCOLOURED:
            u, v = g.edges[e]
            udeg[u] += 1
            udeg[v] += 1
    seen = bytearray(g.m)
    bad: list[list[int]] = []

    def follow_chain(v, e):
        """Walk a maximal uncoloured chain from branch/end vertex v via e."""
        verts = [v]
        while True:
            seen[e] = 1
            w = g.other_end(e, verts[-1])
            verts.append(w)
            if udeg[w] != 2:
                return verts
            base = 3 * w
            nxt = -1
            for k in range(3):
                ee = g.eid[base + k]
                if vals[ee] == UNCOLOURED and not seen[ee] and ee != e:
                    nxt = ee
                    break
            if nxt < 0:
                return verts
            e = nxt

    chains: dict[tuple[int, int], list[list[int]]] = {}
    for v in range(g.n):
        if udeg[v] == 2:
            continue
        base = 3 * v
        for k in range(3):
            e = g.eid[base + k]
            if vals[e] == UNCOLOURED and not seen[e]:
                verts = follow_chain(v, e)
                a, b = verts[0], verts[-1]
                key = (a, b) if a <= b else (b, a)
                chains.setdefault(key, []).append(verts)
    # chain self-loops (cycle through exactly one branch vertex)
    for (a, b), lst in chains.items():
        if a == b:
            for verts in lst:
                if (len(verts) - 1) % 2 == 1:
                    bad.append(verts[:-1])
        elif udeg[a] != 0 and udeg[b] != 0:
            # cycles through exactly two branch vertices: chain pairs
            for i in range(len(lst)):
                for j in range(i + 1, len(lst)):
                    cyc_len = (len(lst[i]) - 1) + (len(lst[j]) - 1)
                    if cyc_len % 2 == 1:
                        bad.append(lst[i][:-1] + list(reversed(lst[j]))[:-1])
    # isolated cycles (all vertices of uncoloured degree 2)
    for e0 in range(g.m):
        if vals[e0] != UNCOLOURED or seen[e0]:
            continue
        u0 = g.edges[e0][0]
        if udeg[u0] != 2:
            continue
        verts = [u0]
        e = e0
        closed = False
        while True:
            seen[e] = 1
            w = g.other_end(e, verts[-1])
            if w == u0:
                closed = True
                break
            verts.append(w)
            base = 3 * w
            nxt = -1
            for k in range(3):
                ee = g.eid[base + k]
                if vals[ee] == UNCOLOURED and not seen[ee]:
                    nxt = ee
                    break
            if nxt < 0:
                break
            e = nxt
        if closed and len(verts) % 2 == 1:
            bad.append(verts)
    return bad


def check_extendable(g: CubicGraph, chi: Colouring, cfg) -> ExtendabilityReport:
    """Validate E1-E4 of an extendable pre-colouring; false flags carry a
    concrete witness. The empty colouring passes everything."""
    from .basecol import decompose_h123, H123Error

    rep = ExtendabilityReport()
    w = check_e1(g, chi)
    if w is not None:
        rep.e1_ok = False
        rep.e1_witness = w

    comps = coloured_components(g, chi)
    for comp in comps:
        if len(comp) > cfg.component_size_cap:
            rep.e2_ok = False
            rep.e2_witness = ("size", comp)
            break
    if rep.e2_ok and len(comps) > 1:
        label = [-1] * g.n
        for i, comp in enumerate(comps):
            for v in comp:
                label[v] = i
        for i, comp in enumerate(comps):
            dist = bfs_distances(g, comp, cutoff=9)
            for v in range(g.n):
                if 0 <= dist[v] <= 9 and label[v] not in (-1, i):
                    rep.e2_ok = False
                    rep.e2_witness = ("distance", (i, label[v]))
                    break
            if not rep.e2_ok:
                break

    bad3 = enumerate_e3_bad(g, chi)
    if bad3:
        rep.e3_ok = False
        rep.e3_witness = bad3[0]

    bad4 = enumerate_e4_bad(g, chi)
    if bad4:
        rep.e4_ok = False
        rep.e4_witness = bad4[0]
    else:
        uncoloured = [e for e in range(g.m) if chi.values[e] == UNCOLOURED]
        try:
            decompose_h123(g, uncoloured)
        except H123Error as exc:
            rep.e4_ok = False
            rep.e4_witness = exc.witness
    return rep
