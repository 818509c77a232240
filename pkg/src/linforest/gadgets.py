"""Gadget templates, embedded instances, the two-edge swap, and the exact
component-count delta it produces.

A blue length-ell gadget holds a maximal blue path of length exactly ell
whose ends meet two red edges; swapping the colours of q1q2 and q2q3 turns
it into a blue (ell-1)-path plus bookkeeping at lengths 1 and 2, leaving
every red path count unchanged. Red gadgets are the mirror image.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from random import Random
from typing import Optional

from .colouring import BLUE, RED, UNCOLOURED, Colouring, profile
from .graph import CubicGraph

TYPE_I = "I"
TYPE_II = "II"


@dataclass(frozen=True)
class GadgetTemplate:
    """Abstract template on local vertex ids 0..size-1.

    q_path holds q0..q_{ell+2}; arm1 runs from q1 (TypeII: to q3; TypeI: to
    the Q1 tip); arm2 (TypeI only) runs from q3 to the Q2 tip. Boundary
    edges e1..e5 (and f1..f4 for TypeI) are stored as local vertex pairs;
    their far endpoints are fresh local vertices.
    """

    kind: str
    ell: int
    size: int
    q_path: tuple[int, ...]
    arm1: tuple[int, ...]
    arm2: tuple[int, ...]                    # empty for TypeII
    boundary: tuple[tuple[int, int], ...]    # e1..e5 then f1..f4
    colour_a: dict = field(compare=False, default=None)  # local edge -> colour

    def local_edges(self) -> list[tuple[int, int]]:
        out = []
        qs = self.q_path
        out += [(qs[i], qs[i + 1]) for i in range(len(qs) - 1)]
        for arm in (self.arm1, self.arm2):
            out += [(arm[i], arm[i + 1]) for i in range(len(arm) - 1)]
        out += list(self.boundary)
        return out

    def swap_pair(self) -> tuple[tuple[int, int], tuple[int, int]]:
        qs = self.q_path
        return (qs[1], qs[2]), (qs[2], qs[3])

    def colour_b(self) -> dict:
        chi_b = dict(self.colour_a)
        a, b = self.swap_pair()
        chi_b[_key(*a)] = BLUE
        chi_b[_key(*b)] = RED
        return chi_b


def _key(u, v):
    return (u, v) if u < v else (v, u)


def instantiate(kind: str, ell: int, arm_length: Optional[int] = None) -> GadgetTemplate:
    """Template for a blue ell-gadget of the given kind.

    TypeI defaults to unit arms Q1, Q2 (the comb shape); TypeII's arm joins
    q1 to q3 and defaults to length 2 (path through one middle vertex).
    Raises ValueError for ell < 3.
    """
    if ell < 3:
        raise ValueError(f"gadgets need ell >= 3, got {ell}")
    if kind not in (TYPE_I, TYPE_II):
        raise ValueError(f"unknown gadget kind {kind!r}")
    nxt = 0

    def fresh(k=1):
        nonlocal nxt
        out = list(range(nxt, nxt + k))
        nxt += k
        return out

    q = fresh(ell + 3)
    colour = {}
    for i in range(ell + 2):
        colour[_key(q[i], q[i + 1])] = RED if i == 1 else BLUE
    if kind == TYPE_II:
        alen = 2 if arm_length is None else arm_length
        if alen < 1:
            raise ValueError("TypeII arm length >= 1")
        mid = fresh(alen - 1)
        arm1 = tuple([q[1]] + mid + [q[3]])
        arm2: tuple[int, ...] = ()
    else:
        alen = 1 if arm_length is None else arm_length
        if alen < 1:
            raise ValueError("TypeI arm length >= 1")
        mid1, mid2 = fresh(alen - 1), fresh(alen - 1)
        tip1, tip2 = fresh(1)[0], fresh(1)[0]
        arm1 = tuple([q[1]] + mid1 + [tip1])
        arm2 = tuple([q[3]] + mid2 + [tip2])
    for arm in (arm1, arm2):
        for i in range(len(arm) - 1):
            colour[_key(arm[i], arm[i + 1])] = RED
    # boundary: e1, e2 at q0; e3 at q2; e4, e5 at q_{ell+2}; f1..f4 at tips
    ends = fresh(5)
    boundary = [(q[0], ends[0]), (q[0], ends[1]), (q[2], ends[2]),
                (q[ell + 2], ends[3]), (q[ell + 2], ends[4])]
    for uv in boundary:
        colour[_key(*uv)] = RED
    if kind == TYPE_I:
        fs = fresh(4)
        fb = [(arm1[-1], fs[0]), (arm1[-1], fs[1]),
              (arm2[-1], fs[2]), (arm2[-1], fs[3])]
        for uv in fb:
            colour[_key(*uv)] = BLUE
        boundary += fb
    tpl = GadgetTemplate(kind=kind, ell=ell, size=nxt, q_path=tuple(q),
                         arm1=arm1, arm2=arm2, boundary=tuple(boundary),
                         colour_a=colour)
    _check_template(tpl)
    return tpl


def _check_template(tpl: GadgetTemplate) -> None:
    a = tpl.colour_a
    b = tpl.colour_b()
    diff = [k for k in a if a[k] != b[k]]
    p, q = tpl.swap_pair()
    assert sorted(diff) == sorted([_key(*p), _key(*q)]), \
        "colourings must differ exactly on the swap pair"
    qs = tpl.q_path
    assert len(qs) == tpl.ell + 3
    # blue path q2..q_{ell+2} of length exactly ell, ends met by red edges
    for i in range(2, tpl.ell + 2):
        assert a[_key(qs[i], qs[i + 1])] == BLUE
    assert a[_key(qs[1], qs[2])] == RED


@dataclass
class GadgetInstance:
    """A template embedded in a host graph.

    `core_map` sends every template-local vertex to a host vertex (boundary
    far endpoints included); `orientation` is "blue" when host colours match
    colour_a literally and "red" when they match with colours exchanged.
    """

    template: GadgetTemplate
    core_map: dict[int, int]
    orientation: str = "blue"

    def host_edges(self, g: CubicGraph) -> dict[tuple[int, int], int]:
        """Local edge key -> host edge id; raises if any edge is missing."""
        out = {}
        for (lu, lv) in self.template.local_edges():
            hu, hv = self.core_map[lu], self.core_map[lv]
            e = g.edge_id(hu, hv)
            if e is None:
                raise ValueError(f"instance edge {(hu, hv)} not in host")
            out[_key(lu, lv)] = e
        return out

    def expected_colours(self, which: str = "a") -> dict:
        base = self.template.colour_a if which == "a" else self.template.colour_b()
        if self.orientation == "red":
            return {k: (RED if c == BLUE else BLUE) for k, c in base.items()}
        return dict(base)

    def matches(self, g: CubicGraph, chi: Colouring, which: str = "a") -> bool:
        try:
            host = self.host_edges(g)
        except ValueError:
            return False
        expected = self.expected_colours(which)
        return all(chi.values[host[k]] == expected[k] for k in host)

    def swap_edge_ids(self, g: CubicGraph) -> tuple[int, int]:
        p, q = self.template.swap_pair()
        e1 = g.edge_id(self.core_map[p[0]], self.core_map[p[1]])
        e2 = g.edge_id(self.core_map[q[0]], self.core_map[q[1]])
        return e1, e2

    def vertex_ids(self) -> set[int]:
        return set(self.core_map.values())


def apply_swap(g: CubicGraph, chi: Colouring, inst: GadgetInstance) -> Colouring:
    """New colouring with the instance's two swap edges exchanged.

    Requires the host colours to match the instance (in either state, so a
    double application restores the original)."""
    if not (inst.matches(g, chi, "a") or inst.matches(g, chi, "b")):
        raise ValueError("host colouring does not match the instance")
    out = chi.copy()
    e1, e2 = inst.swap_edge_ids(g)
    out.values[e1] = RED if out.values[e1] == BLUE else BLUE
    out.values[e2] = RED if out.values[e2] == BLUE else BLUE
    return out


def measure_delta(g: CubicGraph, chi: Colouring,
                  inst: GadgetInstance) -> tuple[dict, dict]:
    """(red path count delta, blue path count delta) caused by the swap,
    keyed by path length; computed by full recounts before and after."""
    if not chi.is_total():
        raise ValueError("measure_delta needs a total colouring")
    before = profile(g, chi)
    after = profile(g, apply_swap(g, chi, inst))
    return after.path_delta(before)


def expected_swap_delta(ell: int, blue_gadget: bool = True) -> tuple[dict, dict]:
    """The contract: b(P_ell)-1, b(P_{ell-1})+1, b(P_2)+1, b(P_1)-1, all red
    counts unchanged (mirrored for red gadgets)."""
    db: dict[int, int] = {}
    for t, d in ((ell, -1), (ell - 1, +1), (2, +1), (1, -1)):
        db[t] = db.get(t, 0) + d
    db = {t: d for t, d in db.items() if d}
    return ({}, db) if blue_gadget else (db, {})


def find_surviving(g: CubicGraph, chi: Colouring,
                   registry: list[GadgetInstance]) -> list[GadgetInstance]:
    """Instances whose host colours equal their registered colouring
    exactly."""
    return [inst for inst in registry if inst.matches(g, chi, "a")]


# ---------------------------------------------------------------------------
# registry serialization: one JSON record per line
# ---------------------------------------------------------------------------

def registry_to_text(registry: list[GadgetInstance]) -> str:
    lines = []
    for inst in registry:
        rec = {
            "kind": inst.template.kind,
            "ell": inst.template.ell,
            "orientation": inst.orientation,
            "arm1": len(inst.template.arm1) - 1 if inst.template.arm1 else 0,
            "map": {str(k): v for k, v in inst.core_map.items()},
        }
        lines.append(json.dumps(rec, sort_keys=True))
    return "\n".join(lines) + ("\n" if lines else "")


def registry_from_text(text: str) -> list[GadgetInstance]:
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rec = json.loads(line)
        tpl = instantiate(rec["kind"], rec["ell"],
                          arm_length=rec["arm1"] or None)
        core = {int(k): v for k, v in rec["map"].items()}
        out.append(GadgetInstance(tpl, core, rec["orientation"]))
    return out


# ---------------------------------------------------------------------------
# test hosts: embed a template, complete to a cubic graph, extend the
# colouring to a total path colouring
# ---------------------------------------------------------------------------

def build_template_host(kind: str, ell: int, rng: Random,
                        arm_length: Optional[int] = None,
                        red_gadget: bool = False
                        ) -> tuple[CubicGraph, Colouring, GadgetInstance]:
    """Random cubic host whose colouring extends a freshly embedded gadget.

    Free valences of the embedded template are wired together at random
    (never joining two core vertices), the remainder capped; the completion
    colouring is found by randomized backtracking under the all-components-
    are-paths constraint.
    """
    for _ in range(64):
        built = _try_build_host(kind, ell, rng, arm_length, red_gadget)
        if built is not None:
            return built
    raise RuntimeError("could not complete a gadget host")


def _try_build_host(kind, ell, rng, arm_length, red_gadget):
    tpl = instantiate(kind, ell, arm_length)
    edges = list(tpl.local_edges())
    nxt = tpl.size
    deg: dict[int, int] = {}
    for (u, v) in edges:
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    core = set(tpl.q_path) | set(tpl.arm1) | set(tpl.arm2)
    slots = []
    for v in range(tpl.size):
        for _ in range(3 - deg.get(v, 0)):
            slots.append(v)
    rng.shuffle(slots)
    existing = {_key(u, v) for (u, v) in edges}
    # random slot pairing, keeping core vertices apart and the graph simple
    leftovers = []
    while len(slots) >= 2:
        u = slots.pop()
        placed = False
        for i, v in enumerate(slots):
            if u == v or _key(u, v) in existing:
                continue
            if u in core and v in core:
                continue
            if rng.random() < 0.4:
                continue  # leave some slots for caps: varied hosts
            slots.pop(i)
            edges.append((u, v))
            existing.add(_key(u, v))
            deg[u] = deg.get(u, 0) + 1
            deg[v] = deg.get(v, 0) + 1
            placed = True
            break
        if not placed:
            leftovers.append(u)
    leftovers.extend(slots)
    for v in leftovers:
        a, b, c, d, w = range(nxt, nxt + 5)
        nxt += 5
        edges += [(a, b), (a, c), (a, d), (b, c), (b, d), (c, w), (d, w),
                  (w, v)]
    assert nxt % 2 == 0, "3-regular completion forces an even vertex count"
    g = CubicGraph(nxt, edges)
    chi = Colouring(g)
    inst = GadgetInstance(tpl, {v: v for v in range(tpl.size)},
                          orientation="red" if red_gadget else "blue")
    expected = inst.expected_colours("a")
    for k, c in expected.items():
        chi.values[g.edge_id(*k)] = c
    if not complete_path_colouring(g, chi, rng):
        return None
    return g, chi, inst


def complete_path_colouring(g: CubicGraph, chi: Colouring, rng: Random,
                            node_budget: int = 200000) -> bool:
    """Extend `chi` in place to a total colouring whose monochromatic
    components are all paths; randomized backtracking. Returns success."""
    from .union_find import RollbackDSU
    red_deg = [0] * g.n
    blue_deg = [0] * g.n
    dsu = {RED: RollbackDSU(g.n), BLUE: RollbackDSU(g.n)}
    for e in range(g.m):
        c = chi.values[e]
        if c != UNCOLOURED:
            u, v = g.edges[e]
            (red_deg if c == RED else blue_deg)[u] += 1
            (red_deg if c == RED else blue_deg)[v] += 1
            if not dsu[c].union(u, v):
                return False  # pre-coloured part already has a cycle
    if any(d > 2 for d in red_deg) or any(d > 2 for d in blue_deg):
        return False
    todo = [e for e in range(g.m) if chi.values[e] == UNCOLOURED]
    rng.shuffle(todo)
    budget = [node_budget]

    def feasible(e, c):
        u, v = g.edges[e]
        degs = red_deg if c == RED else blue_deg
        if degs[u] >= 2 or degs[v] >= 2:
            return False
        return dsu[c].find(u) != dsu[c].find(v)

    def place(i):
        if budget[0] <= 0:
            return False
        budget[0] -= 1
        if i == len(todo):
            return True
        e = todo[i]
        u, v = g.edges[e]
        order = (RED, BLUE) if rng.getrandbits(1) else (BLUE, RED)
        for c in order:
            if not feasible(e, c):
                continue
            degs = red_deg if c == RED else blue_deg
            chi.values[e] = c
            degs[u] += 1
            degs[v] += 1
            dsu[c].union(u, v)
            if place(i + 1):
                return True
            dsu[c].undo()
            degs[u] -= 1
            degs[v] -= 1
            chi.values[e] = UNCOLOURED
        return False

    return place(0)
