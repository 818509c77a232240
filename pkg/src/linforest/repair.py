"""Repairing a union of geodesic colourings into a fully extendable
pre-colouring: eliminate the odd uncoloured cycles that block the
H1/H2/H3 decomposition, then assemble G0 with its gadget registry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .colouring import (BLUE, RED, UNCOLOURED, Colouring, check_e1,
                        coloured_components, enumerate_e3_bad,
                        enumerate_e4_bad, check_extendable)
from .gadgets import GadgetInstance
from .geodesic import GeodesicColouringError, colour_around_geodesic
from .graph import Config, CubicGraph, bfs_distances, harvest_geodesics


class RepairError(RuntimeError):
    pass


class InsufficientGeodesics(RuntimeError):
    def __init__(self, needed_length, achievable):
        self.needed_length = needed_length
        self.achievable = achievable
        super().__init__(
            f"no geodesics of length {needed_length}; achievable gadget "
            f"lengths: {achievable or 'none'}")


@dataclass
class BadCycle:
    kind: str                 # "E4bad" or "E3bad"
    vertices: list[int]
    branch_vertices: list[int]


def list_bad_cycles(g: CubicGraph, chi: Colouring) -> list[BadCycle]:
    out = []
    for verts in enumerate_e4_bad(g, chi):
        branch = [v for v in verts if _udeg(g, chi, v) == 3]
        out.append(BadCycle("E4bad", verts, branch))
    for verts in enumerate_e3_bad(g, chi):
        out.append(BadCycle("E3bad", verts, []))
    return out


def _udeg(g: CubicGraph, chi: Colouring, v: int) -> int:
    return sum(1 for k in range(3)
               if chi.values[g.eid[3 * v + k]] == UNCOLOURED)


def _stem(g: CubicGraph, cyc: list[int], i: int) -> tuple[int, int]:
    """(third neighbour, edge id) of cyc[i] off the cycle."""
    k = len(cyc)
    return g.third_neighbour(cyc[i], cyc[i - 1], cyc[(i + 1) % k])


def fix_bad_cycle(g: CubicGraph, chi: Colouring,
                  cyc: list[int]) -> Colouring:
    """Extend `chi` so the given E4-bad cycle stops being bad, preserving
    the degree and cycle invariants and never uncolouring an edge.

    Dispatch: adjacent uncoloured-degree-3 pair; touching both colours;
    otherwise a single-colour touch with an adjacent touched pair.
    """
    out = chi.copy()
    k = len(cyc)
    udeg = [_udeg(g, chi, v) for v in cyc]
    stems = [_stem(g, cyc, i) for i in range(k)]
    stem_cols = [chi.values[e] for (_, e) in stems]

    adj_branch = None
    for i in range(k):
        j = (i + 1) % k
        if udeg[i] == 3 and udeg[j] == 3:
            adj_branch = (i, j)
            break
    if adj_branch is not None:
        _fix_adjacent_uncoloured3(g, out, cyc, adj_branch)
        return out
    touched = {c for c in stem_cols if c != UNCOLOURED}
    if touched == {RED, BLUE}:
        _fix_touches_both(g, out, cyc, stems, stem_cols)
        return out
    if len(touched) == 1:
        colour = touched.pop()
        for i in range(k):
            j = (i + 1) % k
            if stem_cols[i] == colour and stem_cols[j] == colour:
                e = g.edge_id(cyc[i], cyc[j])
                out.values[e] = BLUE if colour == RED else RED
                return out
    raise RepairError(f"no fix branch applies to cycle {cyc}")


def _fix_adjacent_uncoloured3(g, out, cyc, pair) -> None:
    k = len(cyc)
    i2, i3 = pair
    # relabel so the cycle reads c1, c2, c3, ..., ck with c2, c3 the pair
    order = [cyc[(i2 - 1 + t) % k] for t in range(k)]
    c1, c2, c3 = order[0], order[1], order[2]
    stem1, e1 = g.third_neighbour(c1, order[-1], c2)
    col1 = out.values[e1]
    assert col1 != UNCOLOURED, "c1 must carry a coloured stem"
    red, blue = (col1, BLUE if col1 == RED else RED)
    c2p, e2p = g.third_neighbour(c2, c1, c3)

    def colour_tail():
        # colour c_i c_{i+1} opposite to the stem of c_i, for i = 4..k
        for t in range(3, k):
            ci = order[t]
            cnx = order[(t + 1) % k]
            _, es = g.third_neighbour(ci, order[t - 1], cnx)
            sc = out.values[es]
            assert sc != UNCOLOURED
            out.values[g.edge_id(ci, cnx)] = BLUE if sc == RED else RED

    if _udeg(g, out, c2p) == 3:
        out.values[g.edge_id(c1, c2)] = blue
        out.values[g.edge_id(c2, c3)] = red
        colour_tail()
    elif any(out.values[g.eid[3 * c2p + t]] == red for t in range(3)):
        out.values[g.edge_id(c1, c2)] = blue
        out.values[e2p] = blue
        out.values[g.edge_id(c2, c3)] = red
        colour_tail()
    else:
        out.values[g.edge_id(c1, c2)] = blue
        out.values[e2p] = red


def _fix_touches_both(g, out, cyc, stems, stem_cols) -> None:
    k = len(cyc)
    for i in range(k):
        if stem_cols[i] != UNCOLOURED:
            e = g.edge_id(cyc[i], cyc[(i + 1) % k])
            out.values[e] = BLUE if stem_cols[i] == RED else RED


def destroy_all_bad_cycles(g: CubicGraph, chi: Colouring) -> Colouring:
    """Fix every E4-bad cycle off a fixed snapshot list, re-checking badness
    before each fix. Asserts: no bad cycles remain, no new ones appeared
    mid-way, E1/E3 hold, and all growth stays within distance 2 of the
    originally coloured edges."""
    current = chi.copy()
    snapshot = enumerate_e4_bad(g, chi)
    keys = {frozenset(c) for c in snapshot}
    for cyc in snapshot:
        still = {frozenset(c) for c in enumerate_e4_bad(g, current)}
        if not still <= keys:
            raise RepairError("bad-cycle fixing created a new bad cycle")
        if frozenset(cyc) not in still:
            continue
        current = fix_bad_cycle(g, current, cyc)
    if enumerate_e4_bad(g, current):
        raise RepairError("bad cycles survived destruction")
    w = check_e1(g, current)
    if w is not None:
        raise RepairError(f"E1 broken at {w} during repair")
    if enumerate_e3_bad(g, current):
        raise RepairError("E3 broken during repair")
    # growth bound: every newly coloured edge within distance 2 of an
    # originally coloured one, and no edge was uncoloured
    old_cover = set()
    for e in range(g.m):
        if chi.values[e] != UNCOLOURED:
            if current.values[e] != chi.values[e]:
                raise RepairError("repair recoloured an already-coloured edge")
            old_cover.update(g.edges[e])
    if old_cover:
        dist = bfs_distances(g, old_cover, cutoff=2)
        for e in range(g.m):
            if current.values[e] != UNCOLOURED and chi.values[e] == UNCOLOURED:
                u, v = g.edges[e]
                if not (0 <= dist[u] <= 2 or 0 <= dist[v] <= 2):
                    raise RepairError("repair grew beyond distance 2")
    return current


# ---------------------------------------------------------------------------
# assembling G0
# ---------------------------------------------------------------------------

def assemble_g0(g: CubicGraph, cfg: Config
                ) -> tuple[Colouring, list[GadgetInstance]]:
    """Union of per-geodesic gadget colourings for every length in the
    configured range, repaired to a fully extendable G0.

    Raises InsufficientGeodesics when no geodesic is long enough for even
    the smallest gadget length (the report carries what is achievable)."""
    lo, hi = cfg.ell_range
    ells = list(range(lo, hi + 1))
    needed = 5 * hi + 200
    per = cfg.gadgets_per_length
    geos = harvest_geodesics(g, cfg, geo_length=needed,
                             separation=cfg.geo_separation,
                             max_count=4 * per * len(ells))
    if not geos:
        achievable = []
        probe = harvest_geodesics(g, cfg, geo_length=5 * lo + 200,
                                  separation=cfg.geo_separation, max_count=1)
        if probe:
            achievable = [lo]
        raise InsufficientGeodesics(needed, achievable)
    chi = Colouring(g)
    registry: list[GadgetInstance] = []
    pool = list(geos)
    for ell in ells:
        placed = 0
        while placed < per and pool:
            geo = pool.pop(0)
            try:
                phi, inst = colour_around_geodesic(g, geo, ell)
            except GeodesicColouringError:
                continue
            for e in range(g.m):
                if phi.values[e] != UNCOLOURED:
                    if chi.values[e] not in (UNCOLOURED, phi.values[e]):
                        raise RepairError("geodesic colourings collide")
                    chi.values[e] = phi.values[e]
            registry.append(inst)
            placed += 1
        if placed < per:
            raise InsufficientGeodesics(
                needed, [l for l in ells if l < ell])
    chi = destroy_all_bad_cycles(g, chi)
    report = check_extendable(g, chi, cfg)
    if not report.ok:
        raise RepairError(f"assembled G0 not extendable: {report}")
    for inst in registry:
        if not inst.matches(g, chi, "a"):
            raise RepairError("registry instance damaged during repair")
    return chi, registry


def bundle_to_text(chi: Colouring, registry: list[GadgetInstance]) -> str:
    from .colouring import colouring_to_text
    from .gadgets import registry_to_text
    return (colouring_to_text(chi) + "#--registry--\n"
            + registry_to_text(registry))


def bundle_from_text(g: CubicGraph, text: str
                     ) -> tuple[Colouring, list[GadgetInstance]]:
    from .colouring import colouring_from_text
    from .gadgets import registry_from_text
    if "#--registry--" in text:
        head, tail = text.split("#--registry--\n", 1)
    else:
        head, tail = text, ""
    return colouring_from_text(g, head), registry_from_text(tail)
