"""The randomized colouring steps chi1..chi4 and their diagnostics.

Randomness layout: one root seed; each component / cycle / path / edge draws
from its own stream keyed by a stable id (smallest edge id involved), which
mirrors the independence structure of the random process and keeps runs
reproducible regardless of iteration order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from random import Random
from typing import Optional

from .basecol import build_chi0, decompose_h123
from .colouring import (BLUE, RED, UNCOLOURED, Colouring, MonoComponent,
                        check_e1, monochromatic_components, profile)
from .graph import Config, CubicGraph, mix_seed


def _stream(seed: int, tag: int, ident: int) -> Random:
    return Random(mix_seed(seed, tag, ident))


# ---------------------------------------------------------------------------
# chi1: randomize the base colouring
# ---------------------------------------------------------------------------

def chi1_step(g: CubicGraph, g0: Colouring, chi0: Colouring, seed: int) -> Colouring:
    """Total red-blue colouring: each purple/green component is recoloured
    by one of its two alternating red-blue colourings, each coloured
    component of G0 keeps or swaps its colours; all choices independent.

    Postcondition (checked): every vertex is incident with two edges of one
    colour and one of the other.
    """
    chi = Colouring(g)
    comps = monochromatic_components(g, chi0)
    if comps.nonlinear:
        raise ValueError("chi0 has a branch vertex")
    for comp in comps.all():
        if comp.is_cycle and comp.length % 2 == 1:
            raise ValueError("chi0 has an odd monochromatic cycle")
        ident = min(comp.edge_ids)
        bit = _stream(seed, 0x11, ident).getrandbits(1)
        first = RED if bit else BLUE
        second = BLUE if bit else RED
        for i, e in enumerate(comp.edge_ids):
            chi.values[e] = first if i % 2 == 0 else second
    # G0 components: keep or swap wholesale
    from .colouring import coloured_components
    for comp in coloured_components(g, g0):
        ident = min(min(g.eid[3 * v + k] for k in range(3)
                        if g0.values[g.eid[3 * v + k]] != UNCOLOURED)
                    for v in comp)
        swap = _stream(seed, 0x12, ident).getrandbits(1)
        for v in comp:
            for k in range(3):
                e = g.eid[3 * v + k]
                c = g0.values[e]
                if c != UNCOLOURED:
                    chi.values[e] = (RED if c == BLUE else BLUE) if swap else c
    if not chi.is_total():
        missing = next(e for e in range(g.m) if chi.values[e] == UNCOLOURED)
        raise AssertionError(f"chi1 left edge {missing} uncoloured")
    w = check_e1(g, chi)
    if w is not None:
        raise AssertionError(f"chi1 vertex {w} is monochromatic")
    return chi


# ---------------------------------------------------------------------------
# chi2: flip one random edge of every monochromatic cycle
# ---------------------------------------------------------------------------

def chi2_step(g: CubicGraph, chi: Colouring, rng) -> dict[int, MonoComponent]:
    """In place; returns {flipped edge id -> its host cycle (pre-flip)}."""
    comps = monochromatic_components(g, chi)
    seed = rng if isinstance(rng, int) else rng.getrandbits(63)
    flips: dict[int, MonoComponent] = {}
    for cyc in comps.cycles:
        ident = min(cyc.edge_ids)
        e = cyc.edge_ids[_stream(seed, 0x21, ident).randrange(cyc.length)]
        flips[e] = cyc
        chi.values[e] = RED if chi.values[e] == BLUE else BLUE
    return flips


# ---------------------------------------------------------------------------
# chi3: repair the cycles created by chi2 through their petals
# ---------------------------------------------------------------------------

def chi3_step(g: CubicGraph, chi: Colouring, flips: dict[int, MonoComponent],
              rng) -> list[tuple[int, int]]:
    """For each monochromatic cycle of the current colouring, pick one of
    its chi2-flipped edges, swap it back, and flip a neighbouring edge on
    the petal it came from. Returns the applied (edge, edge') swaps.

    Asserts the paper's guarantees: configurations are pairwise
    vertex-disjoint and no monochromatic cycle survives.
    """
    comps = monochromatic_components(g, chi)
    seed = rng if isinstance(rng, int) else rng.getrandbits(63)
    swaps = []
    seen_vertices: set[int] = set()
    for cyc in comps.cycles:
        on_cycle = [e for e in cyc.edge_ids if e in flips]
        if not on_cycle:
            raise AssertionError("monochromatic cycle without a chi2 flip")
        config_vertices = set(cyc.vertices)
        for e in on_cycle:
            config_vertices.update(flips[e].vertices)
        if config_vertices & seen_vertices:
            raise AssertionError("cycle-petal configurations intersect")
        seen_vertices |= config_vertices
        ident = min(cyc.edge_ids)
        st = _stream(seed, 0x31, ident)
        e_i = on_cycle[st.randrange(len(on_cycle))]
        petal = flips[e_i]
        pos = petal.edge_ids.index(e_i)
        k = petal.length
        nbr_edges = (petal.edge_ids[(pos - 1) % k], petal.edge_ids[(pos + 1) % k])
        e_prime = nbr_edges[st.getrandbits(1)]
        chi.values[e_i] = RED if chi.values[e_i] == BLUE else BLUE
        chi.values[e_prime] = RED if chi.values[e_prime] == BLUE else BLUE
        swaps.append((e_i, e_prime))
    after = monochromatic_components(g, chi)
    if after.cycles:
        raise AssertionError("monochromatic cycle survived chi3")
    if after.nonlinear:
        raise AssertionError("chi3 created a branch vertex")
    return swaps


# ---------------------------------------------------------------------------
# chi4: break long paths by re-electing boundary edges
# ---------------------------------------------------------------------------

def chi4_step(g: CubicGraph, chi: Colouring, rng) -> set[int]:
    """Each maximal monochromatic path elects one opposite-coloured edge at
    its ends; edges elected by two distinct paths flip with probability 1/2.
    In place; returns the flipped edge ids."""
    comps = monochromatic_components(g, chi)
    seed = rng if isinstance(rng, int) else rng.getrandbits(63)
    electors: dict[int, list[int]] = {}
    for pid, path in enumerate(comps.paths):
        colour = path.colour
        cands = []
        for end in (path.vertices[0], path.vertices[-1]):
            base = 3 * end
            for k in range(3):
                e = g.eid[base + k]
                if chi.values[e] != colour:
                    cands.append(e)
        ident = min(path.edge_ids)
        e_p = cands[_stream(seed, 0x41, ident).randrange(len(cands))]
        electors.setdefault(e_p, []).append(pid)
    flipped: set[int] = set()
    for e, pids in electors.items():
        if len(pids) == 2 and pids[0] != pids[1]:
            if _stream(seed, 0x42, e).getrandbits(1):
                chi.values[e] = RED if chi.values[e] == BLUE else BLUE
                flipped.add(e)
    return flipped


def validate_chi4(g: CubicGraph, pre: Colouring, post: Colouring) -> None:
    """cl:chi-4 invariants: all components are paths, each containing at
    most one edge whose colour differs from chi3, and any differing edge
    touches exactly one endpoint of its chi3 host path."""
    comps = monochromatic_components(g, post)
    if comps.cycles or comps.nonlinear:
        raise AssertionError("chi4 component is not a path")
    changed = {e for e in range(g.m) if pre.values[e] != post.values[e]}
    for comp in comps.paths:
        inside = [e for e in comp.edge_ids if e in changed]
        if len(inside) > 1:
            raise AssertionError("chi4 path holds two recoloured edges")
    pre_comps = monochromatic_components(g, pre)
    path_of = {}
    for pid, p in enumerate(pre_comps.paths):
        for v in p.vertices:
            path_of[(p.colour, v)] = pid
    for e in changed:
        x, y = g.edges[e]
        new_colour = post.values[e]
        px = path_of.get((new_colour, x))
        py = path_of.get((new_colour, y))
        if px is None or py is None or px == py:
            raise AssertionError("recoloured edge does not join two paths")
        for pid, end_v in ((px, x), (py, y)):
            p = pre_comps.paths[pid]
            if end_v not in (p.vertices[0], p.vertices[-1]):
                raise AssertionError("recoloured edge misses a path endpoint")
            if (set(g.edges[e]) - {end_v}) & set(p.vertices):
                raise AssertionError("recoloured edge re-enters its host path")


# ---------------------------------------------------------------------------
# diagnostics and the full randomized run
# ---------------------------------------------------------------------------

@dataclass
class PipelineDiagnostics:
    q1_max_component: int = 0
    q2_spiders: int = 0
    q3_max_imbalance: int = 0
    q4_survivors: dict = field(default_factory=dict)
    attempts: int = 1
    n: int = 0

    def to_text(self) -> str:
        lines = [f"q1_max_component={self.q1_max_component}",
                 f"q2_spiders={self.q2_spiders}",
                 f"q3_max_imbalance={self.q3_max_imbalance}",
                 f"attempts={self.attempts}",
                 f"n={self.n}"]
        for key, val in sorted(self.q4_survivors.items()):
            lines.append(f"q4_survivors[{key}]={val}")
        return "\n".join(lines) + "\n"


def count_spiders(g: CubicGraph, chi: Colouring, short_len: int,
                  long_len: int, count_threshold: int) -> int:
    """Number of short paths intersected by at least `count_threshold`
    opposite-coloured paths of length >= long_len (the Q2 shape)."""
    comps = monochromatic_components(g, chi)
    long_of = {}
    for pid, p in enumerate(comps.paths):
        if p.length >= long_len:
            for v in p.vertices:
                long_of[(p.colour, v)] = pid
    spiders = 0
    for p in comps.paths:
        if p.length > short_len:
            continue
        opp = BLUE if p.colour == RED else RED
        hits = {long_of[(opp, v)] for v in p.vertices if (opp, v) in long_of}
        if len(hits) >= count_threshold:
            spiders += 1
    return spiders


def prepare_chi0(g: CubicGraph, g0: Colouring, cfg: Config) -> Colouring:
    """Deterministic purple-green base colouring for (g, g0); cache this
    across seeds, the randomness only enters at chi1."""
    uncoloured = [e for e in range(g.m) if g0.values[e] == UNCOLOURED]
    dec = decompose_h123(g, uncoloured)
    return build_chi0(g, g0, dec, cfg, rng=cfg.sub_rng(0x7002, g.n))


def run_approx(g: CubicGraph, g0: Optional[Colouring], cfg: Config,
               seed: Optional[int] = None, chi0: Optional[Colouring] = None,
               registry: Optional[list] = None,
               validate: bool = False) -> tuple[Colouring, PipelineDiagnostics]:
    """chi1..chi4 with retry until the colouring is cycle-free (structural)
    and meets the configured component-length bound; Q2/Q3/Q4 are reported,
    not enforced per run."""
    if g0 is None:
        g0 = Colouring(g)
    if chi0 is None:
        chi0 = prepare_chi0(g, g0, cfg)
    base_seed = cfg.seed if seed is None else seed
    ln = math.log(max(g.n, 4))
    if cfg.profile == "paper":
        spider_args = (math.ceil(ln ** (2 / 3)), math.ceil(100 * math.sqrt(ln)),
                       math.ceil(100 * math.sqrt(ln)))
    else:
        spider_args = (math.ceil(ln ** (2 / 3)), math.ceil(2 * math.sqrt(ln)),
                       math.ceil(2 * math.sqrt(ln)))
    best = None
    for attempt in range(cfg.approx_attempts):
        aseed = mix_seed(base_seed, 0xA77, attempt)
        chi = chi1_step(g, g0, chi0, aseed)
        flips = chi2_step(g, chi, aseed)
        chi3_step(g, chi, flips, aseed)
        chi3_snapshot = chi.copy() if validate else None
        chi4_step(g, chi, aseed)
        if validate:
            validate_chi4(g, chi3_snapshot, chi)
        prof = profile(g, chi)
        diag = PipelineDiagnostics(
            q1_max_component=prof.max_component_length(),
            q2_spiders=count_spiders(g, chi, *spider_args),
            q3_max_imbalance=prof.max_imbalance(),
            attempts=attempt + 1,
            n=g.n,
        )
        if registry:
            from .gadgets import find_surviving
            survivors = find_surviving(g, chi, registry)
            counts: dict = {}
            for inst in survivors:
                key = (inst.template.kind, inst.template.ell)
                counts[key] = counts.get(key, 0) + 1
            diag.q4_survivors = counts
        if best is None or diag.q1_max_component < best[1].q1_max_component:
            best = (chi, diag)
        if diag.q1_max_component <= cfg.q1_bound:
            return chi, diag
    raise RuntimeError(
        f"run_approx exhausted {cfg.approx_attempts} attempts; best "
        f"q1={best[1].q1_max_component} > bound {cfg.q1_bound}")
