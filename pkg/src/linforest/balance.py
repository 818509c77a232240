"""From an approximately balanced colouring to exactly isomorphic linear
forests: equalise long path counts, then total edge counts, then walk the
gadget ladder from the longest unbalanced length down to 3; the final P2/P1
equality follows by counting and is verified, not assumed.

The ladder consumes surviving registry gadgets first and then swap sites
discovered in the current colouring that reproduce the Type II swap
semantics; every swap's exact profile delta is verified and rolled back on
mismatch.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from random import Random
from typing import Optional

from .basecol import split_long_paths
from .colouring import (BLUE, RED, UNCOLOURED, Colouring,
                        is_isomorphic_linear_forests,
                        monochromatic_components, profile)
from .gadgets import GadgetInstance, apply_swap, find_surviving
from .graph import Config, CubicGraph, mix_seed
from .pipeline import prepare_chi0, run_approx
from .transversal import TransversalFailure


class BalanceError(RuntimeError):
    pass


class ParityError(BalanceError):
    """Odd red/blue edge-count difference (n = 2 mod 4)."""


# ---------------------------------------------------------------------------
# claim A: equalise path counts above the long-path threshold
# ---------------------------------------------------------------------------

def balance_long_paths(g: CubicGraph, chi: Colouring, cfg: Config,
                       rng: Optional[Random] = None) -> Colouring:
    """Split one surplus path per imbalanced length >= threshold so that
    r(P_t) = b(P_t) for every t >= cfg.long_path_threshold."""
    T = cfg.long_path_threshold
    seg_hi = cfg.segment_bounds[1]
    assert 2 * seg_hi <= T + 2, "segments too long for the threshold"
    opp_cap = (T - 2) // 2
    if rng is None:
        rng = cfg.sub_rng(0xB100, g.n)
    out = chi.copy()
    prof = profile(g, out)
    want: dict[tuple[int, int], int] = {}
    for t in set(prof.red_paths) | set(prof.blue_paths):
        if t < T:
            continue
        x = prof.red_paths[t] - prof.blue_paths[t]
        if x > 0:
            want[(RED, t)] = x
        elif x < 0:
            want[(BLUE, t)] = -x
    if not want:
        return out
    taken: dict[tuple[int, int], int] = dict(want)

    def select(path):
        key = (path.colour, path.length)
        if taken.get(key, 0) > 0:
            taken[key] -= 1
            return True
        return False

    split_long_paths(g, out, threshold=T, seg_hi=seg_hi, opp_cap=opp_cap,
                     rng=rng, select=select)
    after = profile(g, out)
    comps = monochromatic_components(g, out)
    if comps.cycles or comps.nonlinear:
        raise BalanceError("long-path balancing broke the linear forests")
    for t in set(after.red_paths) | set(after.blue_paths):
        if t >= T and after.red_paths[t] != after.blue_paths[t]:
            raise BalanceError(f"length {t} still unbalanced after claim A")
    return out


# ---------------------------------------------------------------------------
# claim B: equalise the red and blue edge counts
# ---------------------------------------------------------------------------

def balance_edge_counts(g: CubicGraph, chi: Colouring,
                        registry: list[GadgetInstance],
                        cfg: Config) -> Colouring:
    """Flip one interior edge of (x_r - x_b)/2 surplus-coloured paths of
    length <= threshold; each flip moves one edge across and perturbs only
    lengths below the threshold (the ladder cleans those up)."""
    out = chi.copy()
    x_r, x_b = out.count(RED), out.count(BLUE)
    if x_r == x_b:
        return out
    if (x_r - x_b) % 2 != 0:
        raise ParityError(
            f"odd total imbalance {x_r - x_b} (graph has m={g.m} edges)")
    k = abs(x_r - x_b) // 2
    surplus = RED if x_r > x_b else BLUE
    opp = BLUE if surplus == RED else RED
    T = cfg.long_path_threshold
    opp_cap = (T - 2) // 2
    comps = monochromatic_components(g, out)
    comp_of = {}
    comp_len = {}
    for i, c in enumerate(comps.paths):
        comp_len[i] = c.length
        for v in c.vertices:
            comp_of[(c.colour, v)] = i
    used_opp: set[int] = set()
    flips = []
    for path in comps.paths:
        if len(flips) == k:
            break
        if path.colour != surplus or path.length > T or path.length < 2:
            continue
        for idx in range(1, path.length - 1):
            e = path.edge_ids[idx]
            x, y = path.vertices[idx], path.vertices[idx + 1]
            cx = comp_of.get((opp, x))
            cy = comp_of.get((opp, y))
            if cx is None or cy is None or cx == cy:
                continue
            if cx in used_opp or cy in used_opp:
                continue
            if comp_len[cx] > opp_cap or comp_len[cy] > opp_cap:
                continue
            used_opp.update((cx, cy))
            flips.append(e)
            break
    if len(flips) < k:
        raise BalanceError(
            f"only {len(flips)} of {k} edge-count flip sites available")
    for e in flips:
        out.values[e] = opp
    if out.count(RED) != out.count(BLUE):
        raise BalanceError("edge counts still differ after claim B")
    comps = monochromatic_components(g, out)
    if comps.cycles or comps.nonlinear:
        raise BalanceError("edge-count balancing broke the linear forests")
    return out


# ---------------------------------------------------------------------------
# claim C: the gadget ladder
# ---------------------------------------------------------------------------

@dataclass
class LadderReport:
    swaps_registry: int = 0
    swaps_discovered: int = 0
    residual: dict = field(default_factory=dict)

    @property
    def edits(self) -> int:
        return 2 * (self.swaps_registry + self.swaps_discovered)


def _find_disjoint_sites(g: CubicGraph, chi: Colouring, ell: int,
                         decrement: int, want: int):
    """Up to `want` disjoint (e, f, d_same, d_opp) double-flip sites.

    Each swap removes one `decrement` path of length exactly ell and adds
    one of length ell-1 (the Type II swap semantics); every other touched
    count sits strictly below level ell, so the downward ladder stays
    monotone. Opposite-colour counts are untouched when the handle closes
    or the hanging paths match (the exact gadget contract) and otherwise
    perturbed only below ell. Sites share no components."""
    comps = monochromatic_components(g, chi)
    comp_at = {}
    comp_obj = {}
    for i, c in enumerate(comps.paths):
        comp_obj[i] = c
        for v in c.vertices:
            comp_at[(c.colour, v)] = i
    opp = BLUE if decrement == RED else RED
    vals = chi.values
    candidates = []        # (priority, pid, flips, d_same, d_opp, used set)

    def accumulate(pairs):
        dd: dict[int, int] = {}
        for t, d in pairs:
            dd[t] = dd.get(t, 0) + d
        return {t: d for t, d in dd.items() if d}

    # forward sites: shorten a decrement-coloured path of length exactly ell
    for pid in range(len(comp_obj)):
        path = comp_obj[pid]
        if path.colour != decrement or path.length != ell:
            continue
        for end_pos in (0, -1):
            q2 = path.vertices[end_pos]
            q3 = path.vertices[1] if end_pos == 0 else path.vertices[-2]
            f = path.edge_ids[0] if end_pos == 0 else path.edge_ids[-1]
            for k in range(3):
                e = g.eid[3 * q2 + k]
                if vals[e] != opp:
                    continue
                q1 = g.other_end(e, q2)
                i_r = comp_at.get((opp, q1))
                if i_r is None:
                    continue
                R = comp_obj[i_r]
                if q1 in (R.vertices[0], R.vertices[-1]):
                    continue         # q1 must be interior to R
                i_b = comp_at.get((decrement, q1))
                if i_b is None or i_b == pid:
                    continue
                Bp = comp_obj[i_b]
                if Bp.length > ell - 2:
                    continue         # joined piece must stay below level ell
                i_h = comp_at.get((opp, q3))
                if i_h is None:
                    continue
                pos1 = R.vertices.index(q1)
                if pos1 < R.vertices.index(q2):
                    a1_end, a1_len = R.vertices[0], pos1
                else:
                    a1_end, a1_len = R.vertices[-1], R.length - pos1
                a2_len = R.length - a1_len - 1
                d_opp: dict[int, int] = {}
                if i_h == i_r:
                    if a1_end != q3:
                        continue     # closing on the wrong side: a cycle
                    priority = 0
                else:
                    H = comp_obj[i_h]
                    if q3 not in (H.vertices[0], H.vertices[-1]):
                        continue
                    if H.length == a1_len:
                        priority = 0
                    elif R.length <= ell - 1 and H.length <= ell - 1 \
                            and a2_len + H.length + 1 <= ell - 1:
                        priority = 1
                        d_opp = accumulate(((R.length, -1), (H.length, -1),
                                            (a1_len, +1),
                                            (a2_len + H.length + 1, +1)))
                    else:
                        continue
                d_same = accumulate(((ell, -1), (ell - 1, +1),
                                     (Bp.length, -1), (Bp.length + 1, +1)))
                candidates.append((priority, pid, (e, f), d_same, d_opp,
                                   frozenset((pid, i_r, i_b, i_h))))

    # reverse sites: grow an (ell-1)-path of the deficit colour to length
    # ell by annexing the lone vertex across an opposite edge
    grow = opp          # the colour whose count at ell must rise
    gopp = decrement
    for pid in range(len(comp_obj)):
        D = comp_obj[pid]
        if D.colour != grow or D.length != ell - 1:
            continue
        for end_pos in (0, -1):
            q3 = D.vertices[end_pos]
            for k in range(3):
                f = g.eid[3 * q3 + k]
                if vals[f] != gopp:
                    continue
                q2 = g.other_end(f, q3)
                i_rp = comp_at.get((gopp, q2))
                if i_rp is None:
                    continue
                Rp = comp_obj[i_rp]
                if q2 in (Rp.vertices[0], Rp.vertices[-1]):
                    continue         # q2 must be interior (two gopp edges)
                i_e = comp_at.get((grow, q2))
                if i_e is None or i_e == pid:
                    continue
                E = comp_obj[i_e]
                if not 2 <= E.length <= ell - 1:
                    continue
                if q2 not in (E.vertices[0], E.vertices[-1]):
                    continue
                e = E.edge_ids[0] if q2 == E.vertices[0] else E.edge_ids[-1]
                q1 = g.other_end(e, q2)
                pos2 = Rp.vertices.index(q2)
                if Rp.vertices.index(q3) > pos2:
                    p3_end, p3_len = Rp.vertices[-1], Rp.length - pos2 - 1
                else:
                    p3_end, p3_len = Rp.vertices[0], pos2 - 1
                p2_len = Rp.length - p3_len - 1
                i_hp = comp_at.get((gopp, q1))
                if i_hp is None:
                    continue
                d_opp = {}
                if i_hp == i_rp:
                    if p3_end != q1:
                        continue     # annexing would close a cycle
                    priority = 0
                else:
                    Hp = comp_obj[i_hp]
                    if q1 not in (Hp.vertices[0], Hp.vertices[-1]):
                        continue
                    if Hp.length == p3_len:
                        priority = 0
                    elif Rp.length <= ell - 1 and Hp.length <= ell - 1 \
                            and p2_len + Hp.length + 1 <= ell - 1:
                        priority = 1
                        d_opp = accumulate(
                            ((Rp.length, -1), (Hp.length, -1), (p3_len, +1),
                             (p2_len + Hp.length + 1, +1)))
                    else:
                        continue
                d_same = accumulate(((ell, +1), (ell - 1, -1),
                                     (E.length, -1), (E.length - 1, +1)))
                candidates.append((priority, pid, (e, f), d_same, d_opp,
                                   frozenset((pid, i_rp, i_e, i_hp))))
    candidates.sort(key=lambda c: (c[0], c[1]))
    sites = []
    used_comps: set[int] = set()
    for (_, _, flips, dd, d_opp, involved) in candidates:
        if len(sites) == want:
            break
        if involved & used_comps:
            continue
        used_comps |= involved
        sites.append((flips, dd, d_opp))
    return sites


def gadget_ladder(g: CubicGraph, chi: Colouring,
                  registry: list[GadgetInstance], cfg: Config
                  ) -> tuple[Colouring, LadderReport]:
    """Equalise r(P_t) = b(P_t) from the largest unbalanced t down to 3,
    preserving the edge-count balance (each swap is colour-neutral).

    Registry survivors go first; the rest of each level's imbalance is
    covered by batches of disjoint discovered sites, verified by an exact
    profile-delta recount per batch. Raises BalanceError with the stuck
    level and residual when the sites run dry."""
    out = chi.copy()
    report = LadderReport()
    prof = profile(g, out)
    levels = [t for t in set(prof.red_paths) | set(prof.blue_paths)
              if prof.red_paths[t] != prof.blue_paths[t]]
    if not levels:
        return out, report
    ell_max = max(levels)
    used: set[int] = set()
    for ell in range(ell_max, 2, -1):
        stall = 0
        while True:
            prof = profile(g, out)
            x = prof.red_paths[ell] - prof.blue_paths[ell]
            if x == 0:
                break
            decrement = RED if x > 0 else BLUE
            applied = 0
            for idx, inst in enumerate(registry):
                if applied >= abs(x):
                    break
                if idx in used or inst.template.ell != ell:
                    continue
                for polarity in ("blue", "red"):
                    probe = GadgetInstance(inst.template, inst.core_map,
                                           polarity)
                    want = RED if polarity == "red" else BLUE
                    if want != decrement or not probe.matches(g, out, "a"):
                        continue
                    candidate = apply_swap(g, out, probe)
                    delta = profile(g, candidate).path_delta(prof)
                    if delta == _registry_expected(ell, decrement):
                        out = candidate
                        prof = profile(g, out)
                        used.add(idx)
                        report.swaps_registry += 1
                        applied += 1
                    break
            prof = profile(g, out)
            x = prof.red_paths[ell] - prof.blue_paths[ell]
            if x == 0:
                break
            sites = _find_disjoint_sites(g, out, ell, decrement, abs(x))
            if not sites:
                report.residual[ell] = x
                raise BalanceError(
                    f"ladder stuck at level {ell} with residual {x}")
            while sites:
                candidate = out.copy()
                exp_same: dict[int, int] = {}
                exp_opp: dict[int, int] = {}
                for (e, f, dd, d_opp) in sites:
                    candidate.values[e] = decrement
                    candidate.values[f] = BLUE if decrement == RED else RED
                    for t, d in dd.items():
                        exp_same[t] = exp_same.get(t, 0) + d
                    for t, d in d_opp.items():
                        exp_opp[t] = exp_opp.get(t, 0) + d
                exp_same = {t: d for t, d in exp_same.items() if d}
                exp_opp = {t: d for t, d in exp_opp.items() if d}
                comps = monochromatic_components(g, candidate)
                dr, db = profile(g, candidate, comps).path_delta(prof)
                got = db if decrement == BLUE else dr
                other = dr if decrement == BLUE else db
                if not comps.cycles and not comps.nonlinear \
                        and got == exp_same and other == exp_opp:
                    out = candidate
                    report.swaps_discovered += len(sites)
                    break
                # collision between batched swaps: halve the batch
                if len(sites) == 1:
                    report.residual[ell] = x
                    raise BalanceError(
                        f"ladder swap verification failed at level {ell}")
                sites = sites[:max(1, len(sites) // 2)]
            stall += 1
            if stall > 4 * abs(x) + 16:
                report.residual[ell] = x
                raise BalanceError(f"ladder stalls at level {ell}")
        after = profile(g, out)
        for t in set(after.red_paths) | set(after.blue_paths):
            if t >= ell and after.red_paths[t] != after.blue_paths[t]:
                raise BalanceError(f"level {t} regressed during the ladder")
    return out, report


def _registry_expected(ell: int, decrement: int) -> tuple[dict, dict]:
    from .gadgets import expected_swap_delta
    return expected_swap_delta(ell, blue_gadget=decrement == BLUE)


# ---------------------------------------------------------------------------
# the final counting check and certificate
# ---------------------------------------------------------------------------

@dataclass
class Certificate:
    success: bool
    n: int
    seed: int
    red_paths: dict
    blue_paths: dict
    edits: dict
    diagnostics: dict
    isomorphic: bool

    def to_json(self) -> str:
        return json.dumps({
            "success": self.success,
            "n": self.n,
            "seed": self.seed,
            "red_paths": {str(k): v for k, v in sorted(self.red_paths.items())},
            "blue_paths": {str(k): v for k, v in sorted(self.blue_paths.items())},
            "edits": self.edits,
            "diagnostics": self.diagnostics,
            "isomorphic": self.isomorphic,
        }, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Certificate":
        d = json.loads(text)
        return cls(success=d["success"], n=d["n"], seed=d["seed"],
                   red_paths={int(k): v for k, v in d["red_paths"].items()},
                   blue_paths={int(k): v for k, v in d["blue_paths"].items()},
                   edits=d["edits"], diagnostics=d["diagnostics"],
                   isomorphic=d["isomorphic"])


def assert_final_balance(g: CubicGraph, chi: Colouring,
                         edits: Optional[dict] = None,
                         seed: int = 0) -> Certificate:
    """Verify the counting argument's conclusion: given balance at t >= 3
    and equal edge counts, the P2 and P1 counts agree too; emits the
    machine-checkable certificate."""
    prof = profile(g, chi)
    if prof.red_cycles or prof.blue_cycles:
        raise BalanceError("monochromatic cycles at final check")
    for t in set(prof.red_paths) | set(prof.blue_paths):
        if t >= 3 and prof.red_paths[t] != prof.blue_paths[t]:
            raise BalanceError(f"precondition: level {t} unbalanced")
    if chi.count(RED) != chi.count(BLUE):
        raise BalanceError("precondition: edge counts differ")
    if prof.red_paths[2] != prof.blue_paths[2]:
        raise BalanceError("counting prediction failed at P2")
    if prof.red_paths[1] != prof.blue_paths[1]:
        raise BalanceError("counting prediction failed at P1")
    iso = is_isomorphic_linear_forests(g, chi)
    return Certificate(success=iso, n=g.n, seed=seed,
                       red_paths=dict(prof.red_paths),
                       blue_paths=dict(prof.blue_paths),
                       edits=edits or {}, diagnostics={}, isomorphic=iso)


# ---------------------------------------------------------------------------
# end to end
# ---------------------------------------------------------------------------

def run_exact(g: CubicGraph, cfg: Config, seed: Optional[int] = None
              ) -> tuple[Colouring, Certificate]:
    """Assemble a pre-colouring when the host admits one, randomize, then
    balance exactly. On failure after the configured retries, falls back to
    the oracle at desk scale or returns the best colouring with stage
    diagnostics in a failure certificate."""
    from .repair import InsufficientGeodesics, RepairError, assemble_g0

    base_seed = cfg.seed if seed is None else seed
    diagnostics: dict = {}
    g0 = Colouring(g)
    registry: list[GadgetInstance] = []
    from .graph import bfs_distances
    ecc0 = max(bfs_distances(g, [0]))
    if 2 * ecc0 >= 5 * cfg.ell_range[0] + 200:
        try:
            g0, registry = assemble_g0(g, cfg)
            diagnostics["g0_components"] = len(registry)
        except (InsufficientGeodesics, RepairError) as exc:
            diagnostics["g0"] = str(exc)
    else:
        diagnostics["g0"] = (f"diameter bound {2 * ecc0} below geodesic "
                             f"requirement {5 * cfg.ell_range[0] + 200}")
    chi0 = prepare_chi0(g, g0, cfg)
    best: Optional[Colouring] = None
    for attempt in range(cfg.exact_attempts):
        aseed = mix_seed(base_seed, 0xE7, attempt)
        try:
            chi, diag = run_approx(g, g0, cfg, seed=aseed, chi0=chi0,
                                   registry=registry)
        except RuntimeError as exc:
            diagnostics[f"attempt{attempt}"] = f"approx: {exc}"
            continue
        best = chi
        try:
            chi2 = balance_long_paths(g, chi, cfg,
                                      rng=Random(mix_seed(aseed, 0xB1)))
            edits_a = sum(1 for e in range(g.m)
                          if chi.values[e] != chi2.values[e])
            chi3 = balance_edge_counts(g, chi2, registry, cfg)
            edits_b = sum(1 for e in range(g.m)
                          if chi2.values[e] != chi3.values[e])
            psi, ladder = gadget_ladder(g, chi3, registry, cfg)
            cert = assert_final_balance(
                g, psi,
                edits={"long_paths": edits_a, "edge_counts": edits_b,
                       "ladder": ladder.edits}, seed=base_seed)
            if cert.success:
                cert.diagnostics = {"attempts": attempt + 1,
                                    "q1": diag.q1_max_component,
                                    "q3": diag.q3_max_imbalance,
                                    **{k: v for k, v in diagnostics.items()
                                       if isinstance(v, str)}}
                return psi, cert
            diagnostics[f"attempt{attempt}"] = "final check failed"
        except ParityError as exc:
            cert = Certificate(success=False, n=g.n, seed=base_seed,
                               red_paths={}, blue_paths={}, edits={},
                               diagnostics={**diagnostics,
                                            "parity": str(exc)},
                               isomorphic=False)
            return chi, cert
        except (BalanceError, TransversalFailure) as exc:
            diagnostics[f"attempt{attempt}"] = str(exc)
            continue
    if g.m <= 30:
        from .oracle import exhaustive_decompose
        found = exhaustive_decompose(g)
        if found is not None:
            cert = assert_final_balance(g, found, edits={"oracle": 0},
                                        seed=base_seed)
            cert.diagnostics = {"fallback": "oracle"}
            return found, cert
        cert = Certificate(success=False, n=g.n, seed=base_seed,
                           red_paths={}, blue_paths={}, edits={},
                           diagnostics={"oracle": "no decomposition exists"},
                           isomorphic=False)
        return best if best is not None else Colouring(g), cert
    cert = Certificate(success=False, n=g.n, seed=base_seed,
                       red_paths={}, blue_paths={}, edits={},
                       diagnostics=diagnostics, isomorphic=False)
    return best if best is not None else Colouring(g), cert
