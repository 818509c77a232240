"""Operator entry points: generate, decompose, verify, experiment, oracle.

Exit codes: 0 success, 2 method-level failure (diagnostics on stderr),
3 invalid input. Malformed input never produces a traceback. Every command
that writes an output file also writes `<output>.manifest.json`, enough to
reproduce the run byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import asdict

from .balance import run_exact, assert_final_balance, Certificate
from .colouring import (Colouring, colouring_from_text, colouring_to_text,
                        is_isomorphic_linear_forests, profile)
from .graph import (Config, CubicGraph, GraphFormatError, NotCubicError,
                    load_graph, random_cubic, to_edge_list, to_graph6)
from .pipeline import prepare_chi0, run_approx

log = logging.getLogger("linforest")

EXIT_OK = 0
EXIT_METHOD = 2
EXIT_INPUT = 3


def _setup_logging():
    level = os.environ.get("FOREST_LOG", "WARNING").upper()
    logging.basicConfig(stream=sys.stderr,
                        level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _digest(data: str) -> str:
    return hashlib.sha256(data.encode()).hexdigest()


def _write_manifest(path: str, command: str, cfg: Config | None,
                    seed: int, input_digest: str, outcome: dict) -> None:
    manifest = {
        "command": command,
        "config": asdict(cfg) if cfg is not None else None,
        "seed": seed,
        "input_digest": input_digest,
        "outcome": outcome,
    }
    with open(path + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_graph_file(path: str) -> CubicGraph:
    with open(path) as fh:
        return load_graph(fh.read())


def _config_from_args(args, n: int) -> Config:
    over = {}
    if getattr(args, "ell_range", None):
        lo, hi = (int(x) for x in args.ell_range.split(","))
        over["ell_range"] = (lo, hi)
    if args.profile == "paper":
        return Config.paper(n, seed=args.seed, **over)
    return Config.desk(n, seed=args.seed, **over)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    try:
        g = random_cubic(args.n, seed=args.seed,
                         require_connected=args.connected)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = to_graph6(g) + "\n" if args.format == "graph6" else to_edge_list(g)
    _emit(text, args.output)
    if args.output:
        _write_manifest(args.output, "generate", None, args.seed,
                        _digest(text), {"n": g.n, "m": g.m})
    return EXIT_OK


def cmd_decompose(args) -> int:
    try:
        g = _load_graph_file(args.input)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GraphFormatError, NotCubicError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    cfg = _config_from_args(args, g.n)
    if not g.is_connected():
        print("invalid input: graph is disconnected", file=sys.stderr)
        return EXIT_INPUT
    t0 = time.time()
    chi, cert = run_exact(g, cfg, seed=args.seed)
    log.info("run_exact finished in %.2fs success=%s", time.time() - t0,
             cert.success)
    out_text = colouring_to_text(chi)
    if args.output:
        _emit(out_text, args.output)
        with open(args.output + ".certificate.json", "w") as fh:
            fh.write(cert.to_json() + "\n")
        with open(args.input) as fh:
            digest = _digest(fh.read())
        _write_manifest(args.output, "decompose", cfg, args.seed, digest,
                        {"success": cert.success,
                         "colouring_digest": _digest(out_text)})
    else:
        sys.stdout.write(out_text)
        sys.stdout.write(cert.to_json() + "\n")
    if cert.success:
        return EXIT_OK
    print(f"unresolved imbalance: {cert.diagnostics}", file=sys.stderr)
    return EXIT_METHOD


def cmd_verify(args) -> int:
    try:
        g = _load_graph_file(args.graph)
        with open(args.colouring) as fh:
            chi = colouring_from_text(g, fh.read())
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GraphFormatError, NotCubicError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not chi.is_total():
        print("colouring is not total", file=sys.stderr)
        return EXIT_METHOD
    iso = is_isomorphic_linear_forests(g, chi)
    if not iso:
        prof = profile(g, chi)
        bad = [t for t in set(prof.red_paths) | set(prof.blue_paths)
               if prof.red_paths[t] != prof.blue_paths[t]]
        print(f"colour classes are not isomorphic linear forests; "
              f"witness lengths: {sorted(bad)[:5]}", file=sys.stderr)
        return EXIT_METHOD
    if args.certificate:
        try:
            with open(args.certificate) as fh:
                cert = Certificate.from_json(fh.read())
        except (OSError, ValueError, KeyError) as exc:
            print(f"bad certificate: {exc}", file=sys.stderr)
            return EXIT_INPUT
        prof = profile(g, chi)
        if dict(prof.red_paths) != cert.red_paths \
                or dict(prof.blue_paths) != cert.blue_paths:
            print("certificate profile does not match the colouring",
                  file=sys.stderr)
            return EXIT_METHOD
    print("valid: colour classes span isomorphic linear forests")
    return EXIT_OK


def _experiment_chunk(task) -> list[dict]:
    n, seeds, profile_name = task
    cfg = (Config.paper if profile_name == "paper" else Config.desk)(n, seed=0)
    g = random_cubic(n, seed=n, require_connected=True)
    chi0 = prepare_chi0(g, Colouring(g), cfg)
    rows = []
    for seed in seeds:
        t0 = time.time()
        chi, diag = run_approx(g, None, cfg, seed=seed, chi0=chi0)
        rows.append({
            "n": n,
            "seed": seed,
            "maxCompLen": diag.q1_max_component,
            "maxImbalance": diag.q3_max_imbalance,
            "q2Violations": diag.q2_spiders,
            "runtimeMs": round(1000 * (time.time() - t0)),
        })
    return rows


EXPERIMENT_COLUMNS = ["n", "seed", "maxCompLen", "maxImbalance",
                      "q2Violations", "runtimeMs"]


def cmd_experiment(args) -> int:
    if args.quantiles:
        return _reduce_quantiles(args.quantiles)
    try:
        ns = [int(x) for x in args.n.split(",")]
    except ValueError:
        print("invalid --n list", file=sys.stderr)
        return EXIT_INPUT
    if any(n % 2 or n < 4 for n in ns):
        print("ns must be even and >= 4", file=sys.stderr)
        return EXIT_INPUT
    seeds = list(range(args.seed, args.seed + args.trials))
    tasks = []
    for n in ns:
        if args.threads > 1:
            chunk = max(1, len(seeds) // args.threads)
            for i in range(0, len(seeds), chunk):
                tasks.append((n, seeds[i:i + chunk], args.profile))
        else:
            tasks.append((n, seeds, args.profile))
    all_rows: list[dict] = []
    if args.threads > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            for rows in pool.map(_experiment_chunk, tasks):
                all_rows.extend(rows)
    else:
        for task in tasks:
            all_rows.extend(_experiment_chunk(task))
    all_rows.sort(key=lambda r: (r["n"], r["seed"]))
    out = args.output
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        writer = csv.DictWriter(fh, fieldnames=EXPERIMENT_COLUMNS)
        writer.writeheader()
        writer.writerows(all_rows)
    finally:
        if out:
            fh.close()
    if out:
        stable = [{k: r[k] for k in EXPERIMENT_COLUMNS if k != "runtimeMs"}
                  for r in all_rows]
        _write_manifest(out, "experiment", None, args.seed,
                        _digest(json.dumps([args.n, args.trials])),
                        {"rows": len(all_rows),
                         "data_digest": _digest(json.dumps(stable))})
    return EXIT_OK


def _reduce_quantiles(path: str) -> int:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    by_n: dict[int, list[dict]] = {}
    for r in rows:
        by_n.setdefault(int(r["n"]), []).append(r)

    def quant(vals, p):
        vals = sorted(vals)
        return vals[min(len(vals) - 1, int(p * len(vals)))]

    for n in sorted(by_n):
        for col in ("maxCompLen", "maxImbalance"):
            vals = [int(r[col]) for r in by_n[n]]
            qs = ", ".join(f"p{int(100 * p)}={quant(vals, p)}"
                           for p in (0.5, 0.9, 0.99))
            print(f"n={n} {col}: {qs}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    from .oracle import sweep_report, verify_small_range
    try:
        entries = verify_small_range(args.n_max, seed=args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = sweep_report(entries)
    _emit(text, args.output)
    failures = [e for e in entries if not e.decomposable]
    if failures:
        print(f"NOT DECOMPOSABLE: {[e.graph6 for e in failures]} -- finite "
              f"counterexample candidates, please report", file=sys.stderr)
        return EXIT_METHOD
    if args.output:
        _write_manifest(args.output, "oracle", None, args.seed,
                        _digest(str(args.n_max)), {"graphs": len(entries)})
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="linforest",
        description="2-edge-colour cubic graphs into isomorphic linear forests")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="emit a random cubic graph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.add_argument("--format", choices=("graph6", "edgelist"),
                   default="graph6")
    p.add_argument("--connected", action="store_true")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("decompose",
                       help="find an isomorphic linear-forest 2-colouring")
    p.add_argument("--input", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.add_argument("--profile", choices=("desk", "paper"), default="desk")
    p.add_argument("--ell-range", dest="ell_range",
                   help="gadget length range, e.g. 3,4")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("verify", help="revalidate a colouring/certificate")
    p.add_argument("--graph", required=True)
    p.add_argument("--colouring", required=True)
    p.add_argument("--certificate")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("experiment", help="Monte Carlo pipeline trials")
    p.add_argument("--n", default="64", help="comma-separated sizes")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.add_argument("--profile", choices=("desk", "paper"), default="desk")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--quantiles", metavar="CSV",
                   help="reduce an existing CSV instead of running trials")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("oracle", help="exhaustive small-n sweep")
    p.add_argument("--n-max", dest="n_max", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
