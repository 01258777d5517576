"""Command-line front end.

Subcommands: gen, build-gnp, build-regular, verify, sweep, diameter-study,
oracle.  Machine-readable results go to stdout (one JSON document or the
sweep table); logs and errors go to stderr.  Exit codes: 0 ok, 1 verification
or pipeline failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import DomainError, TooLarge
from .graph_core import Graph, RootedTree
from .harness import (
    MODELS,
    ROOT_MODES,
    SweepConfig,
    default_workers,
    run_sweep,
    run_trial,
)
from .ist_regular import diameter_deletion_check
from .random_models import sample_gnp, sample_matching_family, trial_stream
from .verifier import brute_force_max_ists, verify_ist_family


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _emit(obj: dict, out: str | None) -> None:
    doc = json.dumps(obj, separators=(",", ":")) + "\n"
    sys.stdout.write(doc)
    if out:
        Path(out).write_text(doc)


def _trial_record(res) -> dict:
    return {
        "model": res.model,
        "cell": res.cell,
        "seed_base": res.seed_base,
        "trial": res.trial,
        "root": res.root,
        "outcome": res.outcome,
        "stage": res.stage,
        "detail": res.detail,
        "k": res.k,
        "verified": res.verified,
        "diagnostics": res.diagnostics,
    }


def cmd_gen(args: argparse.Namespace) -> int:
    rng = trial_stream(args.seed, "gen", args.model)
    if args.model == "gnp":
        if args.p is None:
            print("gen --model gnp requires --p", file=sys.stderr)
            return 2
        g = sample_gnp(args.n, args.p, rng)
    else:
        if args.d is None:
            print("gen --model regular requires --d", file=sys.stderr)
            return 2
        g = sample_matching_family(args.n, args.d, rng).union()
    if args.format == "text":
        doc = g.to_text()
        sys.stdout.write(doc)
        if args.out:
            Path(args.out).write_text(doc)
    else:
        _emit(g.to_json_obj(), args.out)
    return 0


def cmd_build_gnp(args: argparse.Namespace) -> int:
    cell = {"n": args.n, "p": args.p, "eps": args.eps}
    mode = "random" if args.root is None else "fixed"
    res = run_trial("gnp", cell, args.seed, args.trial, root_mode=mode, root=args.root)
    _emit(_trial_record(res), None)
    if args.out and res.outcome == "success":
        from .harness import write_artifact

        write_artifact(Path(args.out), res)
    if res.outcome == "success":
        return 0
    return 2 if res.outcome == "domain_error" else 1


def cmd_build_regular(args: argparse.Namespace) -> int:
    model = "regular-even" if args.n % 2 == 0 else "regular-odd"
    cell = {"n": args.n, "d": args.d}
    mode = "random" if args.root is None else "fixed"
    res = run_trial(model, cell, args.seed, args.trial, root_mode=mode, root=args.root)
    _emit(_trial_record(res), None)
    if args.out and res.outcome == "success":
        from .harness import write_artifact

        write_artifact(Path(args.out), res)
    if res.outcome == "success":
        return 0
    return 2 if res.outcome == "domain_error" else 1


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        obj = json.loads(Path(args.infile).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    graph = Graph.from_json_obj(obj["graph"])
    trees = [RootedTree.from_json_obj(t) for t in obj["trees"]]
    report = verify_ist_family(graph, int(obj["root"]), trees)
    _emit({"ok": report.ok, **report.to_json_obj()}, args.out)
    return 0 if report.ok else 1


def cmd_sweep(args: argparse.Namespace) -> int:
    grid = {}
    if args.n is not None:
        grid["n"] = _int_list(args.n)
    if args.p is not None:
        grid["p"] = _float_list(args.p)
    if args.d is not None:
        grid["d"] = _int_list(args.d)
    if args.eps is not None:
        grid["eps"] = _float_list(args.eps)
    try:
        config = SweepConfig(
            model=args.model,
            grid=grid,
            trials=args.trials,
            seed_base=args.seed,
            root_mode=args.root_mode,
            root=args.root,
            out=args.out,
            format=args.format,
            workers=args.workers if args.workers is not None else default_workers(),
            artifacts=not args.no_artifacts,
        )
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    result = run_sweep(config, resume=not args.no_resume)
    if not args.out:
        sys.stdout.write(result.text)
    else:
        print(f"wrote {args.out} ({len(result.rows)} trial rows)", file=sys.stderr)
    return 0 if result.ok else 1


def cmd_diameter_study(args: argparse.Namespace) -> int:
    rng = trial_stream(args.seed, "diameter-study")
    try:
        report = diameter_deletion_check(
            args.n, args.d, args.eps, args.deletions, args.trials, rng,
            constant=args.constant, exact=args.exact,
        )
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    _emit(report, args.out)
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    if args.infile:
        try:
            g = Graph.from_json_obj(json.loads(Path(args.infile).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
    elif args.edges is not None:
        pairs = []
        for part in args.edges.split(","):
            part = part.strip()
            if part:
                u, v = part.split("-")
                pairs.append((int(u), int(v)))
        if args.n is None:
            print("oracle --edges requires --n", file=sys.stderr)
            return 2
        g = Graph.from_edges(args.n, pairs)
    else:
        print("oracle requires --in or --edges", file=sys.stderr)
        return 2
    try:
        if args.k:
            exists, witness = brute_force_max_ists(g, args.root, args.k)
            obj = {"n": g.n, "root": args.root, "k": args.k, "exists": exists,
                   "witness": [t.to_json_obj() for t in witness] if exists else None}
        else:
            from .verifier import max_ist_count

            best = max_ist_count(g, args.root)
            _, trees = brute_force_max_ists(g, args.root, best)
            obj = {"n": g.n, "root": args.root, "max": best,
                   "witness": [t.to_json_obj() for t in trees]}
    except TooLarge as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    _emit(obj, args.out)
    return 0


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="istlab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="sample one graph")
    g.add_argument("--model", choices=("gnp", "regular"), required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=float)
    g.add_argument("--d", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--format", choices=("text", "json"), default="json")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("build-gnp", help="one sprinkled G(n,p) IST build")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--p", type=float, required=True)
    b.add_argument("--eps", type=float, required=True)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--trial", type=int, default=0)
    b.add_argument("--root", type=int)
    b.add_argument("--out", help="write a re-verifiable artifact on success")
    b.set_defaults(func=cmd_build_gnp)

    r = sub.add_parser("build-regular", help="one regular-graph IST build (n parity picks the pipeline)")
    r.add_argument("--n", type=int, required=True)
    r.add_argument("--d", type=int, required=True)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--trial", type=int, default=0)
    r.add_argument("--root", type=int)
    r.add_argument("--out")
    r.set_defaults(func=cmd_build_regular)

    v = sub.add_parser("verify", help="re-verify a stored tree artifact")
    v.add_argument("--in", dest="infile", required=True)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="seeded Monte-Carlo grid sweep")
    s.add_argument("--model", choices=MODELS, required=True)
    s.add_argument("--n", help="comma list")
    s.add_argument("--p", help="comma list")
    s.add_argument("--d", help="comma list")
    s.add_argument("--eps", help="comma list")
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--root-mode", choices=ROOT_MODES, default="random")
    s.add_argument("--root", type=int)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--out")
    s.add_argument("--workers", type=int)
    s.add_argument("--no-artifacts", action="store_true")
    s.add_argument("--no-resume", action="store_true")
    s.set_defaults(func=cmd_sweep)

    ds = sub.add_parser("diameter-study", help="diameter under random edge deletions")
    ds.add_argument("--n", type=int, required=True)
    ds.add_argument("--d", type=int, default=3)
    ds.add_argument("--eps", type=float, default=0.1)
    ds.add_argument("--deletions", type=int, default=0)
    ds.add_argument("--trials", type=int, default=100)
    ds.add_argument("--seed", type=int, default=0)
    ds.add_argument("--constant", type=float, default=None,
                    help="threshold constant c in (d-1)^(s-3) >= c d n ln n (default 16+eps)")
    ds.add_argument("--exact", action="store_true", help="compute exact diameters")
    ds.add_argument("--out")
    ds.set_defaults(func=cmd_diameter_study)

    o = sub.add_parser("oracle", help="brute-force maximum IST family (tiny graphs)")
    o.add_argument("--in", dest="infile")
    o.add_argument("--edges", help='e.g. "0-1,1-2,2-0"')
    o.add_argument("--n", type=int)
    o.add_argument("--root", type=int, default=0)
    o.add_argument("--k", type=int, help="ask for a family of exactly k instead of the maximum")
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
