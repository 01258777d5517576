"""Benchmark the compiled graph kernels against the pure-NumPy fallback.

Run without arguments to print a comparison table: the script re-executes
itself twice (once as-is, once with ISTLAB_NO_NUMBA=1) so each mode gets a
fresh interpreter and the flag is honored at import time.

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --reps 7 --json
"""
from __future__ import annotations

import argparse
import json
import os
import statistics
import subprocess
import sys
import time


def build_inputs():
    from istlab.graph_core import Graph, bfs_tree
    from istlab.random_models import sample_matching_family, trial_stream

    big = sample_matching_family(100_000, 8, trial_stream(0, "bench", 1)).union()
    cubic = sample_matching_family(10_000, 3, trial_stream(0, "bench", 2)).union()
    mid = sample_matching_family(3_000, 3, trial_stream(0, "bench", 3)).union()
    tree = bfs_tree(big, 0)

    import numpy as np

    rng = trial_stream(0, "bench", 4)
    n_side = 2000
    deg = rng.poisson(4.0, n_side) + 1
    rows = np.repeat(np.arange(n_side), deg)
    cols = rng.integers(0, n_side, rows.size)
    order = np.argsort(rows, kind="stable")
    rows, cols = rows[order], cols[order].astype(np.int32)
    indptr = np.searchsorted(rows, np.arange(n_side + 1)).astype(np.int64)

    t_small = bfs_tree(mid, 0)
    parents2 = np.stack([
        bfs_tree(mid, 0).parent,
        bfs_tree(mid, 0, order=trial_stream(0, "bench", 5).permutation(3_000)).parent,
    ])
    return {
        "bfs_parents(n=1e5, d=8)": lambda K: K.bfs_parents(big.indptr, big.indices, 0),
        "diameter_at_most(n=1e4, d=3, s=26)": lambda K: K.diameter_at_most(
            cubic.indptr, cubic.indices, 26),
        "all_eccentricities(n=3e3, d=3)": lambda K: K.all_eccentricities(
            mid.indptr, mid.indices),
        "kuhn_match(2000x2000)": lambda K: K.kuhn_match(indptr, cols, n_side, n_side),
        "tree_check(n=1e5)": lambda K: K.tree_check(
            tree.parent, 0, big.indptr, big.indices),
        "conflict_scan(n=3e3, k=2)": lambda K: K.conflict_scan(parents2, 0),
        "_tree": t_small,
    }


def run_mode(reps: int) -> dict:
    from istlab import _kernels as K

    K.warmup()
    work = build_inputs()
    work.pop("_tree")
    out = {}
    for name, fn in work.items():
        fn(K)  # one untimed call per kernel (first-call JIT specialization)
        times = []
        for _ in range(reps):
            t0 = time.perf_counter()
            fn(K)
            times.append(time.perf_counter() - t0)
        out[name] = statistics.median(times)
    out["_numba"] = K.USING_NUMBA
    return out


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--json", action="store_true", help="emit raw numbers")
    ap.add_argument("--mode", choices=("single",), help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.mode == "single":
        print(json.dumps(run_mode(args.reps)))
        return 0

    results = {}
    for label, extra_env in (("numba", {}), ("numpy", {"ISTLAB_NO_NUMBA": "1"})):
        env = dict(os.environ, **extra_env)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--mode", "single",
             "--reps", str(args.reps)],
            env=env, capture_output=True, text=True, check=True,
        )
        results[label] = json.loads(proc.stdout.splitlines()[-1])
    if not results["numba"].pop("_numba"):
        print("warning: numba unavailable; both columns ran the fallback",
              file=sys.stderr)
    results["numpy"].pop("_numba")

    if args.json:
        print(json.dumps(results, indent=2))
        return 0
    width = max(map(len, results["numba"]))
    print(f"{'kernel':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for name in results["numba"]:
        a = results["numba"][name]
        b = results["numpy"][name]
        print(f"{name:<{width}}  {a * 1e3:>8.2f}ms  {b * 1e3:>8.2f}ms  {b / a:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
