"""Seeded Monte-Carlo experiment driver.

Each trial's RNG stream is derived by hashing (seed base, cell key, trial
index), so editing the grid never perturbs other cells and any worker count
produces byte-identical output files.  Sweeps emit one CSV/JSON row per trial
plus one summary row per cell; successful trials can also be stored as
re-verifiable tree artifacts.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import time
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import DomainError, Failure
from .graph_core import Graph, RootedTree
from .ist_gnp import build_ists_gnp
from .ist_regular import build_ists_regular_even, build_ists_regular_odd
from .random_models import sample_gnp, sprinkle_split, trial_stream
from .verifier import verify_ist_family

MODELS = ("gnp", "regular-even", "regular-odd")
ROOT_MODES = ("random", "fixed", "all-roots-sample")

#: fixed CSV schema; summary rows reuse the count columns for cell means
COLUMNS = (
    "row_type", "model", "cell", "n", "p", "d", "eps", "root_mode", "root",
    "seed_base", "trial", "outcome", "stage", "k", "bad_count", "unsafe_count",
    "max_height", "verified", "artifact", "successes", "trials",
    "success_fraction",
)


@dataclass
class TrialResult:
    """One pipeline run: outcome, achieved k, diagnostics, and (transient,
    never serialized) the wall time and any trees/graph for artifact dumps."""

    model: str
    cell: dict
    seed_base: int
    trial: int
    root_mode: str
    outcome: str  # success | failure | domain_error
    root: int | None = None
    stage: str | None = None
    detail: str | None = None
    k: int | None = None
    verified: bool | None = None
    diagnostics: dict = field(default_factory=dict)
    wall_time: float = 0.0
    trees: list[RootedTree] | None = None
    graph: Graph | None = None

    def to_row(self, artifact: str = "") -> dict:
        diag = self.diagnostics
        return {
            "row_type": "trial",
            "model": self.model,
            "cell": cell_key(self.model, self.cell),
            "n": self.cell.get("n", ""),
            "p": self.cell.get("p", ""),
            "d": self.cell.get("d", ""),
            "eps": self.cell.get("eps", ""),
            "root_mode": self.root_mode,
            "root": "" if self.root is None else self.root,
            "seed_base": self.seed_base,
            "trial": self.trial,
            "outcome": self.outcome,
            "stage": self.stage or "",
            "k": "" if self.k is None else self.k,
            "bad_count": diag.get("bad_count", ""),
            "unsafe_count": diag.get("unsafe_count", ""),
            "max_height": max(diag["tree_heights"]) if diag.get("tree_heights") else "",
            "verified": "" if self.verified is None else int(self.verified),
            "artifact": artifact,
            "successes": "",
            "trials": "",
            "success_fraction": "",
        }


def cell_key(model: str, cell: dict) -> str:
    parts = [model] + [f"{k}={cell[k]!r}" for k in ("n", "p", "d", "eps") if k in cell]
    return "|".join(parts)


def run_trial(
    model: str,
    cell: dict,
    seed_base: int,
    trial: int,
    root_mode: str = "random",
    root: int | None = None,
) -> TrialResult:
    """Deterministic single trial; domain errors surface in the outcome."""
    key = cell_key(model, cell)
    rng = trial_stream(seed_base, key, trial)
    n = int(cell["n"])
    if root_mode == "all-roots-sample":
        perm = trial_stream(seed_base, key, "roots").permutation(n)
        root = int(perm[trial % n])
    elif root_mode == "fixed":
        root = int(root if root is not None else 0)
    else:
        root = None
    res = TrialResult(
        model=model, cell=cell, seed_base=seed_base, trial=trial,
        root_mode=root_mode, outcome="", root=root,
    )
    t0 = time.perf_counter()
    try:
        if model == "gnp":
            _run_gnp(res, cell, rng)
        elif model == "regular-even":
            _run_regular(res, cell, rng, odd=False)
        elif model == "regular-odd":
            _run_regular(res, cell, rng, odd=True)
        else:
            raise DomainError(f"unknown model {model!r}")
    except DomainError as exc:
        res.outcome = "domain_error"
        res.stage = type(exc).__name__
        res.detail = str(exc)
    res.wall_time = time.perf_counter() - t0
    return res


def _run_gnp(res: TrialResult, cell: dict, rng: np.random.Generator) -> None:
    n, p, eps = int(cell["n"]), float(cell["p"]), float(cell["eps"])
    p1, p2 = sprinkle_split(p, eps)  # DomainError propagates to the caller
    if res.root is None:
        res.root = int(rng.integers(n))
    G1 = sample_gnp(n, p1, rng)
    G2 = sample_gnp(n, p2, rng)
    out = build_ists_gnp(G1, G2, eps, p, res.root)
    if isinstance(out, Failure):
        res.outcome = "failure"
        res.stage = out.stage
        res.detail = out.detail
        return
    G = G1.union(G2)
    report = verify_ist_family(G, res.root, out)
    res.k = len(out)
    res.verified = report.ok
    res.trees = out
    res.graph = G
    if report.ok:
        res.outcome = "success"
    else:
        res.outcome = "failure"
        res.stage = "Verification"


def _run_regular(res: TrialResult, cell: dict, rng: np.random.Generator, odd: bool) -> None:
    n, d = int(cell["n"]), int(cell["d"])
    builder = build_ists_regular_odd if odd else build_ists_regular_even
    build = builder(n, d, rng, root=res.root)
    res.root = build.root
    res.diagnostics = dict(build.diagnostics)
    if not build.ok:
        res.outcome = "failure"
        res.stage = build.failure.stage
        res.detail = build.failure.detail
        return
    report = verify_ist_family(build.graph, build.root, build.trees)
    res.k = len(build.trees)
    res.verified = report.ok
    res.trees = build.trees
    res.graph = build.graph
    res.outcome = "success" if report.ok else "failure"
    if not report.ok:
        res.stage = "Verification"


@dataclass
class SweepConfig:
    """Grid sweep description; to_json_obj feeds both serialization and the
    config hash used for determinism and resume checks."""

    model: str
    grid: dict  # axis name -> list of values (axes: n, p, d, eps)
    trials: int
    seed_base: int
    root_mode: str = "random"
    root: int | None = None
    out: str | None = None
    format: str = "csv"
    workers: int = 1
    artifacts: bool = True

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise DomainError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.root_mode not in ROOT_MODES:
            raise DomainError(f"root_mode must be one of {ROOT_MODES}")
        if self.format not in ("csv", "json"):
            raise DomainError(f"format must be csv or json, got {self.format!r}")
        if self.trials < 0:
            raise DomainError("trials must be >= 0")
        bad = set(self.grid) - {"n", "p", "d", "eps"}
        if bad:
            raise DomainError(f"unknown grid axes {sorted(bad)}")
        needed = {"gnp": {"n", "p", "eps"}, "regular-even": {"n", "d"}, "regular-odd": {"n", "d"}}
        if self.grid and set(self.grid) != needed[self.model]:
            raise DomainError(
                f"model {self.model} needs grid axes {sorted(needed[self.model])}, got {sorted(self.grid)}"
            )

    def cells(self) -> list[dict]:
        if not self.grid:
            return []
        axes = [a for a in ("n", "p", "d", "eps") if a in self.grid]
        out = []
        for combo in product(*(self.grid[a] for a in axes)):
            out.append(dict(zip(axes, combo)))
        return out

    def to_json_obj(self) -> dict:
        return {
            "model": self.model,
            "grid": {k: list(v) for k, v in self.grid.items()},
            "trials": self.trials,
            "seed_base": self.seed_base,
            "root_mode": self.root_mode,
            "root": self.root,
            "format": self.format,
            "artifacts": self.artifacts,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.to_json_obj(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _task_result(args: tuple) -> TrialResult:
    model, cell, seed_base, trial, root_mode, root = args
    return run_trial(model, cell, seed_base, trial, root_mode=root_mode, root=root)


def _iter_results(config: SweepConfig, tasks: Sequence[tuple], skip: int) -> Iterator[TrialResult]:
    todo = tasks[skip:]
    if config.workers <= 1 or not todo:
        for t in todo:
            yield _task_result(t)
        return
    import multiprocessing as mp

    with mp.Pool(config.workers) as pool:
        yield from pool.imap(_task_result, todo, chunksize=1)


def _artifact_path(out: str | None, idx: int, trial: int) -> Path | None:
    if out is None:
        return None
    stem = Path(out)
    adir = stem.with_name(stem.stem + "_artifacts")
    return adir / f"cell{idx:03d}_trial{trial:05d}.json"


def write_artifact(path: Path, res: TrialResult) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    obj = {
        "model": res.model,
        "cell": cell_key(res.model, res.cell),
        "trial": res.trial,
        "root": res.root,
        "k": res.k,
        "graph": res.graph.to_json_obj(),
        "trees": [t.to_json_obj() for t in res.trees],
    }
    path.write_text(json.dumps(obj, separators=(",", ":")) + "\n")


def _format_row_csv(row: dict) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writerow(row)
    return buf.getvalue()


def _summary_rows(config: SweepConfig, cells: list[dict], rows: list[dict]) -> list[dict]:
    out = []
    for cell in cells:
        key = cell_key(config.model, cell)
        sub = [r for r in rows if r["cell"] == key]
        succ = sum(1 for r in sub if r["outcome"] == "success")
        def mean(col: str) -> str:
            vals = [float(r[col]) for r in sub if r[col] != ""]
            return repr(sum(vals) / len(vals)) if vals else ""
        out.append({
            "row_type": "summary",
            "model": config.model,
            "cell": key,
            "n": cell.get("n", ""),
            "p": cell.get("p", ""),
            "d": cell.get("d", ""),
            "eps": cell.get("eps", ""),
            "root_mode": config.root_mode,
            "root": "",
            "seed_base": config.seed_base,
            "trial": "",
            "outcome": "",
            "stage": "",
            "k": "",
            "bad_count": mean("bad_count"),
            "unsafe_count": mean("unsafe_count"),
            "max_height": mean("max_height"),
            "verified": "",
            "artifact": "",
            "successes": succ,
            "trials": len(sub),
            "success_fraction": repr(succ / len(sub)) if sub else "",
        })
    return out


@dataclass
class SweepResult:
    rows: list[dict]
    summaries: list[dict]
    text: str
    invariant_breaches: int  # success rows whose re-verification failed

    @property
    def ok(self) -> bool:
        return self.invariant_breaches == 0


def run_sweep(config: SweepConfig, resume: bool = True) -> SweepResult:
    """Run the full grid; on KeyboardInterrupt, flush partial rows plus a
    resume token so a rerun with the identical config continues and produces
    the byte-identical final file."""
    cells = config.cells()
    tasks = [
        (config.model, cell, config.seed_base, t, config.root_mode, config.root)
        for ci, cell in enumerate(cells)
        for t in range(config.trials)
    ]
    cell_index = {cell_key(config.model, c): i for i, c in enumerate(cells)}
    partial_path = Path(config.out + ".partial") if config.out else None
    token_path = Path(config.out + ".resume.json") if config.out else None
    rows: list[dict] = []
    if (
        resume
        and token_path is not None
        and token_path.exists()
        and partial_path is not None
        and partial_path.exists()
    ):
        token = json.loads(token_path.read_text())
        if token.get("config_hash") == config.config_hash():
            rows = [json.loads(line) for line in partial_path.read_text().splitlines()]
    try:
        for res in _iter_results(config, tasks, skip=len(rows)):
            artifact = ""
            if config.artifacts and res.outcome == "success" and config.out:
                apath = _artifact_path(config.out, cell_index[cell_key(res.model, res.cell)], res.trial)
                write_artifact(apath, res)
                artifact = str(apath)
            rows.append(res.to_row(artifact=artifact))
    except KeyboardInterrupt:
        if partial_path is not None:
            partial_path.write_text("".join(json.dumps(r, separators=(",", ":")) + "\n" for r in rows))
            token_path.write_text(json.dumps(
                {"config_hash": config.config_hash(), "rows_done": len(rows)}
            ) + "\n")
        raise
    summaries = _summary_rows(config, cells, rows)
    text = render_table(config, rows + summaries)
    if config.out:
        Path(config.out).write_text(text)
        if partial_path is not None and partial_path.exists():
            partial_path.unlink()
        if token_path is not None and token_path.exists():
            token_path.unlink()
    breaches = sum(1 for r in rows if r["outcome"] == "success" and r["verified"] != 1)
    return SweepResult(rows=rows, summaries=summaries, text=text, invariant_breaches=breaches)


def render_table(config: SweepConfig, rows: list[dict]) -> str:
    """CSV (header + rows) or a JSON document mirroring the same rows."""
    if config.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r)
        return buf.getvalue()
    doc = {
        "config": config.to_json_obj(),
        "config_hash": config.config_hash(),
        "columns": list(COLUMNS),
        "rows": rows,
    }
    return json.dumps(doc, separators=(",", ":")) + "\n"


def default_workers() -> int:
    env = os.environ.get("ISTLAB_WORKERS", "")
    if env.strip():
        return max(1, int(env))
    return 1
