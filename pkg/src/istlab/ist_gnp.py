"""Three-phase randomized construction of ceil((1-eps)*n*p) independent
spanning trees in a sprinkled G(n,p) = G1 union G2.

Phase 1 fixes k root neighbors v_1..v_k.  Phase 2 grows a core set C_i around
each v_i by single-edge-exposure BFS in G1, leaving all (B_i, U_i) pairs
unprobed.  Phase 3 attaches every remaining vertex to each tree, using fresh
G2 randomness and an auxiliary bipartite matching to keep the chosen parents
distinct across trees.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels as K
from .errors import DomainError, Failure
from .graph_core import Graph, RootedTree
from .random_models import ceil_exact

_DENSE_ADJ_LIMIT = 4096  # dense attachment builds an n x n boolean adjacency; cap n


@dataclass
class CoreSetRecord:
    """One Phase 2 core: seed v, core C = B (boundary leaves) + D (explored)."""

    index: int
    v: int
    C: frozenset[int]
    B: tuple[int, ...]  # FIFO discovery order
    D: tuple[int, ...]  # processing order (v first)
    parent: dict[int, int]  # T'_i parent map on C; seed v maps to -1
    probes: tuple[tuple[int, int], ...]  # (prober, probed) in consumption order


@dataclass
class GnpIstBuild:
    """Everything one build exposed: parameters, cores, residual set, ledger."""

    n: int
    p: float
    eps: float
    k: int
    root: int
    R: tuple[int, ...]
    cores: list[CoreSetRecord]
    S: tuple[int, ...]
    ledger: tuple[tuple[int, int, int], ...]  # (u, v, graph id) revealed pairs
    trees: list[RootedTree] | None = None


def core_target_size(eps: float, p: float) -> int:
    return ceil_exact(eps / (3.0 * p))


def boundary_floor(eps: float, p: float) -> int:
    return ceil_exact(eps / (6.0 * p))


def core_sets_bfs(
    G1: Graph,
    root: int,
    R: Sequence[int],
    eps: float,
    p: float,
    order: Sequence[int] | np.ndarray | None = None,
) -> list[CoreSetRecord] | Failure:
    """Phase 2: grow one core per seed by single-edge exposure in G1.

    Queue discipline: the most recently explored vertex (last of D) probes one
    unprobed candidate of U_i at a time, in the fixed vertex order; successful
    probes append to the FIFO boundary B; when the prober exhausts U_i the
    oldest boundary vertex moves to D; an empty boundary is a Failure.  When
    eps <= 3p every core is the singleton {v_i} with B_i = D_i = {v_i}.
    """
    n = G1.n
    if order is None:
        order_arr = np.arange(n, dtype=np.int64)
    else:
        order_arr = np.asarray(order, np.int64)
        if order_arr.shape != (n,) or not np.array_equal(np.sort(order_arr), np.arange(n)):
            raise DomainError("order must be a permutation of the vertices")
    target = core_target_size(eps, p)
    avail = np.ones(n, bool)
    avail[root] = False
    avail[list(R)] = False
    records: list[CoreSetRecord] = []
    if eps <= 3.0 * p:
        for i, v in enumerate(R):
            records.append(
                CoreSetRecord(
                    index=i, v=int(v), C=frozenset([int(v)]),
                    B=(int(v),), D=(int(v),), parent={int(v): -1}, probes=(),
                )
            )
        return records
    for i, v_seed in enumerate(R):
        v_seed = int(v_seed)
        D: list[int] = [v_seed]
        B: deque[int] = deque()
        parent: dict[int, int] = {v_seed: -1}
        probes: list[tuple[int, int]] = []
        ptr: dict[int, int] = {v_seed: 0}
        while len(D) + len(B) < target:
            v = D[-1]
            # advance past vertices no longer in U_i without consuming probes
            j = ptr[v]
            while j < n and not avail[order_arr[j]]:
                j += 1
            ptr[v] = j
            if j < n:
                u = int(order_arr[j])
                ptr[v] = j + 1
                probes.append((v, u))
                if G1.has_edge(v, u):
                    B.append(u)
                    avail[u] = False
                    parent[u] = v
            else:
                if not B:
                    return Failure(
                        "Phase2",
                        f"core {i}: boundary queue empty at size {len(D)}",
                        {"core": i, "seed": v_seed, "reached": len(D)},
                    )
                w = B.popleft()
                D.append(w)
                ptr[w] = 0
        records.append(
            CoreSetRecord(
                index=i, v=v_seed, C=frozenset(D) | frozenset(B),
                B=tuple(B), D=tuple(D), parent=parent, probes=tuple(probes),
            )
        )
    return records


def exposure_violations(build: GnpIstBuild) -> list[tuple[int, int, int]]:
    """Probed (B_i, U_i) pairs, which the exploration discipline forbids.

    Returns (core index, prober, probed) triples; an empty list certifies that
    all edges between the final boundary and the final unexplored set stayed
    unrevealed.
    """
    out: list[tuple[int, int, int]] = []
    excluded = {build.root} | set(build.R)
    for rec in build.cores:
        B = set(rec.B) if len(rec.C) > 1 else set()
        U_final = set(range(build.n)) - excluded - rec.C
        for a, b in rec.probes:
            if (a in B and b in U_final) or (a in U_final and b in B):
                out.append((rec.index, a, b))
        excluded |= rec.C
    return out


def _core_gate(records: list[CoreSetRecord], eps: float, p: float) -> Failure | None:
    """Deterministic construction facts are asserted; the probabilistic
    boundary-size bound becomes a Failure gate so successes always satisfy it."""
    target = core_target_size(eps, p)
    floor = boundary_floor(eps, p)
    seen: set[int] = set()
    for rec in records:
        assert len(rec.C) == target, "core size must equal the target"
        if len(rec.C) > 1:
            assert not (set(rec.B) & set(rec.D)), "B and D must partition C"
            assert set(rec.parent.values()) - {-1} <= set(rec.D), "boundary vertices must be leaves"
        assert not (rec.C & seen), "cores must be pairwise disjoint"
        seen |= rec.C
        if len(rec.B) < floor:
            return Failure(
                "Phase2",
                f"core {rec.index}: boundary {len(rec.B)} below floor {floor}",
                {"core": rec.index, "boundary": len(rec.B), "floor": floor},
            )
    return None


def bipartite_max_matching(
    n_left: int, n_right: int, edges: Sequence[tuple[int, int]]
) -> np.ndarray:
    """Maximum matching as an array: match[left] = right partner or -1.

    Deterministic given the input edge order (edges are scanned per left
    vertex in sorted order).
    """
    e = np.asarray(list(edges), np.int64).reshape(-1, 2)
    if e.size:
        if e[:, 0].min() < 0 or e[:, 0].max() >= n_left or e[:, 1].min() < 0 or e[:, 1].max() >= n_right:
            raise DomainError("edge endpoint out of range")
        order = np.lexsort((e[:, 1], e[:, 0]))
        e = e[order]
        counts = np.bincount(e[:, 0], minlength=n_left)
    else:
        counts = np.zeros(n_left, np.int64)
    indptr = np.zeros(n_left + 1, np.int64)
    np.cumsum(counts, out=indptr[1:])
    indices = e[:, 1].astype(np.int32) if e.size else np.empty(0, np.int32)
    return np.asarray(K.kuhn_match(indptr, indices, n_left, n_right))


def _block_matching(block: np.ndarray) -> np.ndarray:
    """Kuhn matching on a dense boolean bipartite block (rows = left)."""
    nl, nr = block.shape
    xs, ys = np.nonzero(block)
    counts = np.bincount(xs, minlength=nl)
    indptr = np.zeros(nl + 1, np.int64)
    np.cumsum(counts, out=indptr[1:])
    return np.asarray(K.kuhn_match(indptr, ys.astype(np.int32), nl, nr))


def attach_phase3(
    build: GnpIstBuild,
    G1: Graph,
    G2: Graph,
    rng: np.random.Generator | None = None,
    union_graph: Graph | None = None,
) -> list[RootedTree] | Failure:
    """Phase 3: pick distinct parents w_1..w_k for every vertex.

    Bullet rules per vertex v != r: (1) v in C_i -> its T'_i parent; (2) some
    G-neighbor in B_i -> the lowest such; (3) otherwise a fresh vertex from S
    chosen by a maximum matching on the auxiliary graph H_v.  `rng` is unused
    (the construction is deterministic given the graphs); accepted for API
    symmetry with the samplers.  `union_graph`, when given, must equal
    G1 union G2 (callers that already built it skip a recomputation).
    """
    n, k, root = build.n, build.k, build.root
    G = union_graph if union_graph is not None else G1.union(G2)
    matched_attach = build.eps >= 3.0 * build.p
    core_of = np.full(n, -1, np.int32)
    in_B = np.full(n, -1, np.int32)
    for rec in build.cores:
        core_of[list(rec.C)] = rec.index
        in_B[list(rec.B)] = rec.index
    S_mask = np.zeros(n, bool)
    S_mask[list(build.S)] = True

    parents = np.full((k, n), -1, np.int32)
    for rec in build.cores:
        parents[rec.index, rec.v] = root
        for u, pu in rec.parent.items():
            if pu >= 0:
                parents[rec.index, u] = pu

    if matched_attach:
        # N_i = N_G1(B_i) cap S as one boolean row per tree
        nmat = np.zeros((k, n), bool)
        for rec in build.cores:
            for b in rec.B:
                nbrs = G1.neighbors(b)
                nmat[rec.index, nbrs] = True
        nmat &= S_mask[None, :]
        y_adj = None
    else:
        if n > _DENSE_ADJ_LIMIT:
            raise DomainError(f"dense attachment limited to n <= {_DENSE_ADJ_LIMIT}")
        y_adj = np.zeros((n, n), bool)
        ge = G.edges
        y_adj[ge[:, 0], ge[:, 1]] = True
        y_adj[ge[:, 1], ge[:, 0]] = True
        nmat = None
    seeds = np.asarray(build.R, np.int64)

    for v in range(n):
        if v == root:
            continue
        ci = int(core_of[v])
        nbrs = G.neighbors(v).astype(np.int64)
        bvals = in_B[nbrs]
        hit = bvals >= 0
        # lowest-indexed B_i neighbor per i: neighbors ascend, unique keeps first
        i_prime, first_pos = np.unique(bvals[hit], return_index=True)
        first_nbr = nbrs[hit][first_pos]
        mask_ip = i_prime != ci if ci >= 0 else np.ones(i_prime.size, bool)
        parents[i_prime[mask_ip], v] = first_nbr[mask_ip]
        cov = np.zeros(k, bool)
        cov[i_prime] = True
        if ci >= 0:
            cov[ci] = True
        if cov.all():
            continue
        X = np.flatnonzero(~cov)
        if matched_attach:
            y_all = G2.neighbors(v).astype(np.int64)
            Yv = y_all[S_mask[y_all]]
            if Yv.size < k:
                return Failure(
                    "Phase3",
                    f"vertex {v}: |Y_v| = {Yv.size} < k = {k}",
                    {"vertex": v, "y_size": int(Yv.size), "k": k},
                )
            Yp = Yv[:k]
            block = nmat[np.ix_(X, Yp)]
        else:
            need = X.size
            y_all = nbrs[S_mask[nbrs]]
            if y_all.size < need:
                return Failure(
                    "Phase3",
                    f"vertex {v}: |Y_v| = {y_all.size} < {need}",
                    {"vertex": v, "y_size": int(y_all.size), "k": k},
                )
            Yp = y_all[:need]
            block = y_adj[np.ix_(seeds[X], Yp)]
        match = _block_matching(block)
        if np.any(match < 0):
            return Failure(
                "Phase3",
                f"vertex {v}: matching covers {int((match >= 0).sum())} of {X.size} trees",
                {"vertex": v, "uncovered": [int(X[t]) for t in np.nonzero(match < 0)[0]]},
            )
        parents[X, v] = Yp[match]

    trees = [RootedTree(root, parents[i]) for i in range(k)]
    build.trees = trees
    return trees


def build_ists_gnp_detailed(
    G1: Graph,
    G2: Graph,
    eps: float,
    p: float,
    root: int,
    rng: np.random.Generator | None = None,
    order: Sequence[int] | None = None,
) -> tuple[list[RootedTree] | Failure, GnpIstBuild | None]:
    """Full pipeline returning (result, build record); see build_ists_gnp."""
    if G1.n != G2.n:
        raise DomainError("G1 and G2 must share the vertex set")
    n = G1.n
    if not 0.0 < eps < 0.5:
        raise DomainError(f"need eps in (0,1/2), got {eps}")
    if not 0.0 < p <= 1.0:
        raise DomainError(f"need p in (0,1], got {p}")
    if not 0 <= root < n:
        raise DomainError(f"root {root} out of range")
    k = ceil_exact((1.0 - eps) * n * p)
    G = G1.union(G2)
    root_nbrs = G.neighbors(root)
    if root_nbrs.size < k:
        return (
            Failure(
                "Phase1",
                f"root degree {root_nbrs.size} < k = {k}",
                {"root_degree": int(root_nbrs.size), "k": k},
            ),
            None,
        )
    R = tuple(int(x) for x in root_nbrs[:k])
    records = core_sets_bfs(G1, root, R, eps, p, order=order)
    if isinstance(records, Failure):
        return records, None
    gate = _core_gate(records, eps, p)
    if gate is not None:
        return gate, None
    in_core = set().union(*(rec.C for rec in records))
    S = tuple(v for v in range(n) if v != root and v not in in_core)
    ledger = tuple((min(a, b), max(a, b), 1) for rec in records for a, b in rec.probes)
    build = GnpIstBuild(
        n=n, p=p, eps=eps, k=k, root=root, R=R, cores=records, S=S, ledger=ledger
    )
    result = attach_phase3(build, G1, G2, rng, union_graph=G)
    return result, build


def build_ists_gnp(
    G1: Graph,
    G2: Graph,
    eps: float,
    p: float,
    root: int,
    rng: np.random.Generator | None = None,
    order: Sequence[int] | None = None,
) -> list[RootedTree] | Failure:
    """Build k = ceil((1-eps)*n*p) ISTs rooted at `root`, or a typed Failure.

    G1/G2 are the sprinkled halves (Phase 2 only ever reads G1; Phase 3 reads
    G = G1 union G2 and fresh G2 edges).  `p` is the pre-split edge
    probability used for k and the core sizing.
    """
    result, _ = build_ists_gnp_detailed(G1, G2, eps, p, root, rng=rng, order=order)
    return result


def expansion_diagnostic(
    G: Graph, p: float, c: float, trials: int, rng: np.random.Generator
) -> dict:
    """Sample vertex sets S with |S| <= ceil(c/p) and report how often the
    expansion bound |N(S)| >= |S|(n-|S|)p/2 fails.  Diagnostic only."""
    if not 0.0 < c <= 0.5:
        raise DomainError(f"need c in (0,1/2], got {c}")
    n = G.n
    smax = max(1, min(n - 1, ceil_exact(c / p)))
    violations = 0
    examples: list[list[int]] = []
    for _ in range(trials):
        size = int(rng.integers(1, smax + 1))
        S = rng.choice(n, size=size, replace=False)
        nb = set()
        for v in S:
            nb.update(int(w) for w in G.neighbors(int(v)))
        nb -= set(int(v) for v in S)
        bound = size * (n - size) * p / 2.0
        if len(nb) < bound:
            violations += 1
            if len(examples) < 5:
                examples.append(sorted(int(v) for v in S))
    return {
        "n": n,
        "p": p,
        "c": c,
        "max_size": smax,
        "trials": trials,
        "violations": violations,
        "violation_fraction": violations / trials if trials else 0.0,
        "examples": examples,
    }
