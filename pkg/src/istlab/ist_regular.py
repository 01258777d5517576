"""IST pipelines for random regular graphs built from disjoint perfect
matchings: color decomposition, per-color BFS trees, bad-vertex detection and
matching-edge rerouting, the strong (P1/P2) variant that avoids a designated
induced matching, and the odd-n vertex-addition route.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels as K
from .errors import DegreeTooSmall, DomainError, Failure, SamplingFailed
from .graph_core import Graph, RootedTree, bfs_tree
from .random_models import MatchingFamily, sample_matching_family
from .verifier import verify_ist_family, verify_strong

#: sentinel for an op that fed on a non-induced edge multiset (compare with `is`)
L_EMPTY = Graph.from_edges(1, [])


@dataclass(frozen=True)
class RegularParams:
    """Size parameters and the logarithmic thresholds psi/beta."""

    n: int
    d: int

    def __post_init__(self) -> None:
        if self.n < 3:
            raise DomainError(f"need n >= 3 for the log-log thresholds, got {self.n}")

    @property
    def k(self) -> int:
        return self.d // 4

    @property
    def psi(self) -> float:
        return 20.0 * math.log2(math.log(self.n))

    @property
    def beta(self) -> float:
        return math.log2(self.n) + self.psi


@dataclass(frozen=True)
class ColorDecomposition:
    """Groups of three matchings per tree (the exploration graphs G_i), one
    reserve matching M_i per tree, and any leftover colors (d mod 4)."""

    n: int
    k: int
    groups: tuple[Graph, ...]
    reserves: tuple[np.ndarray, ...]  # partner arrays: reserves[i][v] = M_i partner
    reserve_edges: tuple[np.ndarray, ...]  # the same matchings as (n/2, 2) arrays
    leftover: tuple[np.ndarray, ...]


def decompose_colors(fam: MatchingFamily) -> ColorDecomposition:
    """Group colors in fours: G_i = colors 4i..4i+2 (a 3-regular graph), M_i =
    color 4i+3 (the reserve); colors past 4*(d//4) are leftover and unused."""
    if fam.d < 4:
        raise DegreeTooSmall(f"need at least 4 matchings, got {fam.d}")
    k = fam.d // 4
    groups = []
    reserves = []
    reserve_edges = []
    for i in range(k):
        tri = np.concatenate([fam.matchings[4 * i + t] for t in range(3)])
        groups.append(Graph.from_edges(fam.n, tri))
        reserve_edges.append(fam.matchings[4 * i + 3])
        reserves.append(fam.partner_array(4 * i + 3))
    leftover = tuple(fam.matchings[4 * k :])
    return ColorDecomposition(
        n=fam.n,
        k=k,
        groups=tuple(groups),
        reserves=tuple(reserves),
        reserve_edges=tuple(reserve_edges),
        leftover=leftover,
    )


@dataclass(frozen=True)
class BadVertexRecord:
    """Vertex v whose root paths in trees i < j share the internal anchor u;
    ell is the rerouting tree: the one where u sits deeper, ties to min."""

    v: int
    i: int
    j: int
    u: int
    ell: int


def find_bad(trees: Sequence[RootedTree], root: int) -> list[BadVertexRecord]:
    """Exhaustively list every (v, i, j, anchor) with a shared internal vertex
    on the v->root paths of trees i and j."""
    k = len(trees)
    n = trees[0].n if trees else 0
    depths = [t.depths() for t in trees]
    out: list[BadVertexRecord] = []
    for v in range(n):
        if v == root:
            continue
        internals: list[set[int]] = []
        for t in trees:
            s: set[int] = set()
            u = int(t.parent[v])
            while u != root:
                s.add(u)
                u = int(t.parent[u])
            internals.append(s)
        for i in range(k):
            for j in range(i + 1, k):
                for u in sorted(internals[i] & internals[j]):
                    di, dj = int(depths[i][u]), int(depths[j][u])
                    ell = i if di > dj else j if dj > di else min(i, j)
                    out.append(BadVertexRecord(v=v, i=i, j=j, u=u, ell=ell))
    return out


@dataclass
class ReroutePlan:
    """I(w) index sets plus the concrete parent swaps (w, ell) -> M_ell partner."""

    I: dict[int, set[int]] = field(default_factory=dict)
    swaps: dict[tuple[int, int], int] = field(default_factory=dict)

    @property
    def unsafe(self) -> list[int]:
        return sorted(self.I)


def plan_reroute(
    trees: Sequence[RootedTree],
    bads: Sequence[BadVertexRecord],
    reserves: Sequence[np.ndarray],
    order: Sequence[int] | None = None,
) -> ReroutePlan:
    """Accumulate I(w) over the pre-swap subtrees T_ell(v) of all bad vertices
    (processed in `order`, default ascending v; the result is order-free since
    the subtrees are all read from the input trees), then emit one swap per
    (w, ell) with ell in I(w)."""
    plan = ReroutePlan()
    recs = list(bads)
    if order is None:
        recs.sort(key=lambda r: (r.v, r.i, r.j, r.u))
    else:
        pos = {v: t for t, v in enumerate(order)}
        recs.sort(key=lambda r: (pos[r.v], r.i, r.j, r.u))
    for rec in recs:
        for w in trees[rec.ell].subtree(rec.v):
            plan.I.setdefault(int(w), set()).add(rec.ell)
    for w, idxs in plan.I.items():
        for ell in idxs:
            plan.swaps[(w, ell)] = int(reserves[ell][w])
    return plan


def apply_reroute(
    trees: Sequence[RootedTree],
    plan: ReroutePlan,
    reserves: Sequence[np.ndarray],
) -> list[RootedTree]:
    """Functionally replace each planned parent edge by the reserve-matching
    edge.  The output may fail tree-ness; the verifier is the judge."""
    parents = [t.parent.copy() for t in trees]
    for (w, ell), z in plan.swaps.items():
        assert w != trees[ell].root, "the root never reroutes"
        parents[ell][w] = z
    return [RootedTree(t.root, p) for t, p in zip(trees, parents)]


@dataclass
class RegularBuild:
    """Outcome record for the even/strong/odd pipelines: trees on success,
    a staged Failure otherwise, and diagnostics for whatever stages ran."""

    n: int
    d: int
    k: int
    root: int | None
    trees: list[RootedTree] | None = None
    failure: Failure | None = None
    diagnostics: dict = field(default_factory=dict)
    graph: Graph | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None

    def to_json_obj(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "k": self.k,
            "root": self.root,
            "ok": self.ok,
            "failure": None if self.failure is None else self.failure.to_json_obj(),
            "diagnostics": self.diagnostics,
        }


def _unique_anchor_gate(bads: Sequence[BadVertexRecord]) -> Failure | None:
    counts: dict[int, int] = {}
    for rec in bads:
        counts[rec.v] = counts.get(rec.v, 0) + 1
    multi = {v: c for v, c in counts.items() if c > 1}
    if multi:
        v, c = min(multi.items())
        return Failure(
            "UniqueAnchor",
            f"{len(multi)} bad vertices with multiple records (first: v={v} x{c})",
            {"vertices": sorted(multi)[:32], "multiplicity": c},
        )
    return None


def _tree_diagnostics(decomp: ColorDecomposition, trees: Sequence[RootedTree]) -> dict:
    diams = [int(K.diameter_csr(g.indptr, g.indices)) for g in decomp.groups]
    heights = [int(t.depths().max()) for t in trees]
    return {"group_diameters": diams, "tree_heights": heights}


def build_ists_regular_even(
    n: int,
    d: int,
    rng: np.random.Generator,
    root: int | None = None,
    debug: bool = False,
) -> RegularBuild:
    """Sample d disjoint perfect matchings on n (even) vertices, build one BFS
    tree per color group, reroute all bad vertices once, and verify."""
    if n % 2 != 0:
        raise DomainError(f"even pipeline needs even n, got {n}")
    if d < 4:
        raise DegreeTooSmall(f"need d >= 4, got {d}")
    params = RegularParams(n, d)
    build = RegularBuild(n=n, d=d, k=params.k, root=root)
    build.diagnostics["psi"] = params.psi
    build.diagnostics["beta"] = params.beta
    try:
        fam = sample_matching_family(n, d, rng)
    except SamplingFailed as exc:
        build.failure = Failure("Sampling", str(exc))
        return build
    decomp = decompose_colors(fam)
    build.graph = fam.union()
    build.diagnostics["leftover_colors"] = len(decomp.leftover)
    if root is None:
        root = int(rng.integers(n))
    build.root = root
    trees = []
    for i, g in enumerate(decomp.groups):
        try:
            trees.append(bfs_tree(g, root))
        except Exception:
            build.failure = Failure("BfsTree", f"group {i} does not connect", {"group": i})
            return build
    build.diagnostics.update(_tree_diagnostics(decomp, trees))
    build.diagnostics["diameter_ok"] = all(
        dd <= params.beta for dd in build.diagnostics["group_diameters"]
    )
    bads = find_bad(trees, root)
    build.diagnostics["bad_count"] = len({r.v for r in bads})
    gate = _unique_anchor_gate(bads)
    if gate is not None:
        build.failure = gate
        return build
    plan = plan_reroute(trees, bads, decomp.reserves)
    build.diagnostics["unsafe_count"] = len(plan.I)
    assert len(plan.I) <= params.beta**20
    final = apply_reroute(trees, plan, decomp.reserves)
    report = verify_ist_family(build.graph, root, final)
    if not report.ok:
        data = {"conflicts": len(report.conflicts), "structural": len(report.structural)}
        if debug:
            data["witnesses"] = report.to_json_obj()
        build.failure = Failure("Verification", "final family is not an IST family", data)
        return build
    build.trees = final
    return build


def shallow_pair_fraction(trees: Sequence[RootedTree], beta: float) -> float:
    """Fraction of vertices having at least two trees with root distance at
    most beta/3 (an empirical smallness diagnostic)."""
    depth = np.stack([t.depths() for t in trees])
    shallow = (depth <= beta / 3.0).sum(axis=0)
    root = trees[0].root
    mask = np.ones(depth.shape[1], bool)
    mask[root] = False
    return float((shallow[mask] >= 2).mean())


# ---------------------------------------------------------------------------
# odd n: strong families avoiding an induced matching, then vertex addition
# ---------------------------------------------------------------------------

def is_induced_matching(L: Graph, S: Sequence[Sequence[int]]) -> bool:
    """True iff the edges of S are distinct, pairwise vertex-disjoint L-edges
    and no other L-edge joins two of their endpoints."""
    seen: set[int] = set()
    canon: set[tuple[int, int]] = set()
    for (u, v) in S:
        u, v = int(u), int(v)
        if u == v or not L.has_edge(u, v):
            return False
        if u in seen or v in seen:
            return False
        seen.add(u)
        seen.add(v)
        canon.add((min(u, v), max(u, v)))
    inside = 0
    for u in seen:
        for w in L.neighbors(u):
            w = int(w)
            if w in seen and u < w:
                inside += 1
                if (u, w) not in canon:
                    return False
    return inside == len(canon)


def sample_induced_matching(
    L: Graph, half_d: int, rng: np.random.Generator
) -> tuple[list[tuple[int, int]], bool]:
    """Draw half_d edges of L uniformly with repetition; flag whether they
    form an induced matching (distinct, disjoint, no extra edge inside)."""
    if half_d < 1:
        raise DomainError(f"need at least one edge, got {half_d}")
    if L.m == 0:
        raise DomainError("graph has no edges")
    picks = rng.integers(0, L.m, size=half_d)
    edges = L.edges[picks]
    S = [(int(u), int(v)) for u, v in edges]
    return S, is_induced_matching(L, S)


def op_transform(L: Graph, S: Sequence[Sequence[int]]) -> Graph:
    """Delete the induced matching S from L and add one new vertex adjacent to
    every endpoint of S; returns the L_EMPTY sentinel when S is not induced."""
    if not is_induced_matching(L, S):
        return L_EMPTY
    n_new = L.n + 1
    v_new = L.n
    drop = {(min(int(u), int(v)), max(int(u), int(v))) for u, v in S}
    kept = [tuple(e) for e in L.edges if (int(e[0]), int(e[1])) not in drop]
    added = [(x, v_new) for uv in sorted(drop) for x in uv]
    return Graph.from_edges(n_new, kept + added)


def build_strong_ists(
    fam: MatchingFamily,
    S: Sequence[tuple[int, int]],
    root: int,
    rng: np.random.Generator | None = None,
    debug: bool = False,
) -> RegularBuild:
    """Even-n pipeline on the colored family with S masked out of every
    exploration graph, then literal P1/P2 verification.

    The family (not just its union) is required because the decomposition
    bookkeeping tracks which colors S touches.  A reroute swap that would use
    an S-edge is a P1 failure.
    """
    params = RegularParams(fam.n, fam.d)
    build = RegularBuild(n=fam.n, d=fam.d, k=params.k, root=root)
    build.diagnostics["psi"] = params.psi
    build.diagnostics["beta"] = params.beta
    decomp = decompose_colors(fam)
    L = fam.union()
    build.graph = L
    s_set = {(min(int(u), int(v)), max(int(u), int(v))) for u, v in S}
    s_vertices = {x for e in s_set for x in e}
    if root in s_vertices:
        raise DomainError(f"root {root} lies in V(S)")
    build.diagnostics["s_in_group"] = [
        sum((min(u, v), max(u, v)) in s_set for u, v in g.edges.tolist()) for g in decomp.groups
    ]
    build.diagnostics["s_in_reserve"] = [
        sum((min(u, v), max(u, v)) in s_set for u, v in m.tolist()) for m in decomp.reserve_edges
    ]
    masked = [g.without_edges(s_set) for g in decomp.groups]
    trees = []
    for i, g in enumerate(masked):
        try:
            trees.append(bfs_tree(g, root))
        except Exception:
            build.failure = Failure("BfsTree", f"group {i} minus S does not connect", {"group": i})
            return build
    build.diagnostics["masked_group_diameters"] = [
        int(K.diameter_csr(g.indptr, g.indices)) for g in masked
    ]
    bads = find_bad(trees, root)
    build.diagnostics["bad_count"] = len({r.v for r in bads})
    gate = _unique_anchor_gate(bads)
    if gate is not None:
        build.failure = gate
        return build
    plan = plan_reroute(trees, bads, decomp.reserves)
    build.diagnostics["unsafe_count"] = len(plan.I)
    for (w, ell), z in plan.swaps.items():
        if (min(w, z), max(w, z)) in s_set:
            build.failure = Failure(
                "P1", f"reroute of {w} in tree {ell} would use an S-edge", {"w": w, "ell": ell, "z": z}
            )
            return build
    final = apply_reroute(trees, plan, decomp.reserves)
    report = verify_ist_family(L, root, final)
    if not report.ok:
        data = {"conflicts": len(report.conflicts), "structural": len(report.structural)}
        if debug:
            data["witnesses"] = report.to_json_obj()
        build.failure = Failure("Verification", "family is not an IST family", data)
        return build
    strong = verify_strong(L, root, final, sorted(s_set))
    if not strong.ok:
        if strong.p1_violations:
            build.failure = Failure(
                "P1", "tree edge inside S", {"witnesses": strong.p1_violations[:8]}
            )
        else:
            build.failure = Failure(
                "P2", "root paths from V(S) meet outside the root",
                {"witnesses": strong.p2_violations[:8]},
            )
        return build
    build.trees = final
    return build


def build_ists_regular_odd(
    n: int,
    d: int,
    rng: np.random.Generator,
    root: int | None = None,
    debug: bool = False,
) -> RegularBuild:
    """Odd-n pipeline: strong family on n-1 vertices avoiding a sampled
    induced matching S, then op (delete S, add a vertex on V(S)) and one tree
    extension per distinct S-edge."""
    if n % 2 == 0:
        raise DomainError(f"odd pipeline needs odd n, got {n}")
    if d % 2 != 0 or d < 4:
        raise DomainError(f"need even d >= 4, got {d}")
    params = RegularParams(n - 1, d)
    build = RegularBuild(n=n, d=d, k=params.k, root=root)
    try:
        fam = sample_matching_family(n - 1, d, rng)
    except SamplingFailed as exc:
        build.failure = Failure("Sampling", str(exc))
        return build
    L = fam.union()
    S, flag = sample_induced_matching(L, d // 2, rng)
    if not flag:
        build.failure = Failure("InducedMatching", "sampled edge multiset is not induced", {"S": S})
        return build
    s_vertices = {x for e in S for x in e}
    if root is None:
        pool = np.setdiff1d(np.arange(n - 1), np.fromiter(s_vertices, int))
        root = int(pool[rng.integers(pool.size)])
    elif root in s_vertices:
        raise DomainError(f"root {root} lies in V(S)")
    build.root = root
    strong = build_strong_ists(fam, S, root, rng, debug=debug)
    build.diagnostics.update(strong.diagnostics)
    if not strong.ok:
        build.failure = strong.failure
        return build
    L_n = op_transform(L, S)
    assert L_n is not L_EMPTY
    build.graph = L_n
    v_new = n - 1
    s_sorted = sorted((min(u, v), max(u, v)) for u, v in S)
    final = []
    for i, t in enumerate(strong.trees):
        parent = np.concatenate([t.parent, np.array([s_sorted[i][0]], t.parent.dtype)])
        final.append(RootedTree(root, parent))
    report = verify_ist_family(L_n, root, final)
    if not report.ok:
        data = {"conflicts": len(report.conflicts), "structural": len(report.structural)}
        if debug:
            data["witnesses"] = report.to_json_obj()
        build.failure = Failure("Verification", "extended family is not an IST family", data)
        return build
    build.trees = final
    return build


# ---------------------------------------------------------------------------
# diameter under random edge deletion (3-regular)
# ---------------------------------------------------------------------------

def diameter_thresholds(n: int, d: int, eps: float, constant: float | None = None) -> dict:
    """Two candidate diameter bounds: s from (d-1)^(s-3) >= c*d*n*ln n with
    c defaulting to 16+eps, and the tighter s' from (d-1)^(s'-1) >= (4+eps)*d*n*ln n.
    Natural log throughout."""
    if d < 3:
        raise DomainError(f"need d >= 3, got {d}")
    c = (16.0 + eps) if constant is None else float(constant)
    rhs_statement = c * d * n * math.log(n)
    rhs_proof = (4.0 + eps) * d * n * math.log(n)
    s_statement = 3
    while (d - 1) ** (s_statement - 3) < rhs_statement:
        s_statement += 1
    s_proof = 1
    while (d - 1) ** (s_proof - 1) < rhs_proof:
        s_proof += 1
    return {
        "constant": c,
        "log_base": "e",
        "s_statement": s_statement,
        "s_proof": s_proof,
    }


def diameter_deletion_check(
    n: int,
    d: int,
    eps: float,
    deletions: int,
    trials: int,
    rng: np.random.Generator,
    constant: float | None = None,
    exact: bool = False,
) -> dict:
    """Sample disjoint-matching d-regular graphs, delete `deletions` uniform
    edges, and report the fraction of trials with diameter <= s_statement.

    By default each trial only decides the <= s predicate (early-exit
    eccentricity bounding); `exact` computes full diameters for the report.
    """
    thresholds = diameter_thresholds(n, d, eps, constant)
    s = thresholds["s_statement"]
    verdicts: list[bool] = []
    bounds: list[float] = []
    diameters: list[float] = []
    disconnected = 0
    for _ in range(trials):
        fam = sample_matching_family(n, d, rng)
        g = fam.union()
        if deletions > 0:
            picks = rng.choice(g.m, size=min(deletions, g.m), replace=False)
            drop = [tuple(e) for e in g.edges[np.sort(picks)]]
            g = g.without_edges(drop)
        if exact:
            dd = float(K.diameter_csr(g.indptr, g.indices))
            dd = math.inf if dd < 0 else dd
            diameters.append(dd)
            verdicts.append(dd <= s)
            bounds.append(dd)
            disconnected += not math.isfinite(dd)
        else:
            ok, lb = K.diameter_at_most(g.indptr, g.indices, s)
            verdicts.append(ok)
            bounds.append(math.inf if lb < 0 else float(lb))
            disconnected += lb < 0
    report = {
        "n": n,
        "d": d,
        "eps": eps,
        "deletions": deletions,
        "trials": trials,
        **thresholds,
        "exact": exact,
        "diameter_lower_bounds": bounds,
        "disconnected": disconnected,
        "fraction_le_s": sum(verdicts) / trials if trials else 0.0,
    }
    if exact:
        report["diameters"] = diameters
        report["max_diameter"] = max(diameters) if diameters else None
    return report
