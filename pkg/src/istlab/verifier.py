"""Exact certification of the IST property, strong-IST constraints (P1/P2),
and a brute-force maximum-family oracle for tiny instances."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels as K
from .errors import DomainError, TooLarge
from .graph_core import Graph, RootedTree, internally_disjoint_paths, path_to_root

STRUCTURAL_REASONS = ("NotSpanning", "NotATree", "EdgeNotInGraph", "WrongRoot")


def verify_spanning_tree(graph: Graph, tree: RootedTree) -> str | None:
    """None when tree is a spanning arborescence of graph; else the first
    structural reason found (WrongRoot, NotSpanning, EdgeNotInGraph, NotATree)."""
    n = graph.n
    if tree.n != n or not 0 <= tree.root < n or tree.parent[tree.root] != -1:
        return "WrongRoot"
    for v in range(n):
        if v != tree.root and tree.parent[v] < 0:
            return "NotSpanning"
    if np.any(tree.parent >= n):
        return "NotSpanning"
    for v in range(n):
        p = int(tree.parent[v])
        if p >= 0 and not graph.has_edge(v, p):
            return "EdgeNotInGraph"
    # cycle check: chase with memoized "reaches root" marks
    state = np.zeros(n, np.int8)  # 0 unknown, 1 reaches root, 2 in progress
    state[tree.root] = 1
    for v in range(n):
        if state[v]:
            continue
        chain = []
        u = v
        while state[u] == 0:
            state[u] = 2
            chain.append(u)
            u = int(tree.parent[u])
        if state[u] == 2:
            return "NotATree"
        for w in chain:
            state[w] = 1
    return None


@dataclass
class IstReport:
    """Verdict of verify_ist_family; ok iff both lists are empty."""

    conflicts: list[tuple[int, int, int, int]] = field(default_factory=list)
    structural: list[tuple[int, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.conflicts and not self.structural

    def to_json_obj(self) -> dict:
        return {
            "ok": self.ok,
            "conflicts": [list(c) for c in self.conflicts],
            "structural": [[i, r] for i, r in self.structural],
        }


def _exhaustive_conflicts(
    trees: Sequence[tuple[int, RootedTree]], root: int, n: int
) -> list[tuple[int, int, int, int]]:
    conflicts: list[tuple[int, int, int, int]] = []
    for v in range(n):
        if v == root:
            continue
        buckets: dict[int, list[int]] = {}
        for idx, tree in trees:
            u = int(tree.parent[v])
            while u != root:
                buckets.setdefault(u, []).append(idx)
                u = int(tree.parent[u])
        for u, owners in buckets.items():
            if len(owners) >= 2:
                for a in range(len(owners)):
                    for b in range(a + 1, len(owners)):
                        conflicts.append((v, owners[a], owners[b], u))
    conflicts.sort()
    return conflicts


def verify_ist_family(graph: Graph, root: int, trees: Sequence[RootedTree]) -> IstReport:
    """Checks every tree structurally, then reports every pair of trees whose
    root paths from some vertex share an internal vertex (exhaustively)."""
    report = IstReport()
    valid: list[tuple[int, RootedTree]] = []
    for idx, tree in enumerate(trees):
        # kernel fast path; the slow scan only runs to name the reason
        if (
            tree.n == graph.n
            and tree.root == root
            and K.tree_check(tree.parent, tree.root, graph.indptr, graph.indices) == 0
        ):
            valid.append((idx, tree))
            continue
        reason = verify_spanning_tree(graph, tree)
        if reason is None and tree.root != root:
            reason = "WrongRoot"
        assert reason is not None
        report.structural.append((idx, reason))
    if len(valid) >= 2:
        parents = np.stack([t.parent for _, t in valid])
        count, _ = K.conflict_scan(parents, root)
        if count != 0:
            report.conflicts = _exhaustive_conflicts(valid, root, graph.n)
    return report


def verify_ist_family_quadratic(graph: Graph, root: int, trees: Sequence[RootedTree]) -> IstReport:
    """Independent slow implementation (explicit path lists, nested pair loops)
    used as a redundancy cross-check of verify_ist_family in the tests."""
    report = IstReport()
    valid: list[tuple[int, RootedTree]] = []
    for idx, tree in enumerate(trees):
        reason = verify_spanning_tree(graph, tree)
        if reason is None and tree.root != root:
            reason = "WrongRoot"
        if reason is not None:
            report.structural.append((idx, reason))
        else:
            valid.append((idx, tree))
    conflicts = []
    for v in range(graph.n):
        if v == root:
            continue
        paths = [(idx, path_to_root(t, v)) for idx, t in valid]
        for a in range(len(paths)):
            for b in range(a + 1, len(paths)):
                ia, pa = paths[a]
                ib, pb = paths[b]
                shared = set(pa[1:-1]) & set(pb[1:-1])
                for u in sorted(shared):
                    conflicts.append((v, ia, ib, u))
    conflicts.sort()
    report.conflicts = conflicts
    return report


@dataclass
class StrongReport:
    """P1/P2 verdict for strong IST families with respect to a matching S."""

    p1_violations: list[tuple[int, int, int]] = field(default_factory=list)
    p2_violations: list[tuple[int, int, int, int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.p1_violations and not self.p2_violations

    def to_json_obj(self) -> dict:
        return {
            "ok": self.ok,
            "p1_violations": [list(x) for x in self.p1_violations],
            "p2_violations": [list(x) for x in self.p2_violations],
        }


def verify_strong(
    graph: Graph, root: int, trees: Sequence[RootedTree], S: Iterable[Sequence[int]]
) -> StrongReport:
    """P1: no tree edge lies in S.  P2: for all v, w in V(S) and trees i != j,
    V(P_i(v)) cap V(P_j(w)) equals {v, root} when w == v and {root} otherwise."""
    s_edges = {(min(int(u), int(v)), max(int(u), int(v))) for u, v in S}
    s_vertices = sorted({x for e in s_edges for x in e})
    if root in s_vertices:
        raise DomainError("root must not lie in V(S)")
    report = StrongReport()
    for idx, tree in enumerate(trees):
        for v in range(tree.n):
            p = int(tree.parent[v])
            if p >= 0 and (min(v, p), max(v, p)) in s_edges:
                report.p1_violations.append((idx, min(v, p), max(v, p)))
    k = len(trees)
    seen: set[tuple[int, int, int, int, int]] = set()
    for v in s_vertices:
        for w in s_vertices:
            for i in range(k):
                for j in range(k):
                    if i == j:
                        continue
                    pv = set(path_to_root(trees[i], v))
                    pw = set(path_to_root(trees[j], w))
                    allowed = {v, root} if v == w else {root}
                    for u in sorted((pv & pw) - allowed):
                        key = min((v, w, i, j), (w, v, j, i))
                        item = (*key, u)
                        if item not in seen:
                            seen.add(item)
                            report.p2_violations.append(item)
    report.p1_violations.sort()
    report.p2_violations.sort()
    return report


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

def _enumerate_spanning_trees(graph: Graph, cap: int) -> list[tuple[int, ...]]:
    """All spanning trees as tuples of edge indices; TooLarge beyond cap."""
    n = graph.n
    edges = [tuple(e) for e in graph.edges.tolist()]
    m = len(edges)
    if n == 1:
        return [()]
    parent_uf = list(range(n))

    def find(x: int) -> int:
        while parent_uf[x] != x:
            x = parent_uf[x]
        return x

    trees: list[tuple[int, ...]] = []
    chosen: list[int] = []

    def feasible(idx: int) -> bool:
        # can the remaining edges still connect the current components?
        roots = [find(x) for x in range(n)]
        tmp = {r: r for r in roots}

        def tfind(x: int) -> int:
            while tmp[x] != x:
                x = tmp[x]
            return x

        comps = len(set(roots))
        for u, v in edges[idx:]:
            ru, rv = tfind(roots[u]), tfind(roots[v])
            if ru != rv:
                tmp[ru] = rv
                comps -= 1
                if comps == 1:
                    return True
        return comps == 1

    def rec(idx: int) -> None:
        if len(chosen) == n - 1:
            trees.append(tuple(chosen))
            if len(trees) > cap:
                raise TooLarge(f"more than {cap} spanning trees")
            return
        if idx == m or m - idx < n - 1 - len(chosen):
            return
        u, v = edges[idx]
        ru, rv = find(u), find(v)
        if ru != rv:
            parent_uf[ru] = rv
            chosen.append(idx)
            rec(idx + 1)
            chosen.pop()
            parent_uf[ru] = ru
        if feasible(idx + 1):
            rec(idx + 1)

    rec(0)
    return trees


def _orient_to_root(n: int, edge_list: list[tuple[int, int]], root: int) -> np.ndarray:
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edge_list:
        adj[u].append(v)
        adj[v].append(u)
    parent = np.full(n, -1, np.int32)
    seen = [False] * n
    seen[root] = True
    queue = [root]
    qi = 0
    while qi < len(queue):
        x = queue[qi]
        qi += 1
        for y in sorted(adj[x]):
            if not seen[y]:
                seen[y] = True
                parent[y] = x
                queue.append(y)
    return parent


def _internal_masks(parent: np.ndarray, root: int) -> np.ndarray:
    """uint16 bitmask per vertex: internal vertices of its root path."""
    n = parent.shape[0]
    masks = np.zeros(n, np.uint16)
    for v in range(n):
        if v == root:
            continue
        bits = 0
        u = int(parent[v])
        while u != root:
            bits |= 1 << u
            u = int(parent[u])
        masks[v] = bits
    return masks


def brute_force_max_ists(
    graph: Graph, root: int, k: int, tree_cap: int = 200_000
) -> tuple[bool, list[RootedTree] | None]:
    """Exact answer to "does graph admit k ISTs rooted at root?" for n <= 9.

    Enumerates all spanning trees and searches for k pairwise-compatible ones
    (compatible = no vertex whose two root paths share an internal vertex).
    Raises TooLarge when n > 9 or the spanning-tree count exceeds tree_cap.
    """
    n = graph.n
    if n > 9:
        raise TooLarge(f"oracle capped at n <= 9, got {n}")
    if not 0 <= root < n:
        raise DomainError(f"root {root} out of range")
    if k <= 0:
        return True, []
    # Menger necessity: a family of size k gives k internally disjoint
    # v-root paths for every v, so k exceeding the bound is impossible.
    bound = n - 1
    for v in range(n):
        if v != root:
            bound = min(bound, internally_disjoint_paths(graph, v, root))
    if k > bound:
        return False, None
    edge_tuples = [tuple(e) for e in graph.edges.tolist()]
    tree_sets = _enumerate_spanning_trees(graph, tree_cap)
    if not tree_sets:
        return False, None
    parents = [
        _orient_to_root(n, [edge_tuples[i] for i in idxs], root) for idxs in tree_sets
    ]
    masks = np.stack([_internal_masks(p, root) for p in parents])
    chosen = _search_family(masks, k)
    if chosen is None:
        return False, None
    return True, [RootedTree(root, parents[t]) for t in chosen]


def max_ist_count(graph: Graph, root: int, tree_cap: int = 200_000) -> int:
    """Largest k with brute_force_max_ists(graph, root, k) true (oracle helper)."""
    k = 0
    while True:
        exists, _ = brute_force_max_ists(graph, root, k + 1, tree_cap=tree_cap)
        if not exists:
            return k
        k += 1


def _search_family(masks: np.ndarray, k: int) -> list[int] | None:
    """Find k pairwise-compatible rows of masks (shallow trees first)."""
    T = masks.shape[0]
    if k == 1:
        return [0]
    weight = (masks != 0).sum(axis=1)
    order = np.argsort(weight, kind="stable")
    M = masks[order]

    cache: dict[int, np.ndarray] = {}

    def compat_row(t: int) -> np.ndarray:
        row = cache.get(t)
        if row is None:
            row = np.all((M & M[t]) == 0, axis=1)
            cache[t] = row
        return row

    chosen: list[int] = []

    def extend(cand: np.ndarray, start: int) -> bool:
        if len(chosen) == k:
            return True
        idxs = np.nonzero(cand[start:])[0] + start
        if idxs.size < k - len(chosen):
            return False
        for t in idxs:
            t = int(t)
            chosen.append(t)
            if extend(cand & compat_row(t), t + 1):
                return True
            chosen.pop()
        return False

    if extend(np.ones(T, bool), 0):
        return [int(order[t]) for t in chosen]
    return None
