"""Immutable undirected graphs, rooted BFS trees, paths, diameter, connectivity."""
from __future__ import annotations

import json
import math
from typing import Iterable, Sequence

import numpy as np

from . import _kernels as K
from .errors import DomainError, NotConnected


class Graph:
    """Simple undirected graph on vertices 0..n-1, stored as sorted-adjacency CSR.

    Self-loops and duplicate edges are rejected at construction.  Instances
    are treated as immutable; "mutating" operations return new graphs.
    """

    __slots__ = ("n", "m", "indptr", "indices", "_edges")

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray, m: int):
        self.n = n
        self.m = m
        self.indptr = indptr
        self.indices = indices
        self._edges: np.ndarray | None = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]] | np.ndarray) -> "Graph":
        if n < 1:
            raise DomainError(f"need n >= 1, got {n}")
        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        if e.size == 0:
            e = e.reshape(0, 2)
        if e.ndim != 2 or e.shape[1] != 2:
            raise DomainError("edges must be (m, 2)")
        if e.size and (e.min() < 0 or e.max() >= n):
            raise DomainError("edge endpoint out of range")
        if np.any(e[:, 0] == e[:, 1]):
            raise DomainError("self-loop")
        canon = np.sort(e, axis=1)
        if canon.shape[0] > 1:
            order = np.lexsort((canon[:, 1], canon[:, 0]))
            canon = canon[order]
            dup = np.all(canon[1:] == canon[:-1], axis=1)
            if dup.any():
                raise DomainError("duplicate edge")
        m = canon.shape[0]
        und = np.concatenate([canon, canon[:, ::-1]]) if m else canon
        counts = np.bincount(und[:, 0], minlength=n) if m else np.zeros(n, np.int64)
        indptr = np.zeros(n + 1, np.int64)
        np.cumsum(counts, out=indptr[1:])
        if m:
            order = np.lexsort((und[:, 1], und[:, 0]))
            indices = und[order, 1].astype(np.int32)
        else:
            indices = np.empty(0, np.int32)
        return cls(n, indptr, indices, m)

    # -- queries ------------------------------------------------------------

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        i = np.searchsorted(row, v)
        return bool(i < row.size and row[i] == v)

    @property
    def edges(self) -> np.ndarray:
        """Canonical (m, 2) edge array: u < v, lexicographically sorted."""
        if self._edges is None:
            srcs = np.repeat(np.arange(self.n, dtype=np.int32), np.diff(self.indptr))
            mask = srcs < self.indices
            self._edges = np.column_stack([srcs[mask], self.indices[mask]])
        return self._edges

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.edges}

    # -- derived graphs -----------------------------------------------------

    def without_edges(self, edges: Iterable[Sequence[int]] | np.ndarray) -> "Graph":
        drop = {(min(int(u), int(v)), max(int(u), int(v))) for u, v in np.asarray(list(edges)).reshape(-1, 2)}
        keep = [e for e in self.edges.tolist() if (e[0], e[1]) not in drop]
        return Graph.from_edges(self.n, np.asarray(keep, np.int64).reshape(-1, 2))

    def union(self, other: "Graph") -> "Graph":
        if other.n != self.n:
            raise DomainError("union needs equal vertex counts")
        both = np.concatenate([self.edges, other.edges])
        uniq = np.unique(both, axis=0) if both.size else both
        return Graph.from_edges(self.n, uniq)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and self.m == other.m
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.indptr, other.indptr)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.m, self.indices.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    # -- serialization --------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"{self.n} {self.m}"]
        lines.extend(f"{u} {v}" for u, v in self.edges.tolist())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Graph":
        rows = [r for r in (line.strip() for line in text.splitlines()) if r]
        if not rows:
            raise DomainError("empty graph text")
        try:
            n, m = (int(x) for x in rows[0].split())
        except ValueError as exc:
            raise DomainError(f"bad header {rows[0]!r}") from exc
        if len(rows) - 1 != m:
            raise DomainError(f"header says {m} edges, found {len(rows) - 1}")
        edges = [[int(x) for x in row.split()] for row in rows[1:]]
        return cls.from_edges(n, np.asarray(edges, np.int64).reshape(-1, 2))

    def to_json_obj(self) -> dict:
        return {"n": self.n, "m": self.m, "edges": self.edges.tolist()}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Graph":
        g = cls.from_edges(int(obj["n"]), np.asarray(obj["edges"], np.int64).reshape(-1, 2))
        if "m" in obj and int(obj["m"]) != g.m:
            raise DomainError("edge count mismatch in JSON graph")
        return g

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), separators=(",", ":"))


def complete_graph(n: int) -> Graph:
    u, v = np.triu_indices(n, k=1)
    return Graph.from_edges(n, np.column_stack([u, v]))


def cycle_graph(n: int) -> Graph:
    edges = [(i, (i + 1) % n) for i in range(n)]
    return Graph.from_edges(n, edges)


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


class RootedTree:
    """Spanning arborescence given as a parent map; parent[root] == -1.

    `order` records the vertex ordering the BFS used (None = natural order).
    """

    __slots__ = ("root", "parent", "order", "_depths")

    def __init__(self, root: int, parent: np.ndarray, order: np.ndarray | None = None):
        self.root = int(root)
        self.parent = np.asarray(parent, np.int32)
        self.order = None if order is None else np.asarray(order, np.int32)
        self._depths: np.ndarray | None = None

    @property
    def n(self) -> int:
        return int(self.parent.shape[0])

    def depths(self) -> np.ndarray:
        """Depth of every vertex (root = 0); requires a valid tree."""
        if self._depths is None:
            n = self.n
            depth = np.full(n, -1, np.int32)
            depth[self.root] = 0
            for v in range(n):
                if depth[v] >= 0:
                    continue
                chain = []
                u = v
                while u >= 0 and depth[u] < 0 and len(chain) <= n:
                    chain.append(u)
                    u = int(self.parent[u])
                if u < 0 or depth[u] < 0:
                    raise NotConnected(f"vertex {v} does not reach the root")
                d = depth[u]
                for w in reversed(chain):
                    d += 1
                    depth[w] = d
            self._depths = depth
        return self._depths

    def children_lists(self) -> list[list[int]]:
        kids: list[list[int]] = [[] for _ in range(self.n)]
        for v in range(self.n):
            p = int(self.parent[v])
            if p >= 0:
                kids[p].append(v)
        return kids

    def subtree(self, v: int) -> list[int]:
        """Vertices of the subtree rooted at v (v included), preorder."""
        kids = self.children_lists()
        out = []
        stack = [v]
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(reversed(kids[u]))
        return out

    def copy(self) -> "RootedTree":
        return RootedTree(self.root, self.parent.copy(), self.order)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, RootedTree)
            and self.root == other.root
            and np.array_equal(self.parent, other.parent)
        )

    def __hash__(self) -> int:
        return hash((self.root, self.parent.tobytes()))

    def __repr__(self) -> str:
        return f"RootedTree(n={self.n}, root={self.root})"

    def to_json_obj(self) -> dict:
        return {"root": self.root, "parent": self.parent.tolist()}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "RootedTree":
        return cls(int(obj["root"]), np.asarray(obj["parent"], np.int32))


def bfs_tree(graph: Graph, root: int, order: Sequence[int] | np.ndarray | None = None) -> RootedTree:
    """Deterministic BFS spanning tree.

    Neighbor iteration and queue ties follow `order` (a permutation of the
    vertices; natural ascending order when None).  Raises NotConnected when
    the root does not reach every vertex.
    """
    if not 0 <= root < graph.n:
        raise DomainError(f"root {root} out of range")
    if order is None:
        parent, _, visited = K.bfs_parents(graph.indptr, graph.indices, root)
        if visited < graph.n:
            raise NotConnected(f"BFS from {root} reached {visited} of {graph.n} vertices")
        return RootedTree(root, parent)
    rank = np.empty(graph.n, np.int64)
    order_arr = np.asarray(order, np.int64)
    if order_arr.shape != (graph.n,) or not np.array_equal(np.sort(order_arr), np.arange(graph.n)):
        raise DomainError("order must be a permutation of the vertices")
    rank[order_arr] = np.arange(graph.n)
    # relabel by rank, BFS in natural order there, map back
    relabeled = Graph.from_edges(graph.n, rank[graph.edges])
    parent_rel, _, visited = K.bfs_parents(relabeled.indptr, relabeled.indices, int(rank[root]))
    if visited < graph.n:
        raise NotConnected(f"BFS from {root} reached {visited} of {graph.n} vertices")
    parent = np.full(graph.n, -1, np.int32)
    for v in range(graph.n):
        pr = parent_rel[rank[v]]
        parent[v] = -1 if pr < 0 else order_arr[pr]
    return RootedTree(root, parent, order_arr)


def path_to_root(tree: RootedTree, v: int) -> list[int]:
    """Vertex sequence [v, ..., root] along parent links."""
    if not 0 <= v < tree.n:
        raise DomainError(f"vertex {v} out of range")
    path = [v]
    u = v
    steps = 0
    while u != tree.root:
        u = int(tree.parent[u])
        steps += 1
        if u < 0 or steps > tree.n:
            raise NotConnected(f"vertex {v} does not reach the root")
        path.append(u)
    return path


def diameter(graph: Graph) -> int | float:
    """Exact diameter; math.inf when the graph is disconnected."""
    d = K.diameter_csr(graph.indptr, graph.indices)
    return math.inf if d < 0 else int(d)


def neighborhood(graph: Graph, S: Iterable[int]) -> set[int]:
    """External neighborhood N(S): neighbors of S outside S."""
    s = set(int(v) for v in S)
    out: set[int] = set()
    for v in s:
        out.update(int(w) for w in graph.neighbors(v))
    return out - s


def _max_flow_unit(adj_out: list[list[int]], s: int, t: int, node_count: int) -> int:
    """Unit-capacity max flow via repeated BFS augmentation (edges as pairs)."""
    # adjacency with residual flags: edge list (to, cap, rev_index)
    graph: list[list[list[int]]] = [[] for _ in range(node_count)]

    def add(u: int, v: int, cap: int) -> None:
        graph[u].append([v, cap, len(graph[v])])
        graph[v].append([u, 0, len(graph[u]) - 1])

    for u, vs in enumerate(adj_out):
        for v in vs:
            add(u, v, 1)
    flow = 0
    while True:
        prev_edge: list[tuple[int, int] | None] = [None] * node_count
        prev_edge[s] = (s, -1)
        queue = [s]
        qi = 0
        while qi < len(queue) and prev_edge[t] is None:
            u = queue[qi]
            qi += 1
            for ei, (v, cap, _) in enumerate(graph[u]):
                if cap > 0 and prev_edge[v] is None:
                    prev_edge[v] = (u, ei)
                    queue.append(v)
        if prev_edge[t] is None:
            return flow
        v = t
        while v != s:
            u, ei = prev_edge[v]  # type: ignore[misc]
            graph[u][ei][1] -= 1
            rev = graph[u][ei][2]
            graph[v][rev][1] += 1
            v = u
        flow += 1


def internally_disjoint_paths(graph: Graph, u: int, v: int) -> int:
    """Maximum number of internally vertex-disjoint u-v paths (Menger)."""
    if u == v:
        raise DomainError("u == v")
    n = graph.n
    # split w -> (w_in = 2w, w_out = 2w+1), unit capacity on in->out.
    # Source u_out, sink v_in: the terminals' own split edges never lie on an
    # augmenting path, so only internal vertices are capacitated.
    adj: list[list[int]] = [[] for _ in range(2 * n)]
    for w in range(n):
        adj[2 * w].append(2 * w + 1)
    for a, b in graph.edges.tolist():
        adj[2 * a + 1].append(2 * b)
        adj[2 * b + 1].append(2 * a)
    return _max_flow_unit(adj, 2 * u + 1, 2 * v, 2 * n)


def vertex_connectivity(graph: Graph) -> int:
    """Exact vertex connectivity: min vertex cut over all non-adjacent pairs.

    Complete graphs return n-1 by convention; disconnected graphs return 0.
    Intended for small instances (max-flow per pair).
    """
    n = graph.n
    if n == 1:
        return 0
    best = n - 1
    found_pair = False
    for u in range(n):
        row = set(int(x) for x in graph.neighbors(u))
        for v in range(u + 1, n):
            if v in row:
                continue
            found_pair = True
            best = min(best, internally_disjoint_paths(graph, u, v))
            if best == 0:
                return 0
    if not found_pair:
        return n - 1
    return best
