"""Graph/RootedTree core: construction, serialization, BFS, diameter,
connectivity."""
import math

import numpy as np
import pytest

from istlab.errors import DomainError, NotConnected
from istlab.graph_core import (
    Graph,
    RootedTree,
    bfs_tree,
    complete_graph,
    cycle_graph,
    diameter,
    internally_disjoint_paths,
    neighborhood,
    path_graph,
    path_to_root,
    vertex_connectivity,
)
from istlab.random_models import sample_gnp, trial_stream


# ------------------------------ construction ------------------------------

def test_from_edges_basic():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    assert g.n == 4 and g.m == 4
    assert list(g.neighbors(0)) == [1, 3]
    assert g.degree(2) == 2
    assert g.has_edge(0, 3) and g.has_edge(3, 0)
    assert not g.has_edge(0, 2)


def test_from_edges_rejects_bad_input():
    with pytest.raises(DomainError):
        Graph.from_edges(3, [(0, 0)])
    with pytest.raises(DomainError):
        Graph.from_edges(3, [(0, 3)])
    with pytest.raises(DomainError):
        Graph.from_edges(3, [(0, 1), (1, 0)])


def test_builders():
    assert complete_graph(5).m == 10
    assert cycle_graph(6).m == 6
    assert path_graph(4).m == 3
    assert all(complete_graph(6).degrees() == 5)


def test_union_dedupes():
    a = Graph.from_edges(4, [(0, 1), (1, 2)])
    b = Graph.from_edges(4, [(1, 2), (2, 3)])
    u = a.union(b)
    assert u.m == 3
    assert u.has_edge(0, 1) and u.has_edge(2, 3)


def test_without_edges():
    g = cycle_graph(5)
    h = g.without_edges([(0, 1), (1, 0), (2, 3)])
    assert h.m == 3
    assert not h.has_edge(0, 1) and not h.has_edge(2, 3)


# ------------------------------ serialization ------------------------------

def test_text_round_trip():
    g = Graph.from_edges(5, [(0, 1), (0, 4), (2, 3)])
    assert Graph.from_text(g.to_text()) == g


def test_json_round_trip():
    g = cycle_graph(7)
    assert Graph.from_json_obj(g.to_json_obj()) == g
    t = bfs_tree(g, 2)
    t2 = RootedTree.from_json_obj(t.to_json_obj())
    assert t2.root == t.root and np.array_equal(t2.parent, t.parent)


def test_graph_hash_eq():
    assert cycle_graph(5) == cycle_graph(5)
    assert hash(cycle_graph(5)) == hash(cycle_graph(5))
    assert cycle_graph(5) != path_graph(5)


# ------------------------------ BFS ------------------------------

def test_bfs_frozen_c4():
    # C_4 from 0: both neighbors at depth 1, vertex 2 reached via vertex 1
    t = bfs_tree(cycle_graph(4), 0)
    assert t.parent.tolist() == [-1, 0, 1, 0]
    assert t.depths().tolist() == [0, 1, 2, 1]


def test_bfs_disconnected_raises():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    with pytest.raises(NotConnected):
        bfs_tree(g, 0)


def test_bfs_custom_order():
    # reversing the tie-break order flips which neighbor becomes the parent of 2
    t = bfs_tree(cycle_graph(4), 0, order=[3, 2, 1, 0])
    assert t.parent.tolist() == [-1, 0, 3, 0]
    with pytest.raises(DomainError):
        bfs_tree(cycle_graph(4), 0, order=[0, 0, 1, 2])


def _bfs_reference(g: Graph, root: int) -> np.ndarray:
    """Independent textbook BFS used as an oracle for distances."""
    dist = np.full(g.n, -1)
    dist[root] = 0
    frontier = [root]
    while frontier:
        nxt = []
        for v in frontier:
            for w in g.neighbors(v):
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    nxt.append(int(w))
        frontier = nxt
    return dist


def test_bfs_shortest_path_property_bulk():
    # >= 10^3 randomized cases: BFS tree depths equal true graph distances
    cases = 0
    for trial in range(150):
        rng = trial_stream(13, "bfs-prop", trial)
        n = int(rng.integers(5, 40))
        g = sample_gnp(n, 0.25, rng)
        for root in range(min(n, 8)):
            ref = _bfs_reference(g, root)
            if (ref < 0).any():
                continue
            t = bfs_tree(g, root)
            assert np.array_equal(t.depths(), ref)
            # every tree edge is a graph edge
            for v in range(n):
                if v != root:
                    assert g.has_edge(v, int(t.parent[v]))
            cases += 1
    assert cases >= 1000


def test_path_to_root():
    t = bfs_tree(path_graph(5), 0)
    assert path_to_root(t, 4) == [4, 3, 2, 1, 0]
    assert path_to_root(t, 0) == [0]


# ------------------------------ diameter ------------------------------

def test_diameter_frozen():
    assert diameter(complete_graph(4)) == 1
    assert diameter(cycle_graph(6)) == 3
    assert diameter(path_graph(7)) == 6
    assert diameter(Graph.from_edges(4, [(0, 1), (2, 3)])) == math.inf


def _floyd_warshall_diameter(g: Graph) -> float:
    n = g.n
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for u, v in g.edges:
        dist[u, v] = dist[v, u] = 1.0
    for k in range(n):
        dist = np.minimum(dist, dist[:, k : k + 1] + dist[k : k + 1, :])
    return float(dist.max())


def test_diameter_matches_floyd_warshall():
    for trial in range(60):
        rng = trial_stream(17, "diam", trial)
        n = int(rng.integers(4, 50))
        g = sample_gnp(n, float(rng.uniform(0.1, 0.5)), rng)
        assert diameter(g) == _floyd_warshall_diameter(g)


# ------------------------------ connectivity ------------------------------

def test_connectivity_frozen():
    assert vertex_connectivity(complete_graph(5)) == 4
    assert vertex_connectivity(path_graph(3)) == 1
    assert vertex_connectivity(cycle_graph(6)) == 2
    assert internally_disjoint_paths(cycle_graph(6), 0, 3) == 2


def test_neighborhood():
    assert neighborhood(cycle_graph(5), {0, 1}) == {2, 4}
    assert neighborhood(complete_graph(4), {2}) == {0, 1, 3}


def test_subtree_and_children():
    t = bfs_tree(path_graph(5), 0)
    assert sorted(t.subtree(2)) == [2, 3, 4]
    assert t.subtree(4) == [4]
