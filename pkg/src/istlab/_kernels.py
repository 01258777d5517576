"""Hot numeric kernels: CSR BFS, eccentricities, bipartite matching, conflict scan.

Each kernel exists twice: a scalar implementation compiled with numba's @njit,
and a pure NumPy fallback with bit-identical outputs.  Set ISTLAB_NO_NUMBA=1
to force the fallback path; `USING_NUMBA` reports which path is active.
The module-level names (`bfs_parents`, `ecc_from`, `all_eccentricities`,
`kuhn_match`, `conflict_scan`) always point at the selected implementation.
"""
from __future__ import annotations

import os

import numpy as np

_FORCE_OFF = os.environ.get("ISTLAB_NO_NUMBA", "0") not in ("", "0")

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency, but stay importable
    HAS_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


USING_NUMBA = HAS_NUMBA and not _FORCE_OFF


# ---------------------------------------------------------------------------
# BFS: parents + distances from a root, FIFO queue, ascending-neighbor ties
# ---------------------------------------------------------------------------

def _bfs_scalar(indptr, indices, root):
    n = indptr.shape[0] - 1
    parent = np.full(n, -1, np.int32)
    dist = np.full(n, -1, np.int32)
    queue = np.empty(n, np.int32)
    queue[0] = root
    dist[root] = 0
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        for ptr in range(indptr[u], indptr[u + 1]):
            w = indices[ptr]
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                parent[w] = u
                queue[tail] = w
                tail += 1
    return parent, dist, tail


def _bfs_vectorized(indptr, indices, root):
    # frontier-at-a-time BFS; parent of w = first frontier vertex (in queue
    # order) adjacent to w, which matches the scalar kernel exactly.
    n = indptr.shape[0] - 1
    parent = np.full(n, -1, np.int32)
    dist = np.full(n, -1, np.int32)
    dist[root] = 0
    frontier = np.array([root], np.int64)
    visited = 1
    depth = 0
    while frontier.size:
        depth += 1
        starts = indptr[frontier]
        counts = indptr[frontier + 1] - starts
        total = int(counts.sum())
        if total == 0:
            break
        reps = np.repeat(np.arange(frontier.size), counts)
        base = np.concatenate(([0], np.cumsum(counts)[:-1]))
        pos = starts[reps] + (np.arange(total) - base[reps])
        nbrs = indices[pos].astype(np.int64)
        srcs = frontier[reps]
        fresh = dist[nbrs] < 0
        nbrs = nbrs[fresh]
        srcs = srcs[fresh]
        uniq, first = np.unique(nbrs, return_index=True)
        parent[uniq] = srcs[first].astype(np.int32)
        dist[uniq] = depth
        visited += uniq.size
        frontier = uniq[np.argsort(first, kind="stable")]
    return parent, dist, visited


_bfs_nb = njit(cache=True, nogil=True)(_bfs_scalar)


# ---------------------------------------------------------------------------
# Eccentricity sweeps (building blocks of the exact diameter routine)
# ---------------------------------------------------------------------------

def _ecc_scalar(indptr, indices, src):
    """(farthest vertex, its distance, visited count) via one BFS.

    Ties on the distance go to the lowest vertex index."""
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, np.int32)
    queue = np.empty(n, np.int32)
    queue[0] = src
    dist[src] = 0
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u]
        for ptr in range(indptr[u], indptr[u + 1]):
            w = indices[ptr]
            if dist[w] < 0:
                dist[w] = du + 1
                queue[tail] = w
                tail += 1
    far_v = 0
    far_d = np.int32(-2)
    for v in range(n):
        if dist[v] > far_d:
            far_d = dist[v]
            far_v = v
    return far_v, far_d, tail


def _ecc_vectorized(indptr, indices, src):
    _, dist, visited = _bfs_vectorized(indptr, indices, src)
    far_d = int(dist.max())
    far_v = int(np.argmax(dist))
    return far_v, far_d, visited


_ecc_nb = njit(cache=True, nogil=True)(_ecc_scalar)


def _all_ecc_scalar(indptr, indices):
    """Max eccentricity over all sources; -1 when disconnected. Brute force."""
    n = indptr.shape[0] - 1
    dist = np.empty(n, np.int32)
    queue = np.empty(n, np.int32)
    worst = 0
    for s in range(n):
        for i in range(n):
            dist[i] = -1
        queue[0] = s
        dist[s] = 0
        head = 0
        tail = 1
        far = 0
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[u]
            if du > far:
                far = du
            for ptr in range(indptr[u], indptr[u + 1]):
                w = indices[ptr]
                if dist[w] < 0:
                    dist[w] = du + 1
                    queue[tail] = w
                    tail += 1
        if tail < n:
            return -1
        if far > worst:
            worst = far
    return worst


def _all_ecc_vectorized(indptr, indices):
    n = indptr.shape[0] - 1
    worst = 0
    for s in range(n):
        _, far_d, visited = _ecc_vectorized(indptr, indices, s)
        if visited < n:
            return -1
        worst = max(worst, far_d)
    return worst


_all_ecc_nb = njit(cache=True, nogil=True)(_all_ecc_scalar)


# ---------------------------------------------------------------------------
# Kuhn's augmenting-path bipartite matching (iterative, deterministic)
# ---------------------------------------------------------------------------

def _kuhn_impl(indptr, indices, n_left, n_right):
    match_l = np.full(n_left, -1, np.int32)
    match_r = np.full(n_right, -1, np.int32)
    # greedy seeding: grabs most rows up front, leaving few augmenting runs
    for u in range(n_left):
        for p in range(indptr[u], indptr[u + 1]):
            v = indices[p]
            if match_r[v] < 0:
                match_r[v] = u
                match_l[u] = v
                break
    vis = np.full(n_right, -1, np.int64)
    stack_u = np.empty(n_left + 1, np.int32)
    stack_p = np.empty(n_left + 1, np.int64)
    stack_v = np.empty(n_left + 1, np.int32)
    for start in range(n_left):
        if match_l[start] >= 0:
            continue
        top = 0
        stack_u[0] = start
        stack_p[0] = indptr[start]
        found = False
        while top >= 0:
            u = stack_u[top]
            p = stack_p[top]
            advanced = False
            while p < indptr[u + 1]:
                v = indices[p]
                p += 1
                if vis[v] != start:
                    vis[v] = start
                    w = match_r[v]
                    if w < 0:
                        stack_v[top] = v
                        found = True
                        advanced = True
                        break
                    stack_p[top] = p
                    stack_v[top] = v
                    top += 1
                    stack_u[top] = w
                    stack_p[top] = indptr[w]
                    advanced = True
                    break
            if found:
                break
            if not advanced:
                top -= 1
        if found:
            for t in range(top, -1, -1):
                match_r[stack_v[t]] = stack_u[t]
                match_l[stack_u[t]] = stack_v[t]
    return match_l


_kuhn_nb = njit(cache=True, nogil=True)(_kuhn_impl)
_kuhn_py = _kuhn_impl


# ---------------------------------------------------------------------------
# spanning-tree structure check (fast path; reasons resolved in Python)
# ---------------------------------------------------------------------------

def _tree_check_impl(parent, root, indptr, indices):
    """0 ok, 1 root has a parent, 2 parent out of range or self,
    3 parent edge missing from the graph, 4 cycle or unreachable vertex."""
    n = parent.shape[0]
    if parent[root] != -1:
        return 1
    for v in range(n):
        if v == root:
            continue
        pv = parent[v]
        if pv < 0 or pv >= n or pv == v:
            return 2
        lo = indptr[v]
        hi = indptr[v + 1]
        found = False
        while lo < hi:
            mid = (lo + hi) // 2
            w = indices[mid]
            if w == pv:
                found = True
                break
            if w < pv:
                lo = mid + 1
            else:
                hi = mid
        if not found:
            return 3
    state = np.zeros(n, np.uint8)
    state[root] = 1
    for v in range(n):
        u = v
        steps = 0
        while state[u] == 0 and steps <= n:
            u = parent[u]
            steps += 1
        if state[u] != 1 or steps > n:
            return 4
        u = v
        while state[u] == 0:
            state[u] = 1
            u = parent[u]
    return 0


_tree_check_nb = njit(cache=True, nogil=True)(_tree_check_impl)
_tree_check_py = _tree_check_impl


# ---------------------------------------------------------------------------
# IST conflict scan: shared internal vertices across root paths
# ---------------------------------------------------------------------------

def _conflict_impl(parents, root, cap):
    """Count (v, tree) root-path collisions; parents is int32 [k, n].

    Returns (count, witness array [:, 4] of (v, first_tree, second_tree, u)).
    count == -2 flags a broken parent structure (cycle / lost root).
    Detection is exact (count > 0 iff some conflict exists); the listing is
    capped, callers wanting the exhaustive list re-scan in Python.
    """
    k = parents.shape[0]
    n = parents.shape[1]
    stamp = np.full(n, -1, np.int64)
    owner = np.full(n, -1, np.int32)
    wit = np.empty((cap, 4), np.int32)
    count = 0
    wcount = 0
    for v in range(n):
        if v == root:
            continue
        for i in range(k):
            u = parents[i, v]
            steps = 0
            while u != root:
                if u < 0 or steps > n:
                    return -2, wit[:wcount]
                if stamp[u] == v:
                    if owner[u] != i:
                        count += 1
                        if wcount < cap:
                            wit[wcount, 0] = v
                            wit[wcount, 1] = owner[u]
                            wit[wcount, 2] = i
                            wit[wcount, 3] = u
                            wcount += 1
                else:
                    stamp[u] = v
                    owner[u] = i
                u = parents[i, u]
                steps += 1
    return count, wit[:wcount]


_conflict_nb = njit(cache=True, nogil=True)(_conflict_impl)
_conflict_py = _conflict_impl


# ---------------------------------------------------------------------------
# public, path-selected entry points
# ---------------------------------------------------------------------------

if USING_NUMBA:
    bfs_parents = _bfs_nb
    ecc_from = _ecc_nb
    all_eccentricities = _all_ecc_nb
    kuhn_match = _kuhn_nb
    tree_check = _tree_check_nb
    _conflict = _conflict_nb
else:
    bfs_parents = _bfs_vectorized
    ecc_from = _ecc_vectorized
    all_eccentricities = _all_ecc_vectorized
    kuhn_match = _kuhn_py
    tree_check = _tree_check_py
    _conflict = _conflict_py


def conflict_scan(parents: np.ndarray, root: int, cap: int = 1024):
    return _conflict(np.ascontiguousarray(parents, np.int32), root, cap)


def diameter_csr(indptr: np.ndarray, indices: np.ndarray) -> int:
    """Exact diameter via the iFUB bounding scheme; -1 when disconnected.

    Double sweep finds a far pair (a, b); BFS from the midpoint of the a-b
    path orders vertices by level.  Processing levels downward, once the next
    level l satisfies 2*l <= lb every unprocessed pair is within lb through
    the midpoint, so lb is the exact diameter.  Worst case n BFS runs, but on
    small-world graphs only a handful of fringe vertices get scanned.
    """
    n = indptr.shape[0] - 1
    if n <= 1:
        return 0
    parent0, dist0, visited = bfs_parents(indptr, indices, 0)
    if visited < n:
        return -1
    a = int(np.argmax(dist0))
    parent_a, dist_a, _ = bfs_parents(indptr, indices, a)
    b = int(np.argmax(dist_a))
    ecc_a = int(dist_a[b])
    mid = b
    for _ in range(ecc_a // 2):
        mid = int(parent_a[mid])
    _, dist_mid, _ = bfs_parents(indptr, indices, mid)
    lb = max(ecc_a, int(dist_mid.max()))
    order = np.argsort(-dist_mid, kind="stable")
    for v in order:
        if 2 * int(dist_mid[v]) <= lb:
            break
        _, ecc_v, _ = ecc_from(indptr, indices, int(v))
        if int(ecc_v) > lb:
            lb = int(ecc_v)
    return lb


def diameter_at_most(indptr: np.ndarray, indices: np.ndarray, bound: int) -> tuple[bool, int]:
    """Decide diameter <= bound without computing it exactly.

    Returns (verdict, best lower bound seen).  Same level-descending scheme as
    diameter_csr, but stops early once the verdict is forced: any eccentricity
    above `bound` settles False; once the unprocessed levels can only realize
    distances <= bound (2*level <= bound) and no processed eccentricity
    exceeded it, the verdict is True.  Disconnected graphs report False.
    """
    n = indptr.shape[0] - 1
    if n <= 1:
        return (0 <= bound), 0
    parent0, dist0, visited = bfs_parents(indptr, indices, 0)
    if visited < n:
        return False, -1
    a = int(np.argmax(dist0))
    parent_a, dist_a, _ = bfs_parents(indptr, indices, a)
    b = int(np.argmax(dist_a))
    ecc_a = int(dist_a[b])
    lb = ecc_a
    if lb > bound:
        return False, lb
    mid = b
    for _ in range(ecc_a // 2):
        mid = int(parent_a[mid])
    _, dist_mid, _ = bfs_parents(indptr, indices, mid)
    lb = max(lb, int(dist_mid.max()))
    if lb > bound:
        return False, lb
    order = np.argsort(-dist_mid, kind="stable")
    for v in order:
        level = int(dist_mid[v])
        if 2 * level <= lb or 2 * level <= bound:
            break
        _, ecc_v, _ = ecc_from(indptr, indices, int(v))
        lb = max(lb, int(ecc_v))
        if lb > bound:
            return False, lb
    return True, lb


def warmup() -> None:
    """Trigger JIT compilation on tiny inputs (no-op on the fallback path)."""
    indptr = np.array([0, 1, 3, 4], np.int64)
    indices = np.array([1, 0, 2, 1], np.int32)
    bfs_parents(indptr, indices, 0)
    ecc_from(indptr, indices, 0)
    all_eccentricities(indptr, indices)
    kuhn_match(np.array([0, 1], np.int64), np.array([0], np.int32), 1, 1)
    tree_check(np.array([-1, 0, 1], np.int32), 0, indptr, indices)
    conflict_scan(np.array([[-1, 0]], np.int32), 0)
