"""Seeded samplers: G(n,p), the sprinkling split, disjoint perfect matchings,
random overlays of unlabeled skeletons, and uniform random regular graphs."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, SamplingFailed
from .graph_core import Graph


def ceil_exact(x: float) -> int:
    """Ceiling that forgives float noise within 1e-9 of an integer."""
    r = round(x)
    if abs(x - r) < 1e-9:
        return int(r)
    return int(math.ceil(x))


def trial_stream(seed_base: int, *indices: int) -> np.random.Generator:
    """Independent Philox stream keyed by SHA-256(seed base, indices).

    Adding grid cells or trials never perturbs other streams: the key
    depends only on the identifying tuple, not on enumeration order.
    """
    material = "|".join(str(x) for x in (seed_base, *indices))
    digest = hashlib.sha256(material.encode("ascii")).digest()
    key = np.frombuffer(digest[:16], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


# ---------------------------------------------------------------------------
# G(n,p) and the sprinkling split
# ---------------------------------------------------------------------------

def sprinkle_split(p: float, eps: float) -> tuple[float, float]:
    """Split p into (p1, p2) with (1-p1)(1-p2) = 1-p and p1 = 0.01*eps^2*p scaled.

    p1 = 0.01 eps^2 p / (1 - p + 0.01 eps^2 p),  p2 = (1 - 0.01 eps^2) p.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"need p in (0,1), got {p}")
    if not 0.0 < eps < 0.5:
        raise DomainError(f"need eps in (0,1/2), got {eps}")
    a = 0.01 * eps * eps * p
    p1 = a / (1.0 - p + a)
    p2 = (1.0 - 0.01 * eps * eps) * p
    return p1, p2


@dataclass(frozen=True)
class GnpParams:
    """Parameters of one sprinkled G(n,p) build."""

    n: int
    p: float
    eps: float
    p1: float
    p2: float

    @classmethod
    def create(cls, n: int, p: float, eps: float) -> "GnpParams":
        if n < 2:
            raise DomainError(f"need n >= 2, got {n}")
        p1, p2 = sprinkle_split(p, eps)
        return cls(n=n, p=p, eps=eps, p1=p1, p2=p2)

    @property
    def k(self) -> int:
        return ceil_exact((1.0 - self.eps) * self.n * self.p)


def sample_gnp(n: int, p: float, rng: np.random.Generator) -> Graph:
    """G(n,p): every pair kept independently with probability p."""
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"need p in [0,1], got {p}")
    if p == 0.0 or n == 1:
        return Graph.from_edges(n, np.empty((0, 2), np.int64))
    rows = []
    for u in range(n - 1):
        mask = rng.random(n - 1 - u) < p
        vs = np.nonzero(mask)[0].astype(np.int64) + u + 1
        if vs.size:
            rows.append(np.column_stack([np.full(vs.size, u, np.int64), vs]))
    edges = np.concatenate(rows) if rows else np.empty((0, 2), np.int64)
    return Graph.from_edges(n, edges)


# ---------------------------------------------------------------------------
# Perfect matchings and edge-disjoint families
# ---------------------------------------------------------------------------

def _canon_matching(pairs: np.ndarray) -> np.ndarray:
    m = np.sort(np.asarray(pairs, np.int64).reshape(-1, 2), axis=1)
    return m[np.lexsort((m[:, 1], m[:, 0]))]


def sample_perfect_matching(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform perfect matching of K_n (n even), as a canonical (n/2, 2) array."""
    if n < 2 or n % 2:
        raise DomainError(f"need even n >= 2, got {n}")
    perm = rng.permutation(n)
    return _canon_matching(perm.reshape(-1, 2))


class MatchingFamily:
    """d pairwise edge-disjoint perfect matchings on an even vertex count.

    Matching i is "color" i+1; the union is a d-regular simple graph.
    """

    __slots__ = ("n", "matchings")

    def __init__(self, n: int, matchings: Sequence[np.ndarray]):
        self.n = int(n)
        self.matchings = tuple(_canon_matching(m) for m in matchings)
        self._validate()

    @property
    def d(self) -> int:
        return len(self.matchings)

    def _validate(self) -> None:
        if self.n < 2 or self.n % 2:
            raise DomainError(f"need even n >= 2, got {self.n}")
        seen: set[tuple[int, int]] = set()
        for idx, m in enumerate(self.matchings):
            if m.shape != (self.n // 2, 2):
                raise DomainError(f"matching {idx} has wrong shape {m.shape}")
            flat = m.ravel()
            if np.any(m[:, 0] == m[:, 1]):
                raise DomainError(f"matching {idx} has a self-loop")
            if np.unique(flat).size != self.n or flat.min() < 0 or flat.max() >= self.n:
                raise DomainError(f"matching {idx} does not cover every vertex exactly once")
            for u, v in m.tolist():
                e = (u, v)
                if e in seen:
                    raise DomainError(f"edge {e} repeated across matchings")
                seen.add(e)

    def union(self) -> Graph:
        return Graph.from_edges(self.n, np.concatenate(self.matchings))

    def partner_array(self, i: int) -> np.ndarray:
        """partner[v] = the vertex matched with v in matching i."""
        partner = np.full(self.n, -1, np.int32)
        m = self.matchings[i]
        partner[m[:, 0]] = m[:, 1]
        partner[m[:, 1]] = m[:, 0]
        return partner

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, MatchingFamily)
            and self.n == other.n
            and len(self.matchings) == len(other.matchings)
            and all(np.array_equal(a, b) for a, b in zip(self.matchings, other.matchings))
        )

    def __hash__(self) -> int:
        return hash((self.n, tuple(m.tobytes() for m in self.matchings)))

    def __repr__(self) -> str:
        return f"MatchingFamily(n={self.n}, d={self.d})"

    def to_text(self) -> str:
        lines = [f"{self.n} {self.d}"]
        for m in self.matchings:
            lines.extend(f"{u} {v}" for u, v in m.tolist())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "MatchingFamily":
        rows = [r for r in (line.strip() for line in text.splitlines()) if r]
        if not rows:
            raise DomainError("empty matching family text")
        try:
            n, d = (int(x) for x in rows[0].split())
        except ValueError as exc:
            raise DomainError(f"bad header {rows[0]!r}") from exc
        half = n // 2
        if len(rows) - 1 != d * half:
            raise DomainError(f"expected {d * half} edge lines, found {len(rows) - 1}")
        mats = []
        for i in range(d):
            block = rows[1 + i * half:1 + (i + 1) * half]
            mats.append(np.asarray([[int(x) for x in r.split()] for r in block], np.int64))
        return cls(n, mats)


def sample_disjoint_matchings(
    n: int,
    d: int,
    rng: np.random.Generator,
    restart_cap: int = 1000,
) -> MatchingFamily:
    """d edge-disjoint perfect matchings, built sequentially.

    Matching i pairs the lowest-indexed unmatched vertex with a uniformly
    random unmatched partner not already adjacent in colors < i, restarting
    the matching on dead-ends.  Approximately (not exactly) uniform.
    """
    if n < 2 or n % 2:
        raise DomainError(f"need even n >= 2, got {n}")
    if not 1 <= d <= n - 1:
        raise DomainError(f"need 1 <= d <= n-1, got d={d}")
    forbidden: set[int] = set()  # encoded u*n+v with u<v
    matchings: list[np.ndarray] = []
    for color in range(d):
        restarts = 0
        while True:
            pairs = _try_one_matching(n, forbidden, rng)
            if pairs is not None:
                break
            restarts += 1
            if restarts > restart_cap:
                raise SamplingFailed(
                    f"matching {color + 1} of {d} exceeded {restart_cap} restarts (d too close to n?)"
                )
        for u, v in pairs:
            forbidden.add(u * n + v)
        matchings.append(np.asarray(pairs, np.int64))
    return MatchingFamily(n, matchings)


def _try_one_matching(n: int, forbidden: set[int], rng: np.random.Generator) -> list[tuple[int, int]] | None:
    pool = np.arange(n, dtype=np.int64)
    pos = np.arange(n, dtype=np.int64)  # pos[v] = index of v in pool[:size]
    size = n
    pairs: list[tuple[int, int]] = []

    def remove(v: int) -> None:
        nonlocal size
        i = pos[v]
        last = pool[size - 1]
        pool[i] = last
        pos[last] = i
        pool[size - 1] = v
        pos[v] = size - 1
        size -= 1

    for u in range(n):
        if pos[u] >= size:
            continue  # already matched
        remove(u)
        w = -1
        # rejection first (forbidden is sparse), exact scan as fallback
        for _ in range(30):
            cand = int(pool[rng.integers(size)]) if size else -1
            if cand < 0:
                break
            a, b = (u, cand) if u < cand else (cand, u)
            if a * n + b not in forbidden:
                w = cand
                break
        if w < 0:
            valid = [
                int(c)
                for c in pool[:size]
                if (min(u, int(c)) * n + max(u, int(c))) not in forbidden
            ]
            if not valid:
                return None  # dead end -> restart this matching
            w = valid[int(rng.integers(len(valid)))]
        remove(w)
        pairs.append((min(u, w), max(u, w)))
    return pairs


def sample_disjoint_matchings_exact(
    n: int,
    d: int,
    rng: np.random.Generator,
    attempt_cap: int = 100_000,
) -> MatchingFamily:
    """Exactly uniform family via overlay rejection: draw d independent uniform
    matchings, accept iff pairwise edge-disjoint.  Practical for d <= 4."""
    if n < 2 or n % 2:
        raise DomainError(f"need even n >= 2, got {n}")
    if not 1 <= d <= n - 1:
        raise DomainError(f"need 1 <= d <= n-1, got d={d}")
    for _ in range(attempt_cap):
        mats = [sample_perfect_matching(n, rng) for _ in range(d)]
        enc = np.concatenate([m[:, 0] * n + m[:, 1] for m in mats])
        if np.unique(enc).size == enc.size:
            return MatchingFamily(n, mats)
    raise SamplingFailed(f"no disjoint {d}-family on n={n} after {attempt_cap} attempts")


def sample_matching_family(
    n: int,
    d: int,
    rng: np.random.Generator,
    method: str = "auto",
) -> MatchingFamily:
    """Family sampler used by the pipelines: exact rejection when d <= 4
    (acceptance ~ exp(-C(d,2)/2)), sequential construction otherwise."""
    if method == "auto":
        method = "exact" if d <= 4 else "sequential"
    if method == "exact":
        return sample_disjoint_matchings_exact(n, d, rng)
    if method == "sequential":
        return sample_disjoint_matchings(n, d, rng)
    raise DomainError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Random overlay of unlabeled skeletons
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OverlayInput:
    """Unlabeled skeletons (given as labeled graphs, read up to relabeling)."""

    n: int
    skeletons: tuple[Graph, ...]

    def __post_init__(self) -> None:
        if not self.skeletons:
            raise DomainError("need at least one skeleton")
        for g in self.skeletons:
            if g.n != self.n:
                raise DomainError("all skeletons must share the vertex count")


def random_overlay(inp: OverlayInput, rng: np.random.Generator) -> tuple[Graph, bool]:
    """Relabel every skeleton by an independent uniform permutation and union.

    The collision flag is true iff some edge occurs in >= 2 labeled skeletons.
    """
    all_edges = []
    for g in inp.skeletons:
        sigma = rng.permutation(inp.n)
        mapped = np.sort(sigma[g.edges.astype(np.int64)], axis=1)
        all_edges.append(mapped)
    stacked = np.concatenate(all_edges) if all_edges else np.empty((0, 2), np.int64)
    if stacked.size:
        uniq = np.unique(stacked, axis=0)
        collision = uniq.shape[0] < stacked.shape[0]
    else:
        uniq = stacked
        collision = False
    return Graph.from_edges(inp.n, uniq), collision


# ---------------------------------------------------------------------------
# Uniform random regular graphs (configuration model with rejection)
# ---------------------------------------------------------------------------

def sample_random_regular(
    n: int,
    d: int,
    rng: np.random.Generator,
    attempt_cap: int = 100_000,
) -> Graph:
    """Uniform simple d-regular graph: pair nd stubs, reject loops/multi-edges."""
    if n * d % 2:
        raise DomainError(f"need n*d even, got n={n}, d={d}")
    if d > n - 1:
        raise DomainError(f"need d <= n-1, got n={n}, d={d}")
    if d == 0:
        return Graph.from_edges(n, np.empty((0, 2), np.int64))
    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    for _ in range(attempt_cap):
        perm = rng.permutation(stubs)
        pairs = perm.reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        canon = np.sort(pairs, axis=1)
        enc = canon[:, 0] * n + canon[:, 1]
        if np.unique(enc).size != enc.size:
            continue
        return Graph.from_edges(n, canon)
    raise SamplingFailed(f"no simple {d}-regular graph on n={n} after {attempt_cap} attempts")
