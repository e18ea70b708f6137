"""Exact ground truth at tiny scale.

Enumerates every labeled simple graph with a given degree sequence
(optionally containing H1 and avoiding H2) and derives exact conditional
edge probabilities and exact subgraph-count distributions.  All values are
:class:`fractions.Fraction`.
"""
from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from . import _kernels
from .errors import CapabilityError, ModelError, UndefinedProbabilityError
from .estimates import ConditioningPair
from .graph_core import DegreeSequence, Pattern, SimpleGraph, falling

MAX_N = 11  # edge masks live in one int64
CLASS_BUDGET = 12_000_000
MAX_PATTERN_VERTICES = 5


def _as_dseq(n: int, d) -> DegreeSequence:
    if isinstance(d, DegreeSequence):
        if len(d) != n:
            raise ModelError("degree sequence length differs from n")
        return d
    if isinstance(d, (list, tuple)):
        return DegreeSequence(tuple(d))
    if (n * d) % 2:
        raise ModelError(f"n*d must be even, got n={n}, d={d}")
    if not 0 <= d < n:
        raise ModelError("need 0 <= d < n")
    return DegreeSequence.regular(n, d)


# ---------------------------------------------------------------------------
# counting via the pairing model (independent of the enumerator)


@lru_cache(maxsize=None)
def _simple_pairings(deficits: tuple[int, ...]) -> int:
    """Number of loop- and multi-edge-free pairings of the points.

    Only the multiset of deficits matters: unfinished vertices never share
    an edge, so the argument is kept sorted.
    """
    if not deficits:
        return 1
    r, rest = deficits[0], deficits[1:]
    if r == 0:
        return _simple_pairings(rest)
    open_idx = [j for j, x in enumerate(rest) if x > 0]
    total = 0
    fact = math.factorial(r)
    for chosen in combinations(open_idx, r):
        weight = fact
        nxt = list(rest)
        for j in chosen:
            weight *= rest[j]
            nxt[j] -= 1
        total += weight * _simple_pairings(tuple(sorted(nxt, reverse=True)))
    return total


def count_by_pairings(n: int, d) -> int:
    """Labeled simple graphs with degree sequence d, via simple pairings / prod d_i!."""
    dseq = _as_dseq(n, d)
    if dseq.M % 2:
        return 0
    simple = _simple_pairings(tuple(sorted(dseq.values, reverse=True)))
    mult = math.prod(math.factorial(x) for x in dseq.values)
    q, r = divmod(simple, mult)
    assert r == 0, "pairing count not divisible by point relabelings"
    return q


def count_pairings_bruteforce(n: int, d, limit: int = 2_000_000) -> int:
    """Walk every perfect matching of the points; only for very small cases."""
    dseq = _as_dseq(n, d)
    points = [v for v in range(n) for _ in range(dseq[v])]
    if len(points) % 2:
        return 0
    npairings = math.prod(range(len(points) - 1, 0, -2))
    if npairings > limit:
        raise CapabilityError(f"{npairings} pairings exceeds brute-force limit")
    simple = 0

    def walk(free: list[int], seen: frozenset):
        nonlocal simple
        if not free:
            simple += 1
            return
        p, rest = free[0], free[1:]
        for k, q in enumerate(rest):
            a, b = points[p], points[q]
            if a == b:
                continue
            e = (min(a, b), max(a, b))
            if e in seen:
                continue
            walk(rest[:k] + rest[k + 1:], seen | {e})

    walk(list(range(len(points))), frozenset())
    return simple // math.prod(math.factorial(x) for x in dseq.values)


# ---------------------------------------------------------------------------
# direct enumeration


def edge_index(n: int) -> np.ndarray:
    idx = -np.ones((n, n), dtype=np.int64)
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            idx[i, j] = idx[j, i] = k
            k += 1
    return idx


def edge_from_index(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


@dataclass
class _Problem:
    n: int
    deficit: np.ndarray
    adj: np.ndarray
    forb: np.ndarray
    emask: int


def _setup(n: int, dseq: DegreeSequence, ctx: ConditioningPair | None) -> _Problem | None:
    if n > MAX_N:
        raise CapabilityError(f"enumeration supports n <= {MAX_N}")
    eidx = edge_index(n)
    deficit = np.array(dseq.values, dtype=np.int64)
    adj = np.zeros(n, dtype=np.int64)
    forb = np.zeros(n, dtype=np.int64)
    emask = 0
    if ctx is not None:
        for u, v in ctx.h1.edges:
            adj[u] |= 1 << v
            adj[v] |= 1 << u
            deficit[u] -= 1
            deficit[v] -= 1
            emask |= 1 << int(eidx[u, v])
        for u, v in ctx.h2.edges:
            forb[u] |= 1 << v
            forb[v] |= 1 << u
    if (deficit < 0).any():
        return None
    return _Problem(n, deficit, adj, forb, emask)


def check_budget(n: int, d) -> int:
    """Raise CapabilityError unless the full class is small enough; return its size."""
    dseq = _as_dseq(n, d)
    if n > MAX_N:
        raise CapabilityError(f"enumeration supports n <= {MAX_N}, got {n}")
    size = count_by_pairings(n, dseq)
    if size > CLASS_BUDGET:
        raise CapabilityError(f"class of {size} graphs exceeds budget {CLASS_BUDGET}")
    return size


def _split(prob: _Problem) -> list[_Problem]:
    """Subproblems fixing the neighbourhood of the first open vertex."""
    n = prob.n
    open_v = [v for v in range(n) if prob.deficit[v] > 0]
    if not open_v:
        return [prob]
    i = open_v[0]
    cand = [j for j in range(i + 1, n)
            if prob.deficit[j] > 0 and not (prob.adj[i] >> j) & 1 and not (prob.forb[i] >> j) & 1]
    eidx = edge_index(n)
    subs = []
    for chosen in combinations(cand, int(prob.deficit[i])):
        deficit, adj, forb = prob.deficit.copy(), prob.adj.copy(), prob.forb.copy()
        emask = prob.emask
        for j in chosen:
            adj[i] |= 1 << j
            adj[j] |= 1 << i
            deficit[j] -= 1
            emask |= 1 << int(eidx[i, j])
        deficit[i] = 0
        for j in cand:
            if j not in chosen:
                forb[i] |= 1 << j
                forb[j] |= 1 << i
        subs.append(_Problem(n, deficit, adj, forb, emask))
    return subs


def _run_kernel(prob: _Problem, copies: np.ndarray, track: bool, hist_len: int):
    n = prob.n
    freq = np.zeros(n * (n - 1) // 2, dtype=np.int64)
    hist = np.zeros(hist_len, dtype=np.int64)
    total = _kernels.enum_stats(
        n, prob.deficit, prob.adj, prob.forb, np.int64(prob.emask), edge_index(n),
        copies, track, freq, hist,
    )
    return int(total), freq, hist


def _run_kernel_args(args):
    return _run_kernel(*args)


def _enumerate_stats(n, dseq, ctx, copies=None, track=True, workers=1):
    prob = _setup(n, dseq, ctx)
    m = n * (n - 1) // 2
    if copies is None:
        copies = np.zeros(0, dtype=np.int64)
    hist_len = len(copies) + 1
    if prob is None:
        return 0, np.zeros(m, dtype=np.int64), np.zeros(hist_len, dtype=np.int64)
    if workers > 1:
        subs = _split(prob)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_kernel_args, [(s, copies, track, hist_len) for s in subs]))
    else:
        parts = [_run_kernel(prob, copies, track, hist_len)]
    total = sum(p[0] for p in parts)
    freq = sum((p[1] for p in parts), np.zeros(m, dtype=np.int64))
    hist = sum((p[2] for p in parts), np.zeros(hist_len, dtype=np.int64))
    return total, freq, hist


def iter_graphs(n: int, d, ctx: ConditioningPair | None = None) -> Iterator[SimpleGraph]:
    """Pure-Python generator over the same class the kernel counts."""
    dseq = _as_dseq(n, d)
    prob = _setup(n, dseq, ctx)
    if prob is None:
        return
    deficit = [int(x) for x in prob.deficit]
    adj = [int(x) for x in prob.adj]
    forb = [int(x) for x in prob.forb]
    base = list(ctx.h1.edges) if ctx is not None else []
    chosen_edges: list[tuple[int, int]] = []

    def rec(i):
        while i < n and deficit[i] == 0:
            i += 1
        if i == n:
            yield SimpleGraph(n, base + chosen_edges)
            return
        cand = [j for j in range(i + 1, n)
                if deficit[j] > 0 and not (adj[i] >> j) & 1 and not (forb[i] >> j) & 1]
        k = deficit[i]
        for sub in combinations(cand, k):
            for j in sub:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
                deficit[j] -= 1
                chosen_edges.append((i, j))
            deficit[i] = 0
            active = [j for j in range(i + 1, n) if deficit[j] > 0]
            if all(
                sum(1 for x in active if x != j and not (adj[j] >> x) & 1 and not (forb[j] >> x) & 1) >= deficit[j]
                for j in active
            ):
                yield from rec(i + 1)
            deficit[i] = k
            for j in sub:
                adj[i] &= ~(1 << j)
                adj[j] &= ~(1 << i)
                deficit[j] += 1
                chosen_edges.pop()

    yield from rec(0)


def enumerate_regular(n: int, d, visitor: Callable[[SimpleGraph], None] | None = None,
                      ctx: ConditioningPair | None = None, workers: int = 1) -> int:
    """Visit every labeled simple d-regular graph on [n] once; return the count.

    Without a visitor the numba kernel only counts.  ``d`` may also be a
    degree sequence.
    """
    dseq = _as_dseq(n, d)
    check_budget(n, dseq)
    if visitor is None:
        return _enumerate_stats(n, dseq, ctx, track=False, workers=workers)[0]
    total = 0
    for g in iter_graphs(n, dseq, ctx):
        visitor(g)
        total += 1
    return total


@dataclass
class GraphClassIndex:
    n: int
    d: int | DegreeSequence
    graphs: list[SimpleGraph]

    @property
    def total(self) -> int:
        return len(self.graphs)

    def index_of(self) -> dict[frozenset, int]:
        return {g.edges: k for k, g in enumerate(self.graphs)}


def graph_class(n: int, d, ctx: ConditioningPair | None = None) -> GraphClassIndex:
    dseq = _as_dseq(n, d)
    check_budget(n, dseq)
    return GraphClassIndex(n, d, list(iter_graphs(n, dseq, ctx)))


# ---------------------------------------------------------------------------
# exact probabilities


def exact_edge_probabilities(n: int, d, ctx: ConditioningPair | None = None,
                             workers: int = 1) -> tuple[int, dict[tuple[int, int], Fraction]]:
    """Class size and P(e | ctx) for every pair e, from one enumeration pass."""
    dseq = _as_dseq(n, d)
    check_budget(n, dseq)
    total, freq, _ = _enumerate_stats(n, dseq, ctx, track=True, workers=workers)
    if total == 0:
        raise UndefinedProbabilityError("conditioning class is empty")
    pairs = edge_from_index(n)
    return total, {e: Fraction(int(c), total) for e, c in zip(pairs, freq)}


def exact_conditional_edge_prob(n: int, d, ctx: ConditioningPair | None, u: int, v: int,
                                workers: int = 1) -> Fraction:
    """|{G in class : uv in G}| / |class| for the class containing H1 and avoiding H2."""
    _, probs = exact_edge_probabilities(n, d, ctx, workers=workers)
    return probs[(min(u, v), max(u, v))]


def pattern_copies(n: int, p: Pattern) -> np.ndarray:
    """Edge masks of all copies of p in K_n."""
    if p.t > MAX_PATTERN_VERTICES:
        raise CapabilityError(f"patterns up to {MAX_PATTERN_VERTICES} vertices")
    eidx = edge_index(n)
    masks = set()
    for image in permutations(range(n), p.t):
        m = 0
        for a, b in p.edges:
            m |= 1 << int(eidx[image[a], image[b]])
        masks.add(m)
    return np.array(sorted(masks), dtype=np.int64)


@dataclass(frozen=True)
class CountDistribution:
    pmf: dict[int, Fraction]

    def __post_init__(self):
        if sum(self.pmf.values()) != 1 or any(p < 0 for p in self.pmf.values()):
            raise ValueError("pmf must be nonnegative and sum to 1")

    @classmethod
    def point_mass(cls, value: int) -> "CountDistribution":
        return cls({value: Fraction(1)})

    @classmethod
    def from_counts(cls, counts: dict[int, int]) -> "CountDistribution":
        total = sum(counts.values())
        return cls({k: Fraction(c, total) for k, c in sorted(counts.items()) if c})

    def expectation(self, f) -> Fraction:
        return sum((p * f(z) for z, p in self.pmf.items()), Fraction(0))

    @property
    def mean(self) -> Fraction:
        return self.expectation(lambda z: z)

    @property
    def variance(self) -> Fraction:
        mu = self.mean
        return self.expectation(lambda z: (z - mu) ** 2)

    def central_moment(self, k: int) -> Fraction:
        mu = self.mean
        return self.expectation(lambda z: (z - mu) ** k)

    @property
    def skewness(self) -> float:
        var = self.variance
        return float(self.central_moment(3)) / float(var) ** 1.5 if var else float("nan")

    def factorial_moment(self, k: int) -> Fraction:
        return self.expectation(lambda z: falling(z, k))


def factorial_moments(dist: CountDistribution, k_max: int) -> list[Fraction]:
    """[E (Z)_1, ..., E (Z)_{k_max}]."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    return [dist.factorial_moment(k) for k in range(1, k_max + 1)]


def exact_count_distribution(n: int, d, p: Pattern, ctx: ConditioningPair | None = None,
                             workers: int = 1) -> CountDistribution:
    """Exact pmf of the number of copies of p (as edge subsets) over the class."""
    dseq = _as_dseq(n, d)
    check_budget(n, dseq)
    copies = pattern_copies(n, p)
    total, _, hist = _enumerate_stats(n, dseq, ctx, copies=copies, track=False, workers=workers)
    if total == 0:
        raise UndefinedProbabilityError("conditioning class is empty")
    return CountDistribution.from_counts({k: int(c) for k, c in enumerate(hist) if c})


# ---------------------------------------------------------------------------
# advisory on-disk cache


class ClassStatsCache:
    """JSON file mapping a parameter hash to class statistics.

    Entries are advisory; :meth:`verify` recomputes one and compares.
    """

    def __init__(self, path):
        self.path = Path(path)
        self._data = json.loads(self.path.read_text()) if self.path.exists() else {}

    @staticmethod
    def key(n: int, d) -> str:
        payload = json.dumps({"n": n, "d": list(_as_dseq(n, d).values)}, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    @staticmethod
    def _compute(n: int, d) -> dict:
        total, probs = exact_edge_probabilities(n, d)
        tri = exact_count_distribution(n, d, Pattern.cycle(3))
        return {
            "n": n,
            "d": list(_as_dseq(n, d).values),
            "total": total,
            "edge_prob_01": str(probs[(0, 1)]),
            "triangle_pmf": {str(k): str(v) for k, v in tri.pmf.items()},
        }

    def get(self, n: int, d) -> dict:
        k = self.key(n, d)
        if k not in self._data:
            self._data[k] = self._compute(n, d)
            self.path.write_text(json.dumps(self._data, indent=2, sort_keys=True) + "\n")
        return self._data[k]

    def verify(self, n: int, d) -> bool:
        return self.get(n, d) == self._compute(n, d)
