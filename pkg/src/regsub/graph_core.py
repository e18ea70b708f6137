"""Labeled simple graphs, degree sequences, small patterns and the
combinatorial quantities built on them (automorphisms, density gaps,
triangles, holes).

Vertices are ``0..n-1`` internally.  The edge-list text format is 1-based.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import CapabilityError, MalformedInputError, VertexRangeError

Edge = tuple[int, int]

MAX_AUT_VERTICES = 12
MAX_RHO_SUBSETS = 200_000


def _norm(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class SimpleGraph:
    """Immutable labeled simple graph on ``range(n)``.

    Keeps both an edge set (O(1) membership) and sorted neighbour tuples.
    """

    __slots__ = ("n", "edges", "_adj", "_nbrs")

    def __init__(self, n: int, edges: Iterable[Edge] = ()):
        if n < 0:
            raise MalformedInputError(f"vertex count must be >= 0, got {n}")
        norm = set()
        adj: list[set[int]] = [set() for _ in range(n)]
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise MalformedInputError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise VertexRangeError(f"edge ({u}, {v}) has endpoint outside [0, {n})")
            key = _norm(u, v)
            if key in norm:
                raise MalformedInputError(f"duplicate edge {key}")
            norm.add(key)
            adj[u].add(v)
            adj[v].add(u)
        self.n = n
        self.edges: frozenset[Edge] = frozenset(norm)
        self._adj = tuple(frozenset(a) for a in adj)
        self._nbrs = tuple(tuple(sorted(a)) for a in adj)

    # -- basic queries -------------------------------------------------
    def __len__(self) -> int:
        return len(self.edges)

    def __contains__(self, e) -> bool:
        return self.has_edge(*e)

    def __iter__(self) -> Iterator[Edge]:
        return iter(self.edge_list())

    def __eq__(self, other) -> bool:
        return isinstance(other, SimpleGraph) and self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"SimpleGraph(n={self.n}, m={len(self.edges)})"

    def has_edge(self, u: int, v: int) -> bool:
        return u != v and _norm(u, v) in self.edges

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._nbrs[v]

    def neighbor_set(self, v: int) -> frozenset[int]:
        return self._adj[v]

    def degree_of(self, v: int) -> int:
        return len(self._adj[v])

    def degrees(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self._adj)

    def max_degree(self) -> int:
        return max(self.degrees(), default=0)

    def edge_list(self) -> list[Edge]:
        return sorted(self.edges)

    def vertices_touched(self) -> list[int]:
        return [v for v in range(self.n) if self._adj[v]]

    # -- derived graphs --------------------------------------------------
    def with_edges(self, extra: Iterable[Edge]) -> "SimpleGraph":
        return SimpleGraph(self.n, list(self.edges) + [_norm(*e) for e in extra])

    def without_edges(self, removed: Iterable[Edge]) -> "SimpleGraph":
        drop = {_norm(*e) for e in removed}
        missing = drop - self.edges
        if missing:
            raise MalformedInputError(f"edges not present: {sorted(missing)}")
        return SimpleGraph(self.n, self.edges - drop)

    def union(self, other: "SimpleGraph") -> "SimpleGraph":
        if other.n != self.n:
            raise MalformedInputError("graphs live on different vertex sets")
        return SimpleGraph(self.n, self.edges | other.edges)

    def relabel(self, perm: Sequence[int]) -> "SimpleGraph":
        return SimpleGraph(self.n, [(perm[u], perm[v]) for u, v in self.edges])


def build_graph(n: int, edge_list: Iterable[Edge]) -> SimpleGraph:
    return SimpleGraph(n, edge_list)


def empty_graph(n: int) -> SimpleGraph:
    return SimpleGraph(n)


def complete_graph(n: int) -> SimpleGraph:
    return SimpleGraph(n, combinations(range(n), 2))


def cycle_graph(n: int) -> SimpleGraph:
    return SimpleGraph(n, [(i, (i + 1) % n) for i in range(n)])


# ---------------------------------------------------------------------------
# degree sequences


@dataclass(frozen=True)
class DegreeSequence:
    values: tuple[int, ...]

    def __post_init__(self):
        vals = tuple(int(x) for x in self.values)
        if any(x < 0 for x in vals):
            raise MalformedInputError("degrees must be nonnegative")
        object.__setattr__(self, "values", vals)

    @classmethod
    def regular(cls, n: int, d: int) -> "DegreeSequence":
        return cls((d,) * n)

    @classmethod
    def of(cls, g: SimpleGraph) -> "DegreeSequence":
        return cls(g.degrees())

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def M(self) -> int:
        return sum(self.values)

    @property
    def max_degree(self) -> int:
        return max(self.values, default=0)

    def M_j(self, j: int) -> int:
        return degree_stats(self, j)

    def is_regular(self) -> bool:
        return len(set(self.values)) <= 1

    def __getitem__(self, i: int) -> int:
        return self.values[i]

    def __len__(self) -> int:
        return len(self.values)

    def dominates(self, other: "DegreeSequence") -> bool:
        """True iff ``other <= self`` componentwise."""
        return len(other) == len(self) and all(a <= b for a, b in zip(other.values, self.values))

    def residual(self, h: SimpleGraph) -> "DegreeSequence":
        """``d - d^H``; raises if H uses more degree than available."""
        if h.n != self.n:
            raise MalformedInputError("graph and degree sequence disagree on n")
        res = tuple(a - b for a, b in zip(self.values, h.degrees()))
        if any(x < 0 for x in res):
            raise MalformedInputError("graph degree exceeds the degree sequence")
        return DegreeSequence(res)


def falling(x, k: int):
    out = 1
    for i in range(k):
        out *= x - i
    return out


def degree_stats(dseq: DegreeSequence | Sequence[int], j: int) -> int:
    """M for j == 1, otherwise M_j = sum of falling factorials (d_i)_j."""
    if j < 1:
        raise ValueError("order j must be >= 1")
    values = dseq.values if isinstance(dseq, DegreeSequence) else tuple(dseq)
    if j == 1:
        return sum(values)
    return sum(falling(x, j) for x in values)


# ---------------------------------------------------------------------------
# patterns


@dataclass(frozen=True)
class Pattern:
    """Abstract small graph on ``range(t)``."""

    t: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.t < 1:
            raise MalformedInputError("pattern needs at least one vertex")
        g = SimpleGraph(self.t, self.edges)  # validates
        object.__setattr__(self, "edges", g.edges)

    @classmethod
    def from_graph(cls, g: SimpleGraph) -> "Pattern":
        return cls(g.n, g.edges)

    @classmethod
    def cycle(cls, length: int) -> "Pattern":
        if length < 3:
            raise MalformedInputError("cycles need length >= 3")
        return cls(length, frozenset(_norm(i, (i + 1) % length) for i in range(length)))

    @classmethod
    def complete(cls, t: int) -> "Pattern":
        return cls(t, frozenset(combinations(range(t), 2)))

    @classmethod
    def path(cls, n_edges: int) -> "Pattern":
        return cls(n_edges + 1, frozenset((i, i + 1) for i in range(n_edges)))

    @classmethod
    def star(cls, leaves: int) -> "Pattern":
        return cls(leaves + 1, frozenset((0, i) for i in range(1, leaves + 1)))

    @classmethod
    def edge(cls) -> "Pattern":
        return cls(2, frozenset({(0, 1)}))

    @property
    def h(self) -> int:
        return len(self.edges)

    def graph(self) -> SimpleGraph:
        return SimpleGraph(self.t, self.edges)

    def degrees(self) -> tuple[int, ...]:
        return self.graph().degrees()

    def cycle_length(self) -> int | None:
        """Length if the pattern is a single cycle on all its vertices."""
        g = self.graph()
        if self.t < 3 or any(x != 2 for x in g.degrees()):
            return None
        seen, stack = {0}, [0]
        while stack:
            for w in g.neighbors(stack.pop()):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return self.t if len(seen) == self.t else None


def aut_size(p: Pattern) -> int:
    """Order of the automorphism group by backtracking over degree-compatible maps."""
    if p.t > MAX_AUT_VERTICES:
        raise CapabilityError(f"aut_size supports t <= {MAX_AUT_VERTICES}, got {p.t}")
    g = p.graph()
    deg = g.degrees()
    # refine by (degree, sorted neighbour degrees)
    sig = [(deg[v], tuple(sorted(deg[w] for w in g.neighbors(v)))) for v in range(p.t)]
    order = sorted(range(p.t), key=lambda v: (-deg[v], v))
    image = [-1] * p.t
    used = [False] * p.t

    def extend(k: int) -> int:
        if k == p.t:
            return 1
        v = order[k]
        total = 0
        for w in range(p.t):
            if used[w] or sig[w] != sig[v]:
                continue
            ok = True
            for x in order[:k]:
                if g.has_edge(v, x) != g.has_edge(w, image[x]):
                    ok = False
                    break
            if not ok:
                continue
            image[v], used[w] = w, True
            total += extend(k + 1)
            image[v], used[w] = -1, False
        return total

    return extend(0)


def rho(p: Pattern, j: int) -> Fraction:
    """min over j-edge subgraphs H' of |V(H')|/t - j/h (only edge-incident vertices count)."""
    h = p.h
    if not 1 <= j <= h - 1:
        raise VertexRangeError(f"j must lie in [1, {h - 1}], got {j}")
    if math.comb(h, j) > MAX_RHO_SUBSETS:
        raise CapabilityError(f"C({h}, {j}) edge subsets exceeds budget")
    edges = sorted(p.edges)
    fewest = min(len({x for e in sub for x in e}) for sub in combinations(edges, j))
    return Fraction(fewest, p.t) - Fraction(j, h)


def is_strictly_balanced(p: Pattern) -> bool:
    return all(rho(p, j) > 0 for j in range(1, p.h))


# ---------------------------------------------------------------------------
# triangles and holes


def enumerate_triangles(g: SimpleGraph) -> list[tuple[int, int, int]]:
    """Every triangle once, as a sorted triple, in lexicographic order."""
    out = []
    for u in range(g.n):
        nu = g.neighbor_set(u)
        for v in g.neighbors(u):
            if v <= u:
                continue
            for w in g.neighbors(v):
                if w > v and w in nu:
                    out.append((u, v, w))
    return out


def triangle_count(g: SimpleGraph) -> int:
    return len(enumerate_triangles(g))


def triangle_bound_holds(g: SimpleGraph) -> bool:
    """At most 3 x^{3/2} triangles in a graph with x edges."""
    t = triangle_count(g)
    return t * t <= 9 * len(g) ** 3  # t <= 3 m^{3/2}, in integers


@dataclass(frozen=True)
class TriangleTuple:
    triangles: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        norm = []
        for tri in self.triangles:
            tri = tuple(sorted(int(x) for x in tri))
            if len(tri) != 3 or len(set(tri)) != 3:
                raise MalformedInputError(f"not a triangle: {tri}")
            norm.append(tri)
        object.__setattr__(self, "triangles", tuple(norm))

    @property
    def k(self) -> int:
        return len(self.triangles)

    def hits(self) -> dict[int, int]:
        """h(v): number of tuple members incident to v."""
        out: dict[int, int] = {}
        for tri in self.triangles:
            for v in tri:
                out[v] = out.get(v, 0) + 1
        return out

    def hit_counts(self) -> dict[int, int]:
        """h_j: number of vertices hit exactly j times."""
        out: dict[int, int] = {}
        for c in self.hits().values():
            out[c] = out.get(c, 0) + 1
        return out

    def edge_carriers(self) -> dict[Edge, set[tuple[int, int, int]]]:
        carriers: dict[Edge, set] = {}
        for tri in self.triangles:
            a, b, c = tri
            for e in ((a, b), (a, c), (b, c)):
                carriers.setdefault(e, set()).add(tri)
        return carriers


def _carried_elsewhere(carriers, e: Edge, tri) -> bool:
    return any(c != tri for c in carriers.get(e, ()))


def hole_count(tt: TriangleTuple) -> int:
    """Vertex triples whose three sides are each carried by a tuple triangle
    other than the triple itself.

    Every hole is a triangle of the union graph of the tuple, so only those
    are inspected.
    """
    carriers = tt.edge_carriers()
    union = SimpleGraph(max((v for tri in tt.triangles for v in tri), default=-1) + 1, carriers)
    count = 0
    for tri in enumerate_triangles(union):
        x, y, z = tri
        if (
            _carried_elsewhere(carriers, (x, y), tri)
            and _carried_elsewhere(carriers, (y, z), tri)
            and _carried_elsewhere(carriers, (x, z), tri)
        ):
            count += 1
    return count


# ---------------------------------------------------------------------------
# edge-list text format: "n m" then m lines "u v", 1-based


def format_edge_list(g: SimpleGraph | Pattern) -> str:
    if isinstance(g, Pattern):
        g = g.graph()
    lines = [f"{g.n} {len(g)}"]
    lines += [f"{u + 1} {v + 1}" for u, v in g.edge_list()]
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> SimpleGraph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise MalformedInputError("empty edge-list")
    try:
        n, m = int(rows[0][0]), int(rows[0][1])
        pairs = [(int(a) - 1, int(b) - 1) for a, b in rows[1:]]
    except (ValueError, IndexError) as exc:
        raise MalformedInputError(f"bad edge-list line: {exc}") from None
    if len(pairs) != m:
        raise MalformedInputError(f"header promises {m} edges, found {len(pairs)}")
    return SimpleGraph(n, pairs)


def read_edge_list(path) -> SimpleGraph:
    return parse_edge_list(Path(path).read_text())


def write_edge_list(g: SimpleGraph | Pattern, path) -> None:
    Path(path).write_text(format_edge_list(g))
