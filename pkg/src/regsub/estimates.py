"""Closed-form conditional edge probabilities, subgraph probabilities,
expectations and the triangle variance for random regular graphs.

Every formula is evaluated in exact rational arithmetic and converted to
float only when the :class:`ProbEstimate` is built.  Error orders are
carried as metadata and never folded into values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ContractError, ModelError
from .graph_core import (
    DegreeSequence,
    Pattern,
    SimpleGraph,
    aut_size,
    falling,
    is_strictly_balanced,
    rho,
)

HYPOTHESIS_THRESHOLD = 0.1
MAX_JOINT_EDGES = 50
MAX_UPPER_BOUND_EDGES = 10


@dataclass(frozen=True)
class ProbEstimate:
    value: float
    source: str
    error_order: str
    exact: Fraction | None = None
    error_scale: float | None = None  # error_order evaluated at the inputs, constant 1
    extra: dict = field(default_factory=dict, compare=False)

    def __float__(self) -> float:
        return self.value


def _estimate(value, source, error_order, error_scale=None, **extra) -> ProbEstimate:
    exact = value if isinstance(value, Fraction) else None
    return ProbEstimate(float(value), source, error_order, exact, error_scale, extra)


@dataclass(frozen=True)
class ConditioningPair:
    """H1 must be present, H2 must be absent; their edge sets are disjoint."""

    h1: SimpleGraph
    h2: SimpleGraph

    def __post_init__(self):
        if self.h1.n != self.h2.n:
            raise ContractError("H1 and H2 must share the vertex set")
        common = self.h1.edges & self.h2.edges
        if common:
            raise ContractError(f"H1 and H2 share edges {sorted(common)}")

    @classmethod
    def empty(cls, n: int) -> "ConditioningPair":
        return cls(SimpleGraph(n), SimpleGraph(n))

    @classmethod
    def of(cls, n: int, h1=(), h2=()) -> "ConditioningPair":
        return cls(SimpleGraph(n, h1), SimpleGraph(n, h2))

    @property
    def n(self) -> int:
        return self.h1.n

    @property
    def union(self) -> SimpleGraph:
        return self.h1.union(self.h2)

    def forcing(self, u: int, v: int) -> "ConditioningPair":
        """Same context with uv added to the required edges."""
        return ConditioningPair(self.h1.with_edges([(u, v)]), self.h2)

    def forbidding(self, u: int, v: int) -> "ConditioningPair":
        return ConditioningPair(self.h1, self.h2.with_edges([(u, v)]))


@dataclass(frozen=True)
class WPairSet:
    pairs: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


# ---------------------------------------------------------------------------
# local correction terms


def _check_pair(graph: SimpleGraph, u: int, v: int) -> None:
    if u == v:
        raise ContractError("u and v must differ")
    if graph.has_edge(u, v):
        raise ContractError(f"pair ({u}, {v}) already lies in the conditioning graph")


def phi(h: SimpleGraph, u: int, v: int, d: int) -> int:
    """Second-order correction for P(uv | H present) in G(n, d)."""
    _check_pair(h, u, v)
    if h.max_degree() > d:
        raise ContractError("conditioning graph has a vertex of degree > d")
    du, dv = h.degree_of(u), h.degree_of(v)
    return (
        -d
        - 2 * len(h)
        - (d - 1) * (du + dv)
        + du * dv
        + sum(h.degree_of(x) for x in h.neighbors(u))
        + sum(h.degree_of(y) for y in h.neighbors(v))
    )


def phi_approx(h: SimpleGraph, u: int, v: int, d: int) -> int:
    """phi without its O(1) part: -2|H| - d(1 + d_u^H + d_v^H)."""
    _check_pair(h, u, v)
    if h.max_degree() > d:
        raise ContractError("conditioning graph has a vertex of degree > d")
    return -2 * len(h) - d * (1 + h.degree_of(u) + h.degree_of(v))


def cycle_phi_sequence(ell: int, d: int) -> list[int]:
    """Correction terms for closing each edge of C_ell in order around the cycle."""
    if ell < 3:
        raise ContractError("cycle length must be >= 3")
    seq = [-d, -2 * d]
    seq += [-2 * d - 2 * (i - 3) - 1 for i in range(3, ell)]
    seq.append(-3 * d + 3 - 2 * (ell - 3))
    return seq


def build_w_set(ctx: ConditioningPair, u: int, v: int) -> WPairSet:
    """Ordered (x, y): xy in H1+H2, xu and yv outside H1+H2, x, y not in {u, v}."""
    hu = ctx.union
    _check_pair(hu, u, v)
    pairs = []
    for a, b in hu.edge_list():
        for x, y in ((a, b), (b, a)):
            if x in (u, v) or y in (u, v):
                continue
            if hu.has_edge(x, u) or hu.has_edge(y, v):
                continue
            pairs.append((x, y))
    return WPairSet(tuple(sorted(pairs)))


# ---------------------------------------------------------------------------
# conditional edge probabilities


def _check_dseq(ctx: ConditioningPair, dseq: DegreeSequence) -> DegreeSequence:
    if len(dseq) != ctx.n:
        raise ContractError("degree sequence length differs from n")
    if not dseq.dominates(DegreeSequence.of(ctx.h1)):
        raise ContractError("H1 degrees exceed the degree sequence")
    return dseq.residual(ctx.h1)


def cond_edge_prob_baseline(ctx: ConditioningPair, dseq: DegreeSequence, u: int, v: int) -> ProbEstimate:
    """(d_u - d_u^H1)(d_v - d_v^H1) / (M - 2|H1|), relative error O(Delta^2/M)."""
    _check_pair(ctx.union, u, v)
    res = _check_dseq(ctx, dseq)
    denom = dseq.M - 2 * len(ctx.h1)
    if denom <= 0:
        raise ContractError("M - 2|H1| must be positive")
    value = Fraction(res[u] * res[v], denom)
    return _estimate(
        value, "baseline", "Delta^2/M", dseq.max_degree ** 2 / dseq.M
    )


def _refined_regular_exact(h: SimpleGraph, u: int, v: int, d: int, n: int) -> Fraction:
    du, dv = d - h.degree_of(u), d - h.degree_of(v)
    if du <= 0 or dv <= 0:
        return Fraction(0)
    dn = d * n
    return Fraction(du * dv, dn) * (1 - Fraction(phi(h, u, v, d), dn))


def _regular_error_scale(hsize: int, d: int, n: int) -> float:
    return hsize / n**2 + hsize**2 / (d * n) ** 2 + (d / n) ** 2


def cond_edge_prob_refined_regular(h: SimpleGraph, u: int, v: int, d: int, n: int) -> ProbEstimate:
    """P(uv in G(n,d) | H present) = d~_u d~_v/(dn) * (1 - phi_H(uv)/(dn)).

    The degree-correction factor (1 - (d-1)/n) is already absorbed by phi_H;
    see the README for the derivation check.
    """
    if h.n != n:
        raise ContractError("conditioning graph must live on [n]")
    if (d * n) % 2:
        raise ModelError("dn must be even")
    if not 0 <= d < n:
        raise ModelError("need 0 <= d < n")
    _check_pair(h, u, v)
    if h.max_degree() > d:
        raise ContractError("conditioning graph has a vertex of degree > d")
    if 4 * len(h) > d * n:
        raise ContractError("need 2|H| <= dn/2")
    value = _refined_regular_exact(h, u, v, d, n)
    return _estimate(
        value,
        "refined-regular",
        "|H|/n^2 + |H|^2/(d^2 n^2) + d^2/n^2",
        _regular_error_scale(len(h), d, n),
    )


def bar_phi(ctx: ConditioningPair, dseq: DegreeSequence, u: int, v: int) -> Fraction:
    """Exact correction term of the general-degree-sequence estimate."""
    hu = ctx.union
    _check_pair(hu, u, v)
    res = _check_dseq(ctx, dseq)
    M_t = res.M
    if M_t <= 0:
        raise ContractError("residual degree sum must be positive")
    M2_t = res.M_j(2)
    du, dv = res[u], res[v]
    return (
        -2 * (du + dv)
        + 2
        - sum(res[x] for x in hu.neighbors(u))
        - sum(res[y] for y in hu.neighbors(v))
        - Fraction((du + dv - 2) * M2_t, M_t)
        + du * dv
    )


def cond_edge_prob_refined_general(ctx: ConditioningPair, dseq: DegreeSequence, u: int, v: int) -> ProbEstimate:
    hu = ctx.union
    _check_pair(hu, u, v)
    res = _check_dseq(ctx, dseq)
    M, M_t = dseq.M, res.M
    if 2 * M_t < M:
        raise ContractError("residual degree sum must be at least M/2")
    du, dv = res[u], res[v]
    delta = dseq.max_degree
    scale = delta**5 * dseq.n / M**3
    if du == 0 or dv == 0:
        return _estimate(Fraction(0), "refined-general", "Delta^5 n/M^3", scale)
    M2_t = res.M_j(2)
    w_sum = sum(res[x] * res[y] for x, y in build_w_set(ctx, u, v))
    second = 1 - Fraction(M2_t**2, M_t**3) - Fraction(M2_t, M_t**2) - Fraction(w_sum, M_t**2)
    # the stated denominator is dn - 2|H1|; M - 2|H1| coincides for regular d
    third = 1 - bar_phi(ctx, dseq, u, v) / (M - 2 * len(ctx.h1))
    value = Fraction(du * dv, M_t) * second * third
    return _estimate(value, "refined-general", "Delta^5 n/M^3", scale)


# ---------------------------------------------------------------------------
# subgraph probabilities and expectations


def joint_subgraph_prob(h: SimpleGraph, d: int, n: int) -> ProbEstimate:
    """P(h subset of G(n,d)) as the chained product of refined conditionals.

    Edges are added in lexicographic order of their sorted endpoints.
    """
    if h.n != n:
        raise ContractError("graph must live on [n]")
    if len(h) > MAX_JOINT_EDGES:
        raise ContractError(f"at most {MAX_JOINT_EDGES} edges supported")
    if (d * n) % 2:
        raise ModelError("dn must be even")
    order = "sum_j (|H_j|/n^2 + |H_j|^2/(d^2 n^2) + d^2/n^2)"
    if h.max_degree() > d:
        return _estimate(Fraction(0), "joint-chain", order, 0.0)
    value = Fraction(1)
    placed: list = []
    scale = 0.0
    for e in h.edge_list():
        prev = SimpleGraph(n, placed)
        value *= _refined_regular_exact(prev, e[0], e[1], d, n)
        scale += _regular_error_scale(len(placed), d, n)
        placed.append(e)
    return _estimate(value, "joint-chain", order, scale)


def lambda_cycle(ell: int, d: int, n: int) -> ProbEstimate:
    """Probability that a fixed ell-cycle lies in G(n, d)."""
    total = sum(cycle_phi_sequence(ell, d))
    value = Fraction(d - 1, n) ** ell * (1 - Fraction(total, d * n))
    return _estimate(value, "lambda-cycle", "d^2/n^2", (d / n) ** 2)


def lambda_leading(p: Pattern, d: int, n: int) -> Fraction:
    """prod_v (d)_{deg v} / (dn)^h."""
    num = 1
    for x in p.degrees():
        num *= falling(d, x)
    return Fraction(num, (d * n) ** p.h)


def mu_pattern(p: Pattern, d: int, n: int) -> ProbEstimate:
    """Expected number of copies of p: (n)_t / aut(p) * lambda_p."""
    if p.t > n:
        raise ContractError("pattern has more vertices than the host graph")
    copies = Fraction(falling(n, p.t), aut_size(p))
    if max(p.degrees(), default=0) > d:
        return _estimate(Fraction(0), "mu-pattern", "d^2/n^2", 0.0)
    ell = p.cycle_length()
    if ell is not None:
        lam = lambda_cycle(ell, d, n)
    else:
        lam = joint_subgraph_prob(SimpleGraph(n, p.edges), d, n)
    return _estimate(copies * lam.exact, "mu-pattern", lam.error_order, lam.error_scale, copies=copies)


def triangle_variance_cases(d: int, n: int) -> dict[str, Fraction]:
    """Main terms of the four pair-intersection contributions to Var Z_C3."""
    lam_main = Fraction(d - 1, n) ** 3 * (1 + Fraction(6 * d - 3, d * n))
    return {
        "a": Fraction(d - 1, n) ** 6 * Fraction(falling(n, 6), 2 * d * n),
        "b": -Fraction(falling(n, 5) * (2 * d - 3) * (d - 1) ** 5, 2 * d * n**6),
        "c": Fraction(falling(n, 4) * (d - 1) ** 4 * (d - 2) ** 2, 2 * d * n**5),
        "d": Fraction(falling(n, 3), 6) * lam_main,
    }


def sigma2_triangle(d: int, n: int) -> ProbEstimate:
    """Var Z_C3 with the O(d^8/n^2) remainder dropped."""
    if d < 2 or n <= d:
        raise ContractError("need d >= 2 and n > d")
    cases = triangle_variance_cases(d, n)
    value = cases["d"] - Fraction((d - 1) ** 4 * (d - 2) * falling(n - 1, 3), 2 * d * n**4)
    return _estimate(value, "sigma2-triangle", "d^8/n^2", d**8 / n**2, cases=cases)


# ---------------------------------------------------------------------------
# conditions under which the variance formula applies


@dataclass
class HypothesisReport:
    pattern: Pattern
    d: float
    n: int
    threshold: float
    ratios: dict[str, float]

    @property
    def flags(self) -> dict[str, bool]:
        return {k: r < self.threshold for k, r in self.ratios.items()}

    @property
    def passed(self) -> bool:
        return all(self.flags.values())


def variance_hypotheses(p: Pattern, d: float, n: int, threshold: float = HYPOTHESIS_THRESHOLD) -> HypothesisReport:
    """Numeric size of each smallness condition at (d, n); log-space to survive huge n."""
    if not is_strictly_balanced(p):
        raise ContractError("variance hypotheses need a strictly balanced pattern")
    t, h = p.t, p.h
    ld, ln_ = math.log(d), math.log(n)
    ratios = {
        "d^(h-1)/n^(h-t+1)": math.exp((h - 1) * ld - (h - t + 1) * ln_),
        "d^(h+2)/n^(h-t+2)": math.exp((h + 2) * ld - (h - t + 2) * ln_),
    }
    # leading-order expectation n^t/aut * prod (d)_k / (dn)^h, in logs
    log_mu = t * ln_ - math.log(aut_size(p)) - h * (ld + ln_)
    for x in p.degrees():
        log_mu += sum(math.log(d - i) for i in range(x))
    for j in range(1, h):
        r = rho(p, j)
        ratios[f"mu^(1-{j}/h)/n^(t rho({j}))"] = math.exp((1 - j / h) * log_mu - t * float(r) * ln_)
    return HypothesisReport(p, d, n, threshold, ratios)


def cond_joint_upper_bound(f: SimpleGraph, h: SimpleGraph, d: int, n: int) -> ProbEstimate:
    """Upper band lambda_F (1 + O(1/n + |H|/dn + d^2/n^2)) for P(F | H present)."""
    if f.n != n or h.n != n:
        raise ContractError("graphs must live on [n]")
    overlap = f.edges & h.edges
    if overlap:
        raise ContractError(f"F and H share edges {sorted(overlap)}")
    if len(f) > MAX_UPPER_BOUND_EDGES:
        raise ContractError(f"|F| <= {MAX_UPPER_BOUND_EDGES} required")
    if 4 * len(h) > d * n:
        raise ContractError("need dn - 2|H| >= dn/2")
    lam = joint_subgraph_prob(f, d, n)
    scale = 1 / n + len(h) / (d * n) + (d / n) ** 2
    return _estimate(lam.exact, "corollary-upper", "1/n + |H|/(dn) + d^2/n^2", scale)
