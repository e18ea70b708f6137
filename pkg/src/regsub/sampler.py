"""Random regular graphs and the uv-switching.

Three unconditional backends are offered:

``exact-rejection``
    pairing model, rejected until simple; exactly uniform, practical for d <= 4.
``incremental-pairing``
    stubs are shuffled and paired round by round, keeping the simple pairs;
    fast but only approximately uniform.
``edge-swap-mcmc``
    incremental pairing followed by lazy double edge swaps (uniform
    stationary distribution); the default for large d.

Conditional sampling (H1 present, H2 absent) uses the same swap chain with
H1 edges frozen and H2 pairs forbidden.  All randomness comes from Philox
streams keyed by ``(seed, stream)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import _kernels
from .errors import ConstructionError, ContractError, ModelError, RetryLimitError, UndefinedProbabilityError
from .estimates import ConditioningPair, ProbEstimate
from .graph_core import DegreeSequence, SimpleGraph

METHODS = ("exact-rejection", "incremental-pairing", "edge-swap-mcmc")
BURN_IN_FACTOR = 20
THINNING_FACTOR = 5


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based generator for one (seed, stream...) key."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class SamplerConfig:
    n: int
    d: int | DegreeSequence
    method: str = "edge-swap-mcmc"
    seed: int = 0
    stream: int = 0
    burn_in: int | None = None  # swap attempts; default 20 |E|
    thinning: int | None = None  # swap attempts between samples; default 5 |E|
    max_tries: int = 100_000

    def __post_init__(self):
        if self.method not in METHODS:
            raise ModelError(f"unknown method {self.method!r}; choose from {METHODS}")
        dseq = self.dseq
        if len(dseq) != self.n:
            raise ModelError("degree sequence length differs from n")
        if dseq.M % 2:
            raise ModelError("degree sum must be even")
        if dseq.max_degree >= self.n:
            raise ModelError("need d < n")
        if self.burn_in is not None and self.burn_in < 0:
            raise ModelError("burn_in must be >= 0")
        if self.thinning is not None and self.thinning < 0:
            raise ModelError("thinning must be >= 0")

    @property
    def dseq(self) -> DegreeSequence:
        if isinstance(self.d, DegreeSequence):
            return self.d
        return DegreeSequence.regular(self.n, int(self.d))

    @property
    def n_edges(self) -> int:
        return self.dseq.M // 2

    def burn_in_steps(self, movable: int | None = None) -> int:
        m = self.n_edges if movable is None else movable
        return BURN_IN_FACTOR * m if self.burn_in is None else self.burn_in

    def thinning_steps(self, movable: int | None = None) -> int:
        m = self.n_edges if movable is None else movable
        return THINNING_FACTOR * m if self.thinning is None else self.thinning

    @classmethod
    def from_mapping(cls, data: dict) -> "SamplerConfig":
        """Build from a flat key-value mapping (config file or CLI flags)."""
        keys = {"n", "d", "method", "seed", "stream", "burn_in", "thinning", "max_tries"}
        extra = set(data) - keys
        if extra:
            raise ModelError(f"unknown sampler keys {sorted(extra)}")
        kw = dict(data)
        for k in ("n", "seed", "stream", "burn_in", "thinning", "max_tries"):
            if kw.get(k) is not None:
                kw[k] = int(kw[k])
        if isinstance(kw.get("d"), (list, tuple)):
            kw["d"] = DegreeSequence(tuple(kw["d"]))
        elif kw.get("d") is not None:
            kw["d"] = int(kw["d"])
        return cls(**kw)


# ---------------------------------------------------------------------------
# pairing-model backends


def _points(dseq: DegreeSequence) -> np.ndarray:
    return np.repeat(np.arange(len(dseq)), dseq.values)


def pairing_rejection_batch(dseq: DegreeSequence, rng: np.random.Generator, batch: int) -> list[np.ndarray]:
    """Draw ``batch`` uniform pairings; return the simple ones as (m, 2) edge arrays."""
    n = len(dseq)
    pts = _points(dseq)
    perm = rng.permuted(np.broadcast_to(pts, (batch, pts.size)), axis=1)
    a, b = perm[:, 0::2], perm[:, 1::2]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    keys = np.sort(lo * n + hi, axis=1)
    bad = (a == b).any(axis=1)
    if keys.shape[1] > 1:
        bad |= (keys[:, 1:] == keys[:, :-1]).any(axis=1)
    out = []
    for row in np.flatnonzero(~bad):
        k = keys[row]
        out.append(np.stack([k // n, k % n], axis=1))
    return out


def _rejection_stream(dseq: DegreeSequence, rng, max_tries: int) -> Iterator[np.ndarray]:
    tries = 0
    batch = 256
    while True:
        if tries >= max_tries:
            raise RetryLimitError(f"no simple pairing in {max_tries} attempts")
        tries += batch
        yield from pairing_rejection_batch(dseq, rng, batch)


def incremental_pairing(dseq: DegreeSequence, rng: np.random.Generator, max_tries: int = 1000) -> np.ndarray:
    """Shuffle the open stubs, keep every pair that is simple and new, repeat."""
    n = len(dseq)
    for _ in range(max_tries):
        edges: set[int] = set()
        stubs = _points(dseq)
        while stubs.size:
            rng.shuffle(stubs)
            a, b = stubs[0::2], stubs[1::2]
            lo, hi = np.minimum(a, b), np.maximum(a, b)
            leftover = []
            for x, y in zip(lo.tolist(), hi.tolist()):
                key = x * n + y
                if x != y and key not in edges:
                    edges.add(key)
                else:
                    leftover += (x, y)
            if len(leftover) == stubs.size:
                # stuck if no open pair could ever be joined
                left = sorted(set(leftover))
                if not any(p * n + q not in edges for i, p in enumerate(left) for q in left[i + 1:]):
                    break
            stubs = np.array(leftover, dtype=np.int64)
        else:
            keys = np.array(sorted(edges), dtype=np.int64)
            return np.stack([keys // n, keys % n], axis=1) if keys.size else np.zeros((0, 2), np.int64)
    raise RetryLimitError(f"incremental pairing failed {max_tries} times")


# ---------------------------------------------------------------------------
# swap chain


class SwapChain:
    """Double edge swap chain on graphs containing ``fixed`` and avoiding ``forbidden``."""

    def __init__(self, n: int, edges, fixed=(), forbidden=(), rng: np.random.Generator | None = None):
        self.n = n
        fixed_set = {tuple(sorted(e)) for e in fixed}
        all_edges = [tuple(sorted(map(int, e))) for e in edges]
        deg = np.zeros(n, dtype=np.int64)
        for a, b in all_edges:
            deg[a] += 1
            deg[b] += 1
        width = max(int(deg.max(initial=0)), 1)
        self.nbr = -np.ones((n, width), dtype=np.int64)
        fill = np.zeros(n, dtype=np.int64)
        for a, b in all_edges:
            self.nbr[a, fill[a]] = b
            self.nbr[b, fill[b]] = a
            fill[a] += 1
            fill[b] += 1
        self.deg = deg
        self.fixed = sorted(fixed_set)
        movable = [e for e in all_edges if e not in fixed_set]
        self.edges = np.array(movable, dtype=np.int64).reshape(-1, 2)
        keys = sorted(min(a, b) * n + max(a, b) for a, b in forbidden)
        self.forb_keys = np.array(keys, dtype=np.int64)
        self.rng = rng if rng is not None else make_rng(0)
        self.attempts = 0
        self.accepted = 0

    @property
    def n_movable(self) -> int:
        return self.edges.shape[0]

    def step(self, attempts: int, chunk: int = 1 << 20) -> int:
        m = self.n_movable
        if m < 2 or attempts <= 0:
            self.attempts += max(attempts, 0)
            return 0
        acc = 0
        left = attempts
        while left:
            k = min(left, chunk)
            r = self.rng.integers(0, m, size=(2, k))
            bits = self.rng.integers(0, 2, size=k, dtype=np.int8)
            acc += _kernels.swap_steps(self.nbr, self.deg, self.edges, self.forb_keys, self.n, r[0], r[1], bits)
            left -= k
        self.attempts += attempts
        self.accepted += acc
        return acc

    def edge_list(self) -> list[tuple[int, int]]:
        out = [tuple(sorted(map(int, e))) for e in self.edges] + list(self.fixed)
        return sorted(out)

    def graph(self) -> SimpleGraph:
        return SimpleGraph(self.n, self.edge_list())

    def triangles(self) -> int:
        return int(_kernels.count_triangles(self.nbr, self.deg))


# ---------------------------------------------------------------------------
# unconditional sampling


def _initial_edges(cfg: SamplerConfig, rng) -> np.ndarray:
    return incremental_pairing(cfg.dseq, rng, max_tries=min(cfg.max_tries, 1000))


def regular_chain(cfg: SamplerConfig) -> SwapChain:
    """Burnt-in swap chain started from an incremental pairing."""
    rng = make_rng(cfg.seed, cfg.stream)
    chain = SwapChain(cfg.n, _initial_edges(cfg, rng), rng=rng)
    chain.step(cfg.burn_in_steps(chain.n_movable))
    return chain


def sample_many(cfg: SamplerConfig, count: int) -> Iterator[SimpleGraph]:
    """``count`` graphs from the configured backend.

    For the swap chain consecutive draws are separated by the thinning.
    """
    if cfg.method == "exact-rejection":
        rng = make_rng(cfg.seed, cfg.stream)
        stream = _rejection_stream(cfg.dseq, rng, cfg.max_tries * max(count, 1))
        for _ in range(count):
            yield SimpleGraph(cfg.n, next(stream).tolist())
    elif cfg.method == "incremental-pairing":
        rng = make_rng(cfg.seed, cfg.stream)
        for _ in range(count):
            yield SimpleGraph(cfg.n, _initial_edges(cfg, rng).tolist())
    else:
        chain = regular_chain(cfg)
        for k in range(count):
            if k:
                chain.step(cfg.thinning_steps(chain.n_movable))
            yield chain.graph()


def sample_regular(cfg: SamplerConfig) -> SimpleGraph:
    return next(sample_many(cfg, 1))


def sample_triangle_counts(cfg: SamplerConfig, count: int) -> np.ndarray:
    """Triangle counts of ``count`` draws, without building SimpleGraph objects."""
    out = np.empty(count, dtype=np.int64)
    if cfg.method == "edge-swap-mcmc":
        chain = regular_chain(cfg)
        for k in range(count):
            if k:
                chain.step(cfg.thinning_steps(chain.n_movable))
            out[k] = chain.triangles()
        return out
    for k, g in enumerate(sample_many(cfg, count)):
        out[k] = SwapChain(cfg.n, g.edge_list()).triangles()
    return out


# ---------------------------------------------------------------------------
# conditional sampling


def conditional_start(ctx: ConditioningPair, dseq: DegreeSequence, rng, max_tries: int = 20) -> SimpleGraph:
    """Some graph with degree sequence dseq containing H1 and avoiding H2.

    Largest-deficiency-first greedy completion, with two-edge repairs when
    the greedy step is blocked.
    """
    n = ctx.n
    if len(dseq) != n:
        raise ContractError("degree sequence length differs from n")
    h1_deg = ctx.h1.degrees()
    if any(a > b for a, b in zip(h1_deg, dseq.values)):
        raise ConstructionError("H1 has a vertex of degree above its target")
    forbidden = set(ctx.h2.edges)

    def allowed(adj, a, b):
        return a != b and b not in adj[a] and (min(a, b), max(a, b)) not in forbidden

    for _ in range(max_tries):
        adj = [set(ctx.h1.neighbor_set(v)) for v in range(n)]
        deficit = [dseq[v] - h1_deg[v] for v in range(n)]
        added: set[tuple[int, int]] = set()
        stuck = False
        while any(deficit) and not stuck:
            noise = rng.random(n)
            order = sorted(range(n), key=lambda v: (-deficit[v], noise[v]))
            a = order[0]
            partners = [b for b in order[1:] if deficit[b] > 0 and allowed(adj, a, b)]
            if partners:
                b = partners[0]
                adj[a].add(b), adj[b].add(a)
                added.add((min(a, b), max(a, b)))
                deficit[a] -= 1
                deficit[b] -= 1
                continue
            others = [b for b in order[1:] if deficit[b] > 0]
            second = others[0] if others else (a if deficit[a] >= 2 else None)
            if second is None:
                stuck = True
                break
            movable = sorted(added)
            rng.shuffle(movable)
            for x0, y0 in movable:
                done = False
                for x, y in ((x0, y0), (y0, x0)):
                    if a in (x, y) or second in (x, y):
                        continue
                    if allowed(adj, a, x) and allowed(adj, second, y):
                        adj[x].discard(y), adj[y].discard(x)
                        added.discard((x0, y0))
                        adj[a].add(x), adj[x].add(a)
                        adj[second].add(y), adj[y].add(second)
                        added.add((min(a, x), max(a, x)))
                        added.add((min(second, y), max(second, y)))
                        deficit[a] -= 1
                        deficit[second] -= 1
                        done = True
                        break
                if done:
                    break
            else:
                stuck = True
        if not stuck:
            return SimpleGraph(n, list(ctx.h1.edges) + sorted(added))
    raise ConstructionError("could not build a graph satisfying H1/H2 constraints")


def conditional_chain(ctx: ConditioningPair, dseq: DegreeSequence, cfg: SamplerConfig, *stream: int) -> SwapChain:
    rng = make_rng(cfg.seed, cfg.stream, *stream)
    start = conditional_start(ctx, dseq, rng)
    chain = SwapChain(ctx.n, start.edge_list(), fixed=ctx.h1.edges, forbidden=ctx.h2.edges, rng=rng)
    chain.step(cfg.burn_in_steps(chain.n_movable))
    return chain


def conditional_samples(ctx: ConditioningPair, dseq: DegreeSequence, cfg: SamplerConfig, count: int,
                        *stream: int) -> Iterator[SimpleGraph]:
    chain = conditional_chain(ctx, dseq, cfg, *stream)
    for k in range(count):
        if k:
            chain.step(cfg.thinning_steps(chain.n_movable))
        yield chain.graph()


def conditional_sample(ctx: ConditioningPair, dseq: DegreeSequence, cfg: SamplerConfig) -> SimpleGraph:
    """One approximately uniform member of {G : H1 in G, H2 disjoint from G}."""
    return next(conditional_samples(ctx, dseq, cfg, 1))


# ---------------------------------------------------------------------------
# the uv-switching


@dataclass
class SwitchingCounts:
    """Brute-force count plus the inclusion-exclusion terms it decomposes into.

    forward: ``base`` = M~ - 2(d~_u + d~_v) + 2, terms X_u, X_v, X_uv.
    backward: ``base`` = d~_u d~_v, terms Y_1, Y_2.
    """

    direction: str
    count: int
    base: int
    terms: dict[str, int] = field(default_factory=dict)

    @property
    def f(self) -> int:
        return self.count

    @property
    def b(self) -> int:
        return self.count

    def identity_value(self) -> int:
        t = self.terms
        if self.direction == "forward":
            return self.base - t["X_u"] - t["X_v"] + t["X_uv"]
        return self.base - t["Y_1"] - t["Y_2"]


def _check_member(g: SimpleGraph, ctx: ConditioningPair) -> None:
    if not ctx.h1.edges <= g.edges:
        raise ContractError("graph does not contain H1")
    if ctx.h2.edges & g.edges:
        raise ContractError("graph meets H2")


def forward_switchings(g: SimpleGraph, u: int, v: int, ctx: ConditioningPair | None = None):
    """All (x, y) with xy in G-H1, u,v,x,y distinct, ux and vy outside G+H2."""
    ctx = ctx or ConditioningPair.empty(g.n)
    if not g.has_edge(u, v):
        raise ContractError("forward switching needs uv in G")
    _check_member(g, ctx)
    h1, h2 = ctx.h1, ctx.h2
    blocked = lambda a, b: g.has_edge(a, b) or h2.has_edge(a, b)  # noqa: E731
    du = g.degree_of(u) - h1.degree_of(u)
    dv = g.degree_of(v) - h1.degree_of(v)
    m_t = 2 * (len(g) - len(h1))
    xu = xv = xuv = 0
    pairs = []
    for a, b in g.edge_list():
        if h1.has_edge(a, b):
            continue
        for x, y in ((a, b), (b, a)):
            if len({u, v, x, y}) < 4:
                continue
            bu, bv = blocked(u, x), blocked(v, y)
            xu += bu
            xv += bv
            xuv += bu and bv
            if not (bu or bv):
                pairs.append((x, y))
    counts = SwitchingCounts("forward", len(pairs), m_t - 2 * (du + dv) + 2, {"X_u": xu, "X_v": xv, "X_uv": xuv})
    return counts, pairs


def backward_switchings(g: SimpleGraph, u: int, v: int, ctx: ConditioningPair | None = None):
    """All (x, y) with xu, yv in G-H1, x != y and xy outside G+H2."""
    ctx = ctx or ConditioningPair.empty(g.n)
    if g.has_edge(u, v):
        raise ContractError("backward switching needs uv outside G")
    _check_member(g, ctx)
    h1, h2 = ctx.h1, ctx.h2
    xs = [x for x in g.neighbors(u) if not h1.has_edge(x, u)]
    ys = [y for y in g.neighbors(v) if not h1.has_edge(y, v)]
    y1 = y2 = 0
    pairs = []
    for x in xs:
        for y in ys:
            if x == y:
                y2 += 1
            elif g.has_edge(x, y) or h2.has_edge(x, y):
                y1 += 1
            else:
                pairs.append((x, y))
    counts = SwitchingCounts("backward", len(pairs), len(xs) * len(ys), {"Y_1": y1, "Y_2": y2})
    return counts, pairs


def apply_switching(g: SimpleGraph, u: int, v: int, x: int, y: int, direction: str,
                    ctx: ConditioningPair | None = None) -> SimpleGraph:
    """forward: uv, xy -> ux, vy.  backward: ux, vy -> uv, xy."""
    ctx = ctx or ConditioningPair.empty(g.n)
    _check_member(g, ctx)
    h1, h2 = ctx.h1, ctx.h2
    if direction == "forward":
        ok = (
            g.has_edge(u, v)
            and len({u, v, x, y}) == 4
            and g.has_edge(x, y)
            and not h1.has_edge(x, y)
            and not (g.has_edge(u, x) or h2.has_edge(u, x))
            and not (g.has_edge(v, y) or h2.has_edge(v, y))
        )
        if not ok:
            raise ContractError(f"({x}, {y}) is not a valid forward switching")
        return g.without_edges([(u, v), (x, y)]).with_edges([(u, x), (v, y)])
    if direction == "backward":
        ok = (
            not g.has_edge(u, v)
            and x != y
            and g.has_edge(x, u)
            and not h1.has_edge(x, u)
            and g.has_edge(y, v)
            and not h1.has_edge(y, v)
            and not (g.has_edge(x, y) or h2.has_edge(x, y))
        )
        if not ok:
            raise ContractError(f"({x}, {y}) is not a valid backward switching")
        return g.without_edges([(u, x), (v, y)]).with_edges([(u, v), (x, y)])
    raise ContractError(f"direction must be 'forward' or 'backward', got {direction!r}")


# ---------------------------------------------------------------------------
# Monte Carlo form of the ratio identity


@dataclass
class SwitchingSample:
    """Per-draw forward terms on G+ and backward terms on G-."""

    forward: dict[str, np.ndarray]
    backward: dict[str, np.ndarray]


def switching_statistics(ctx: ConditioningPair, dseq: DegreeSequence, u: int, v: int,
                         cfg: SamplerConfig, samples: int) -> SwitchingSample:
    plus, minus = ctx.forcing(u, v), ctx.forbidding(u, v)
    fwd = {k: [] for k in ("f", "base", "X_u", "X_v", "X_uv")}
    bwd = {k: [] for k in ("b", "base", "Y_1", "Y_2")}
    for g in conditional_samples(plus, dseq, cfg, samples, 1):
        c, _ = forward_switchings(g, u, v, ctx)
        fwd["f"].append(c.count)
        fwd["base"].append(c.base)
        for k, val in c.terms.items():
            fwd[k].append(val)
    for g in conditional_samples(minus, dseq, cfg, samples, 2):
        c, _ = backward_switchings(g, u, v, ctx)
        bwd["b"].append(c.count)
        bwd["base"].append(c.base)
        for k, val in c.terms.items():
            bwd[k].append(val)
    return SwitchingSample(
        {k: np.asarray(x, dtype=float) for k, x in fwd.items()},
        {k: np.asarray(x, dtype=float) for k, x in bwd.items()},
    )


def batch_means_se(x: np.ndarray, batches: int = 20) -> float:
    """Standard error of the mean of a (possibly autocorrelated) chain output."""
    x = np.asarray(x, dtype=float)
    nb = min(batches, x.size)
    if nb < 2:
        return float("nan")
    means = np.array([part.mean() for part in np.array_split(x, nb)])
    return float(means.std(ddof=1) / np.sqrt(nb))


def switching_ratio_estimate(ctx: ConditioningPair, dseq: DegreeSequence, u: int, v: int,
                             cfg: SamplerConfig, samples: int = 400) -> ProbEstimate:
    """E b / (E f + E b) with b averaged over G- and f over G+; delta-method SE."""
    if ctx.union.has_edge(u, v) or u == v:
        raise ContractError("uv must lie outside H1 and H2")
    res_u = dseq[u] - ctx.h1.degree_of(u)
    res_v = dseq[v] - ctx.h1.degree_of(v)
    if res_u <= 0 or res_v <= 0:
        return ProbEstimate(0.0, "switching-mc", "monte-carlo", None, 0.0, {"se": 0.0, "saturated": True})
    stats = switching_statistics(ctx, dseq, u, v, cfg, samples)
    f, b = stats.forward["f"], stats.backward["b"]
    F, B = f.mean(), b.mean()
    se_f, se_b = batch_means_se(f), batch_means_se(b)
    if F + B == 0:
        raise UndefinedProbabilityError("no switchings observed in either class")
    value = B / (F + B)
    se = float(np.sqrt((F * se_b) ** 2 + (B * se_f) ** 2) / (F + B) ** 2)
    return ProbEstimate(
        float(value), "switching-mc", "monte-carlo", None, se,
        {"se": se, "mean_f": float(F), "mean_b": float(B), "samples": samples},
    )
