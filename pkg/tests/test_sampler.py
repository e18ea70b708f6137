from collections import Counter, deque
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from scipy import stats

from regsub.errors import ConstructionError, ContractError, ModelError
from regsub.estimates import ConditioningPair
from regsub.graph_core import DegreeSequence, SimpleGraph, complete_graph, cycle_graph, triangle_count
from regsub.oracle import exact_conditional_edge_prob, graph_class
from regsub.sampler import (
    SamplerConfig,
    SwapChain,
    apply_switching,
    backward_switchings,
    batch_means_se,
    conditional_samples,
    conditional_start,
    forward_switchings,
    make_rng,
    sample_many,
    sample_regular,
    sample_triangle_counts,
    switching_ratio_estimate,
)


def swap_neighbors(g: SimpleGraph, ctx: ConditioningPair):
    """Every graph one restricted double swap away, written out directly."""
    out = set()
    movable = [e for e in g.edge_list() if not ctx.h1.has_edge(*e)]
    for (a, b), (c, d) in combinations(movable, 2):
        for x, y in (((a, c), (b, d)), ((a, d), (b, c))):
            if len({a, b, c, d}) < 4:
                continue
            if any(g.has_edge(*e) or ctx.h2.has_edge(*e) for e in (x, y)):
                continue
            out.add(g.without_edges([(a, b), (c, d)]).with_edges([x, y]).edges)
    return out


class TestRng:
    def test_streams_differ_and_repeat(self):
        a = make_rng(5, 1).integers(0, 1 << 30, 4)
        assert (a == make_rng(5, 1).integers(0, 1 << 30, 4)).all()
        assert not (a == make_rng(5, 2).integers(0, 1 << 30, 4)).all()


class TestConfig:
    def test_odd_sum(self):
        with pytest.raises(ModelError):
            SamplerConfig(5, 3)

    def test_bad_method(self):
        with pytest.raises(ModelError):
            SamplerConfig(6, 3, method="magic")

    def test_defaults(self):
        cfg = SamplerConfig(10, 4)
        assert cfg.burn_in_steps() == 400 and cfg.thinning_steps() == 100

    def test_from_mapping(self):
        cfg = SamplerConfig.from_mapping({"n": "8", "d": 3, "seed": "7", "method": "exact-rejection"})
        assert (cfg.n, cfg.d, cfg.seed) == (8, 3, 7)
        with pytest.raises(ModelError):
            SamplerConfig.from_mapping({"n": 8, "d": 3, "colour": "red"})


class TestUnconditional:
    @pytest.mark.parametrize("method", ["exact-rejection", "incremental-pairing", "edge-swap-mcmc"])
    def test_k4(self, method):
        assert sample_regular(SamplerConfig(4, 3, method=method, seed=1)) == complete_graph(4)

    @pytest.mark.parametrize("method", ["exact-rejection", "incremental-pairing", "edge-swap-mcmc"])
    def test_regular_and_reproducible(self, method):
        cfg = SamplerConfig(30, 4, method=method, seed=3)
        a = list(sample_many(cfg, 5))
        assert all(set(g.degrees()) == {4} for g in a)
        assert a == list(sample_many(cfg, 5))

    def test_mcmc_large(self):
        g = sample_regular(SamplerConfig(1000, 10, seed=2))
        assert set(g.degrees()) == {10} and len(g) == 5000

    def test_exact_rejection_uniform(self):
        # all 70 labeled cubic graphs on 6 vertices equally likely
        cfg = SamplerConfig(6, 3, method="exact-rejection", seed=11)
        freq = Counter(g.edges for g in sample_many(cfg, 20000))
        assert len(freq) == 70
        assert stats.chisquare(list(freq.values())).pvalue > 0.001

    def test_mcmc_uniform_small(self):
        cfg = SamplerConfig(6, 3, seed=4, thinning=30)
        freq = Counter(g.edges for g in sample_many(cfg, 7000))
        assert len(freq) == 70
        assert stats.chisquare(list(freq.values())).pvalue > 0.001

    def test_triangle_counts_match_graphs(self):
        cfg = SamplerConfig(40, 5, seed=9)
        counts = sample_triangle_counts(cfg, 6)
        assert counts.tolist() == [triangle_count(g) for g in sample_many(cfg, 6)]


class TestConditional:
    def test_spanning_h1(self):
        # H1 is already a full 2-regular graph, so it is the only member
        ctx = ConditioningPair(cycle_graph(7), SimpleGraph(7))
        cfg = SamplerConfig(7, 2, seed=0)
        assert all(g == cycle_graph(7) for g in conditional_samples(ctx, cfg.dseq, cfg, 3))

    def test_constraints_hold(self):
        ctx = ConditioningPair.of(20, [(0, 1), (1, 2)], [(0, 3), (4, 5)])
        cfg = SamplerConfig(20, 4, seed=1)
        for g in conditional_samples(ctx, cfg.dseq, cfg, 20):
            assert set(g.degrees()) == {4}
            assert ctx.h1.edges <= g.edges and not (ctx.h2.edges & g.edges)

    def test_triangle_h1_uniform(self):
        ctx = ConditioningPair.of(6, [(0, 1), (1, 2), (0, 2)])
        members = graph_class(6, 3, ctx).graphs
        cfg = SamplerConfig(6, 3, seed=2, thinning=30)
        freq = Counter(g.edges for g in conditional_samples(ctx, cfg.dseq, cfg, 3000))
        assert set(freq) == {g.edges for g in members}
        assert stats.chisquare([freq[g.edges] for g in members]).pvalue > 0.001

    def test_impossible(self):
        ctx = ConditioningPair(SimpleGraph(6), complete_graph(6))
        with pytest.raises(ConstructionError):
            conditional_start(ctx, DegreeSequence.regular(6, 3), make_rng(0))
        too_many = ConditioningPair.of(6, [(0, 1), (0, 2), (0, 3), (0, 4)])
        with pytest.raises(ConstructionError):
            conditional_start(too_many, DegreeSequence.regular(6, 3), make_rng(0))

    @pytest.mark.parametrize("h1,h2", [
        ([], []), ([(0, 1)], []), ([], [(0, 1)]), ([(0, 1), (1, 2)], [(3, 4)]),
        ([(0, 1), (1, 2), (0, 2)], []), ([(0, 1), (2, 3)], [(0, 2), (1, 3)]),
    ])
    def test_chain_connects_class(self, h1, h2):
        ctx = ConditioningPair.of(6, h1, h2)
        target = {g.edges for g in graph_class(6, 3, ctx).graphs}
        start = conditional_start(ctx, DegreeSequence.regular(6, 3), make_rng(0))
        seen, todo = {start.edges}, deque([start])
        while todo:
            for e in swap_neighbors(todo.popleft(), ctx):
                if e not in seen:
                    seen.add(e)
                    todo.append(SimpleGraph(6, e))
        assert seen == target

    def test_chain_respects_forbidden(self):
        chain = SwapChain(6, cycle_graph(6).edge_list(), forbidden=[(0, 2), (1, 3)], rng=make_rng(1))
        chain.step(5000)
        g = chain.graph()
        assert set(g.degrees()) == {2} and not g.has_edge(0, 2) and not g.has_edge(1, 3)


class TestSwitchings:
    def test_k4_forward_empty(self):
        c, pairs = forward_switchings(complete_graph(4), 0, 1)
        assert c.f == 0 and pairs == []
        assert c.identity_value() == 0

    def test_c6(self):
        g = cycle_graph(6)
        c, pairs = forward_switchings(g, 0, 1)
        # 3 edges avoid u and v, 6 orientations; (5, 4) and (3, 2) are blocked
        assert c.identity_value() == c.f == len(pairs) == 4
        h = g.without_edges([(0, 1)])
        b, _ = backward_switchings(h, 0, 1)
        assert b.identity_value() == b.b

    def test_wrong_side(self):
        with pytest.raises(ContractError):
            forward_switchings(cycle_graph(6), 0, 2)
        with pytest.raises(ContractError):
            backward_switchings(cycle_graph(6), 0, 1)

    def test_saturated_endpoint(self):
        # u's only free stub is spent in H1, so no backward switching exists
        g = SimpleGraph(6, [(0, 2), (2, 4), (4, 1), (1, 3), (3, 5), (5, 0)])
        ctx = ConditioningPair.of(6, [(0, 2), (0, 5)])
        b, pairs = backward_switchings(g, 0, 1, ctx)
        assert b.b == 0 and pairs == []

    def test_roundtrip_and_invariants(self):
        for seed in range(20):
            g = sample_regular(SamplerConfig(10, 3, seed=seed))
            u, v = next(e for e in g.edge_list())
            _, pairs = forward_switchings(g, u, v)
            for x, y in pairs[:5]:
                h = apply_switching(g, u, v, x, y, "forward")
                assert h.degrees() == g.degrees() and not h.has_edge(u, v)
                _, back = backward_switchings(h, u, v)
                assert (x, y) in back
                assert apply_switching(h, u, v, x, y, "backward") == g

    def test_relabel_invariance(self):
        g = sample_regular(SamplerConfig(10, 4, seed=3))
        u, v = g.edge_list()[0]
        perm = np.random.default_rng(1).permutation(10)
        h = SimpleGraph(10, [(perm[a], perm[b]) for a, b in g.edge_list()])
        assert forward_switchings(g, u, v)[0].f == forward_switchings(h, perm[u], perm[v])[0].f

    def test_invalid_move(self):
        g = cycle_graph(6)
        with pytest.raises(ContractError):
            apply_switching(g, 0, 1, 1, 2, "forward")
        with pytest.raises(ContractError):
            apply_switching(g, 0, 1, 2, 3, "sideways")

    def test_identities_random(self):
        rng = np.random.default_rng(5)
        for seed in range(60):
            n = int(rng.integers(6, 13))
            d = int(rng.choice([k for k in range(2, min(n - 1, 6)) if n * k % 2 == 0]))
            g = sample_regular(SamplerConfig(n, d, seed=seed))
            h1 = [e for e in g.edge_list() if rng.random() < 0.15]
            h2 = [e for e in combinations(range(n), 2) if not g.has_edge(*e) and rng.random() < 0.15]
            ctx = ConditioningPair.of(n, h1, h2)
            u, v = (int(x) for x in rng.choice(n, 2, replace=False))
            if ctx.union.has_edge(u, v):
                continue
            c = forward_switchings(g, u, v, ctx)[0] if g.has_edge(u, v) else backward_switchings(g, u, v, ctx)[0]
            assert c.count == c.identity_value()


class TestRatio:
    def test_batch_means(self):
        x = np.random.default_rng(0).normal(size=4000)
        assert 0.5 < batch_means_se(x) / (1 / np.sqrt(4000)) < 1.5
        assert np.isnan(batch_means_se([1.0]))

    def test_matches_oracle(self):
        ctx = ConditioningPair.of(8, [(2, 3)])
        cfg = SamplerConfig(8, 3, seed=7)
        est = switching_ratio_estimate(ctx, cfg.dseq, 0, 1, cfg, samples=400)
        exact = exact_conditional_edge_prob(8, 3, ctx, 0, 1)
        assert exact == Fraction(7, 15)
        assert abs(est.value - float(exact)) <= 3 * est.error_scale

    def test_unconditioned(self):
        cfg = SamplerConfig(10, 3, seed=1)
        est = switching_ratio_estimate(ConditioningPair.empty(10), cfg.dseq, 0, 1, cfg, samples=300)
        assert abs(est.value - 3 / 9) <= 3 * est.error_scale

    def test_saturated_is_zero(self):
        ctx = ConditioningPair.of(6, [(0, 2), (0, 3), (0, 4)])
        cfg = SamplerConfig(6, 3, seed=0)
        assert switching_ratio_estimate(ctx, cfg.dseq, 0, 1, cfg).value == 0.0

    def test_pair_in_context(self):
        ctx = ConditioningPair.of(6, [(0, 1)])
        cfg = SamplerConfig(6, 3)
        with pytest.raises(ContractError):
            switching_ratio_estimate(ctx, cfg.dseq, 0, 1, cfg)
