from fractions import Fraction
import pytest

from regsub.errors import CapabilityError, ModelError, UndefinedProbabilityError
from regsub.estimates import ConditioningPair, cond_joint_upper_bound
from regsub.graph_core import Pattern, SimpleGraph, complete_graph, triangle_count
from regsub.oracle import (
    ClassStatsCache,
    CountDistribution,
    count_by_pairings,
    count_pairings_bruteforce,
    enumerate_regular,
    exact_conditional_edge_prob,
    exact_count_distribution,
    exact_edge_probabilities,
    factorial_moments,
    graph_class,
    iter_graphs,
)


class TestEnumeration:
    def test_small_totals(self):
        assert enumerate_regular(4, 3) == 1
        assert enumerate_regular(5, 2) == 12

    @pytest.mark.parametrize("n,d", [(6, 2), (6, 3), (7, 2), (8, 3), (7, 4), (8, 2)])
    def test_two_strategies_agree(self, n, d):
        assert enumerate_regular(n, d) == count_by_pairings(n, d)

    @pytest.mark.parametrize("n,d", [(4, 3), (5, 2), (6, 2), (4, 2)])
    def test_raw_pairings(self, n, d):
        assert count_pairings_bruteforce(n, d) == enumerate_regular(n, d)

    def test_pinned(self):
        assert enumerate_regular(6, 3) == 70
        assert enumerate_regular(8, 3) == 19355

    def test_visitor_sees_valid_distinct_graphs(self):
        seen = set()

        def visit(g):
            assert all(x == 3 for x in g.degrees())
            seen.add(g.edges)

        assert enumerate_regular(6, 3, visitor=visit) == 70
        assert len(seen) == 70

    def test_k4(self):
        assert list(iter_graphs(4, 3)) == [complete_graph(4)]

    def test_odd_sum_rejected(self):
        with pytest.raises(ModelError):
            enumerate_regular(5, 3)

    def test_budget(self):
        with pytest.raises(CapabilityError):
            enumerate_regular(12, 3)
        with pytest.raises(CapabilityError):
            enumerate_regular(11, 4)

    def test_workers_do_not_change_counts(self):
        assert enumerate_regular(8, 3, workers=2) == 19355
        _, p1 = exact_edge_probabilities(8, 3, ConditioningPair.of(8, [(2, 3)]))
        _, p2 = exact_edge_probabilities(8, 3, ConditioningPair.of(8, [(2, 3)]), workers=2)
        assert p1 == p2

    def test_conditioned_class_members(self):
        ctx = ConditioningPair.of(6, [(0, 1), (1, 2), (0, 2)])
        cls = graph_class(6, 3, ctx)
        assert cls.total == len({g.edges for g in cls.graphs})
        for g in cls.graphs:
            assert ctx.h1.edges <= g.edges


class TestExactProbabilities:
    @pytest.mark.parametrize("n,d", [(5, 2), (6, 3), (8, 3), (4, 3), (7, 2), (7, 4), (9, 2)])
    def test_symmetry_identity(self, n, d):
        _, probs = exact_edge_probabilities(n, d)
        assert set(probs.values()) == {Fraction(d, n - 1)}

    def test_k4(self):
        assert exact_conditional_edge_prob(4, 3, None, 0, 1) == 1

    def test_pinned_disjoint_edge(self):
        assert exact_conditional_edge_prob(8, 3, ConditioningPair.of(8, [(2, 3)]), 0, 1) == Fraction(7, 15)

    def test_against_direct_count(self):
        ctx = ConditioningPair.of(6, [(0, 2)], [(3, 4)])
        cls = graph_class(6, 3, ctx)
        direct = Fraction(sum(g.has_edge(0, 1) for g in cls.graphs), cls.total)
        assert exact_conditional_edge_prob(6, 3, ctx, 0, 1) == direct

    def test_empty_class(self):
        ctx = ConditioningPair.of(6, [(0, 1), (0, 2), (0, 3)], [])
        with pytest.raises(UndefinedProbabilityError):
            exact_conditional_edge_prob(6, 2, ctx, 0, 4)
        forbid_all = ConditioningPair(SimpleGraph(6), complete_graph(6).without_edges([(0, 1)]))
        with pytest.raises(UndefinedProbabilityError):
            exact_conditional_edge_prob(6, 3, forbid_all, 0, 1)

    def test_corollary_band(self):
        # one fitted constant C <= 10 covers every context on the grid
        worst = 0.0
        for n in (8, 10):
            for h_edges in ([], [(4, 5)], [(4, 5), (5, 6)], [(3, 4), (4, 5), (3, 5)]):
                for f_edges in ([(0, 1)], [(0, 1), (1, 2)], [(0, 1), (1, 2), (0, 2)]):
                    exact, placed = Fraction(1), list(h_edges)
                    for e in f_edges:
                        exact *= exact_conditional_edge_prob(n, 3, ConditioningPair.of(n, placed), *e)
                        placed.append(e)
                    est = cond_joint_upper_bound(SimpleGraph(n, f_edges), SimpleGraph(n, h_edges), 3, n)
                    worst = max(worst, (float(exact) / est.value - 1) / est.error_scale)
        assert worst <= 10


class TestCountDistribution:
    def test_k4_point_mass(self):
        assert exact_count_distribution(4, 3, Pattern.cycle(3)).pmf == {4: 1}

    def test_c5_triangle_free(self):
        assert exact_count_distribution(5, 2, Pattern.cycle(3)).pmf == {0: 1}

    def test_six_three(self):
        # 60 labeled prisms with 2 triangles, 10 labeled K33 with none
        dist = exact_count_distribution(6, 3, Pattern.cycle(3))
        assert dist.pmf == {0: Fraction(1, 7), 2: Fraction(6, 7)}

    def test_mean_two_ways(self):
        dist = exact_count_distribution(8, 3, Pattern.cycle(3))
        total = [0]

        def visit(g):
            total[0] += triangle_count(g)

        count = enumerate_regular(8, 3, visitor=visit)
        assert dist.mean == Fraction(total[0], count)

    def test_c4_copies(self):
        # edge subsets, not embeddings: K4 holds exactly 3 four-cycles
        assert exact_count_distribution(4, 3, Pattern.cycle(4)).pmf == {3: 1}

    def test_pattern_size_guard(self):
        with pytest.raises(CapabilityError):
            exact_count_distribution(8, 3, Pattern.cycle(6))


class TestFactorialMoments:
    def test_point_masses(self):
        assert factorial_moments(CountDistribution.point_mass(4), 2)[1] == 12
        assert factorial_moments(CountDistribution.point_mass(0), 3) == [0, 0, 0]

    def test_six_three(self):
        dist = exact_count_distribution(6, 3, Pattern.cycle(3))
        assert factorial_moments(dist, 4) == [Fraction(12, 7), Fraction(12, 7), 0, 0]

    def test_bad_k(self):
        with pytest.raises(ValueError):
            factorial_moments(CountDistribution.point_mass(1), 0)

    def test_pmf_validation(self):
        with pytest.raises(ValueError):
            CountDistribution({0: Fraction(1, 2)})


class TestCache:
    def test_roundtrip_and_verify(self, tmp_path):
        path = tmp_path / "cache.json"
        cache = ClassStatsCache(path)
        entry = cache.get(6, 3)
        assert entry["total"] == 70
        assert entry["edge_prob_01"] == "3/5"
        again = ClassStatsCache(path)
        assert again.get(6, 3) == entry
        assert again.verify(6, 3)
