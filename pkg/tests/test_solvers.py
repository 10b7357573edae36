import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import dags
from oracles import naive_optimum, pairs_bfs

import mci.solvers as solvers
from mci.errors import PreconditionError, SolverGuardError
from mci.generators import gen_random_dag, gen_x3c_planted
from mci.graph import Dag, classify, count_pairs, is_strongly_connected
from mci.solvers import (
    ClassBudgetPartition,
    Evaluator,
    IsolatedPathPlan,
    augment_strongly_connected,
    brute_force,
    budget_partitions,
    estimate,
    large_budget_value,
    matching_upper_bound,
    solve,
    solve_by_matching,
    solve_by_st,
    solve_by_v_minus_b,
    solve_large_budget,
)
from mci.structure import format_solution

FPT = [solve_by_st, solve_by_v_minus_b, solve_by_matching]


def fan_in(k):
    """k sources all pointing at sink k."""
    return Dag.from_edges(k + 1, [(i, k) for i in range(k)])


def k33():
    return Dag.from_edges(6, [(i, j) for i in range(3) for j in range(3, 6)])


def pair_bound(n, side, q, B):
    return n * n - (n - 1) * (side + q - B)


def check_outcome(g, B, out):
    sol = out.solution
    assert sol.budget_used <= B
    assert not any(g.has_edge(u, v) or u == v for u, v in sol.added)
    assert len(set(sol.added)) == len(sol.added)
    assert out.value == pairs_bfs(g.n, g.edges + list(sol.added))


class TestEvaluator:
    @settings(max_examples=150)
    @given(dags(min_n=2, max_n=7), st.data())
    def test_matches_bfs(self, g, data):
        pool = [(u, v) for u in range(g.n) for v in range(g.n) if u != v and not g.has_edge(u, v)]
        assume(pool)
        added = data.draw(st.lists(st.sampled_from(pool), unique=True, max_size=4))
        assert Evaluator(g).value(added) == pairs_bfs(g.n, g.edges + added)


class TestBruteForce:
    def test_zero_budget(self, path3):
        out = brute_force(path3, 0)
        assert out.value == 6 and out.solution.added == ()

    def test_two_edges(self, two_edges):
        out = brute_force(two_edges, 1)
        assert out.value == 10
        assert out.solution.added == ((1, 2),)
        assert out.strategy == "oracle"

    def test_x3c_yes_q1(self):
        _, red = gen_x3c_planted(1, 2, True, seed=0)
        assert brute_force(red.graph, red.budget).value == 43 == red.target

    def test_guard(self):
        g = gen_random_dag(8, 0.2, 1)
        with pytest.raises(SolverGuardError) as err:
            brute_force(g, 3, max_candidates=100)
        assert err.value.cap == 100

    def test_budget_beyond_non_edges(self):
        g = Dag.from_edges(2, [(0, 1)])
        assert brute_force(g, 5).value == 4

    @settings(max_examples=60)
    @given(dags(max_n=5), st.integers(0, 2))
    def test_against_naive(self, g, B):
        assert brute_force(g, B).value == naive_optimum(g.n, g.edges, B)


class TestStrongAugmentation:
    def test_edge(self):
        sol = augment_strongly_connected(Dag.from_edges(2, [(0, 1)]), 1)
        assert sol.added == ((1, 0),) and sol.value == 4

    def test_two_edges(self, two_edges):
        sol = augment_strongly_connected(two_edges, 2)
        assert sol.budget_used == 2 and sol.value == 16
        assert is_strongly_connected(two_edges.with_edges(sol.added))

    def test_below_threshold(self, two_edges):
        with pytest.raises(PreconditionError, match="if and only if"):
            augment_strongly_connected(two_edges, 1)

    def test_trivial(self):
        assert augment_strongly_connected(Dag.from_edges(1, []), 0).value == 1

    def test_only_isolated(self):
        g = Dag.from_edges(3, [])
        sol = augment_strongly_connected(g, 3)
        assert sol.budget_used == 3 and is_strongly_connected(g.with_edges(sol.added))

    @pytest.mark.parametrize("seed", range(30))
    def test_random(self, seed):
        g = gen_random_dag(5 + seed, 0.08 + 0.01 * (seed % 7), seed)
        t = classify(g).threshold
        sol = augment_strongly_connected(g, t)
        h = g.with_edges(sol.added)
        assert sol.budget_used <= t
        assert is_strongly_connected(h)
        assert count_pairs(h) == g.n * g.n == sol.value

    @settings(max_examples=100)
    @given(dags(min_n=2, max_n=6))
    def test_one_short_is_not_enough(self, g):
        t = classify(g).threshold
        assert brute_force(g, t - 1).value < g.n * g.n


class TestLargeBudget:
    @pytest.mark.parametrize("B, value", [(1, 10), (2, 13)])
    def test_star(self, star3, B, value):
        out = solve_large_budget(star3, B)
        assert out.value == value == brute_force(star3, B).value
        assert out.strategy == "large-budget"

    def test_closed_form(self):
        assert large_budget_value(4, 3, 1) == 10
        assert large_budget_value(7, 6, 4) == 37

    def test_transposed_orientation(self):
        g = Dag.from_edges(4, [(0, 1), (0, 2), (0, 3)])
        out = solve_large_budget(g, 2)
        assert out.value == 13
        check_outcome(g, 2, out)

    def test_precondition(self, star3, two_edges):
        with pytest.raises(PreconditionError):
            solve_large_budget(star3, 0)
        with pytest.raises(PreconditionError):
            solve_large_budget(Dag.from_edges(3, [(0, 1)]), 1)

    @settings(max_examples=80)
    @given(dags(min_n=2, max_n=7), st.data())
    def test_matches_oracle(self, g, data):
        cls = classify(g)
        assume(not cls.isolated)
        big = max(len(cls.sources), len(cls.sinks))
        lo = g.n - big
        assume(lo <= big)
        B = data.draw(st.integers(max(lo, 0), big))
        out = solve_large_budget(g, B)
        check_outcome(g, B, out)
        assert out.value == large_budget_value(g.n, big, B)
        if B <= 3:
            assert out.value == brute_force(g, B).value


class TestFixedExamples:
    @pytest.mark.parametrize("solver", FPT)
    def test_two_edges(self, solver, two_edges):
        assert solver(two_edges, 1).value == 10

    @pytest.mark.parametrize("solver", FPT)
    def test_path_plus_isolated(self, solver):
        g = Dag.from_edges(4, [(0, 1), (1, 2)])
        out = solver(g, 1)
        assert out.value == 10 == brute_force(g, 1).value

    @pytest.mark.parametrize("solver", FPT)
    @pytest.mark.parametrize("B, value", [(1, 10), (2, 13)])
    def test_star(self, solver, star3, B, value):
        assert solver(star3, B).value == value

    @pytest.mark.parametrize("solver", FPT)
    def test_trivial(self, solver):
        out = solver(Dag.from_edges(1, []), 3)
        assert out.value == 1 and out.solution.added == ()

    def test_v_minus_b_large_branch(self):
        g = fan_in(6)
        out = solve_by_v_minus_b(g, 4)
        assert out.value == 37 == large_budget_value(7, 6, 4)
        assert out.value == brute_force(g, 4).value

    def test_k33(self):
        # the constructive value n^2 - (n-1)(|S|+|T|-2B) is 26, but 27 is attainable
        g = k33()
        out = solve_by_matching(g, 2)
        assert out.value == 27 == brute_force(g, 2).value
        assert out.value > 36 - 5 * (3 + 3 - 4)
        assert matching_upper_bound(6, 3, 3, 2) == 27

    def test_matching_class_branch(self, two_edges):
        out = solve_by_matching(two_edges, 1)
        assert out.value == 10 and out.strategy == "matching"

    @pytest.mark.parametrize("solver", FPT)
    def test_isolated_only(self, solver):
        g = Dag.from_edges(4, [])
        for B in range(4):
            assert solver(g, B).value == brute_force(g, B).value

    def test_guessed_k_recorded(self):
        g = Dag.from_edges(5, [(0, 1)])
        out = solve_by_st(g, 2)
        assert out.guessed_k is not None
        assert out.value == brute_force(g, 2).value


class TestOracleEquivalence:
    @settings(max_examples=300)
    @given(dags(max_n=6), st.integers(0, 3))
    def test_all_strategies(self, g, B):
        assume(g.n == 1 or B < classify(g).threshold)
        expected = brute_force(g, B).value
        for solver in FPT:
            out = solver(g, B)
            assert out.value == expected, solver.__name__
            check_outcome(g, B, out)

    @settings(max_examples=200)
    @given(dags(min_n=2, max_n=7), st.integers(0, 3))
    def test_upper_bounds(self, g, B):
        cls = classify(g)
        assume(B < cls.threshold)
        q = len(cls.isolated)
        for solver in FPT:
            v = solver(g, B).value
            for side in (len(cls.sources), len(cls.sinks)):
                if B <= side + q:
                    assert v <= pair_bound(g.n, side, q, B)


class TestPreconditions:
    @pytest.mark.parametrize("solver", FPT)
    def test_at_threshold(self, solver, two_edges):
        with pytest.raises(PreconditionError, match="strongly"):
            solver(two_edges, 2)

    @pytest.mark.parametrize("solver", FPT + [brute_force])
    def test_negative_budget(self, solver, two_edges):
        with pytest.raises(PreconditionError):
            solver(two_edges, -1)

    def test_guard(self):
        g = gen_random_dag(30, 0.05, 2)
        assert classify(g).threshold > 3
        with pytest.raises(SolverGuardError):
            solve_by_st(g, 3, max_candidates=10)


class TestDispatcher:
    def test_tarjan_branch(self):
        out = solve(Dag.from_edges(2, [(0, 1)]), 1)
        assert out.strategy == "tarjan" and out.value == 4

    def test_auto(self, two_edges):
        out = solve(two_edges, 1)
        assert out.value == 10
        assert out.strategy in ("st", "v-minus-b", "matching", "oracle")

    def test_zero_budget(self, path3):
        out = solve(path3, 0)
        assert out.value == 6 and out.solution.added == ()

    def test_unknown_strategy(self, two_edges):
        with pytest.raises(ValueError):
            solve(two_edges, 1, strategy="greedy")

    def test_falls_back_to_oracle(self, two_edges, monkeypatch):
        real = solvers.estimate
        monkeypatch.setattr(
            solvers, "estimate", lambda g, B, s: real(g, B, s) if s == "oracle" else 10**9
        )
        out = solve(two_edges, 1, max_candidates=1000)
        assert out.strategy == "oracle" and out.value == 10

    def test_guard_propagates(self):
        g = gen_random_dag(30, 0.05, 2)
        with pytest.raises(SolverGuardError):
            solve(g, 3, max_candidates=10)

    def test_estimates(self, two_edges):
        assert estimate(two_edges, 1, "st") == 4
        assert estimate(two_edges, 1, "oracle") == 1 + 10
        with pytest.raises(ValueError):
            estimate(two_edges, 1, "nope")

    @settings(max_examples=100)
    @given(dags(max_n=6), st.integers(0, 4))
    def test_auto_is_optimal(self, g, B):
        out = solve(g, B)
        if g.n > 1 and B >= classify(g).threshold:
            assert out.value == g.n * g.n
        else:
            assert out.value == brute_force(g, B).value
        check_outcome(g, B, out)


class TestDeterminism:
    @pytest.mark.parametrize("strategy", ["oracle", "st", "v-minus-b", "matching", "auto"])
    def test_repeat(self, strategy):
        g = gen_random_dag(7, 0.25, 11)
        B = min(2, classify(g).threshold - 1)
        runs = {format_solution(solve(g, B, strategy).solution) for _ in range(3)}
        assert len(runs) == 1

    def test_tie_break_smallest(self, star3):
        # (3, 0), (3, 1), (3, 2) tie at B=1
        assert brute_force(star3, 1).solution.added == ((3, 0),)


class TestBudgetPartitions:
    def test_counts(self):
        parts = list(budget_partitions([[2, 1], [1, 0]], 2))
        assert all(isinstance(p, ClassBudgetPartition) and p.total == 2 for p in parts)
        mats = {p.matrix for p in parts}
        assert mats == {((2, 0), (0, 0)), ((1, 1), (0, 0)), ((1, 0), (1, 0)), ((0, 1), (1, 0))}

    def test_infeasible(self):
        assert list(budget_partitions([[1]], 2)) == []

    @given(st.lists(st.lists(st.integers(0, 2), min_size=2, max_size=2), min_size=1, max_size=3), st.integers(0, 4))
    def test_respects_caps(self, caps, total):
        seen = set()
        for p in budget_partitions(caps, total):
            assert p.total == total
            assert all(x <= c for row, crow in zip(p.matrix, caps) for x, c in zip(row, crow))
            seen.add(p.matrix)
        count = 0
        flat = [c for row in caps for c in row]

        def rec(i, left):
            nonlocal count
            if i == len(flat):
                count += left == 0
                return
            for x in range(min(left, flat[i]) + 1):
                rec(i + 1, left - x)

        rec(0, total)
        assert len(seen) == count


def test_isolated_path_plan():
    plan = IsolatedPathPlan(2, (4, 5, 6))
    assert plan.edges == [(4, 5), (5, 6)]
    assert IsolatedPathPlan(0, (4,)).edges == []
