"""Penalty-constrained archive search."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgesched.errors import ConfigurationError, InfeasibleInstanceError
from edgesched.evo import (
    Archive,
    EvoParams,
    PenaltySpec,
    internal_constraints,
    penalized_fitness,
    run_evo,
    solve_evo,
    violation_total,
)
from edgesched.problem import Solution, check_feasibility, evaluate
from edgesched.scengen import GenConfig, generate

from conftest import binding_instance, make_scenario


def two_on_one(bw, capacity=1500.0, demands=(700.0, 700.0)):
    return make_scenario([20.0, 20.0], list(demands), [[60, 90], [80, 70]], bandwidth=10, capacity=capacity)


def test_constraint_vector_balanced():
    g = internal_constraints(two_on_one(10), Solution((0, 0), (5, 5)))
    assert g[0] == 0 and g[1] == 0


def test_constraint_vector_excess():
    g = internal_constraints(two_on_one(10), Solution((0, 0), (5, 6)))
    assert g[0] == 1


def test_constraint_vector_spare_compute():
    g = internal_constraints(two_on_one(10), Solution((0, 0), (5, 5)))
    assert g[2] == pytest.approx(100.0)
    assert g[3] == pytest.approx(1500.0)


def test_penalty_spec_partition():
    sc = two_on_one(10)
    spec = PenaltySpec.for_scenario(sc)
    assert spec.equality == (0, 1) and spec.inequality == (2, 3)
    with pytest.raises(ConfigurationError):
        PenaltySpec((0, 1), (1, 2, 3)).validate(4)


def test_penalized_fitness_feasible_is_raw_objective():
    sc = two_on_one(10)
    sol = Solution((0, 1), (10, 10))
    assert penalized_fitness(sc, sol) == evaluate(sc, sol).sum_total


def test_penalized_fitness_one_unit_excess():
    sc = two_on_one(10)
    sol = Solution((0, 0), (5, 6))
    spec = PenaltySpec.for_scenario(sc, weight=3.0)
    assert penalized_fitness(sc, sol, spec) == pytest.approx(evaluate(sc, sol).sum_total + 3.0)


def test_penalized_fitness_compute_shortfall():
    sc = two_on_one(10, capacity=1000.0)
    sol = Solution((0, 0), (5, 5))
    spec = PenaltySpec.for_scenario(sc, weight=1.0)
    assert penalized_fitness(sc, sol, spec) == pytest.approx(evaluate(sc, sol).sum_total + 400.0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=4, max_size=4))
def test_violation_terms_never_negative(g):
    spec = PenaltySpec((0, 1), (2, 3))
    assert violation_total(np.array(g), spec) >= 0


def test_archive_insert_keeps_order_and_capacity():
    arch = Archive(3)
    sol = Solution((0,), (1,))
    for f in (5.0, 2.0, 9.0, 1.0, 7.0, 3.0):
        arch.insert(sol, f)
        assert arch.fitnesses == sorted(arch.fitnesses)
    assert arch.fitnesses == [1.0, 2.0, 3.0]
    assert not arch.insert(sol, 4.0)
    with pytest.raises(ConfigurationError):
        Archive(1)


def test_budget_equal_to_archive_is_best_random():
    sc = generate(GenConfig(seed=3))
    rep, arch = run_evo(sc, 30, seed=2)
    assert rep.evaluations == 30
    feasible = [f for s, f in arch.entries if not check_feasibility(sc, s)]
    assert rep.objective == pytest.approx(min(feasible), rel=1e-12)


def test_budget_below_archive_rejected():
    with pytest.raises(ConfigurationError):
        solve_evo(generate(GenConfig()), 10)


def test_report_curve_and_determinism():
    sc = generate(GenConfig(seed=8))
    a = solve_evo(sc, 5000, seed=4)
    b = solve_evo(sc, 5000, seed=4)
    assert a.solution == b.solution and a.curve == b.curve
    vals = [v for _, v in a.curve]
    assert all(x >= y for x, y in zip(vals, vals[1:]))
    assert a.curve[-1] == (5000, pytest.approx(a.objective))
    assert a.solver == "evo" and a.feasible


def test_archive_sorted_after_run():
    _, arch = run_evo(generate(GenConfig(seed=9)), 3000, seed=1)
    assert arch.fitnesses == sorted(arch.fitnesses)
    assert len(arch.entries) == 30


def test_infeasible_instance():
    sc = make_scenario([10.0, 10.0], [100.0, 100.0], [[50, 50], [60, 60]], bandwidth=4, capacity=50.0)
    with pytest.raises(InfeasibleInstanceError) as info:
        solve_evo(sc, 200, params=EvoParams(archive_size=10))
    assert info.value.violations


def test_tiny_instance_near_optimum():
    sc, opt = binding_instance(1)
    hits = sum(solve_evo(sc, 50000, seed=s).objective <= 1.02 * opt for s in range(100))
    assert hits >= 95


def test_larger_budget_not_worse_on_average():
    corpus = [generate(GenConfig(seed=100 + i)) for i in range(10)]
    lo = np.mean([solve_evo(s, 5000, s.seed).objective for s in corpus])
    hi = np.mean([solve_evo(s, 50000, s.seed).objective for s in corpus])
    assert hi < lo


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 25), st.sampled_from(["total", "makespan"]))
def test_every_result_is_feasible(seed, k, kind):
    sc = generate(GenConfig(seed=seed, request_count=k))
    rep = solve_evo(sc, 600, seed, kind)
    assert check_feasibility(sc, rep.solution) == []
    assert rep.objective == (rep.sum_total if kind == "total" else rep.max_total)
