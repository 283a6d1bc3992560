"""Exhaustive solver checked against an independently coded brute force."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgesched.errors import InfeasibleInstanceError, InstanceTooLargeError
from edgesched.exact import compositions, optimal_bandwidth_split, solve_exact
from edgesched.problem import Solution, check_feasibility, evaluate
from edgesched.scengen import GenConfig, generate

from conftest import make_scenario

N0 = 10 ** -11.4


def _oracle_delay(size, demand, distance, b):
    # written out from the model equations, independent of the package
    loss = 38.77 + 16.7 * math.log10(distance) + 18.2 * math.log10(5.9)
    signal = 10 ** ((21.0 - loss) / 10)
    rate = b * math.log2(1 + signal / (N0 * b))
    proc = 0.0 if size == 0 else size / demand
    return size / rate + proc


def brute_force(sc, kind="total"):
    """Every assignment and every bandwidth vector with Σb <= B per node."""
    K, V = sc.request_count, sc.node_count
    reqs = sc.requests
    best = math.inf
    for assign in itertools.product(range(V), repeat=K):
        if any(sum(reqs[k].demand for k in range(K) if assign[k] == v) > sc.nodes[v].compute_capacity + 1e-9
               for v in range(V)):
            continue
        ranges = [range(1, sc.nodes[assign[k]].bandwidth_capacity + 1) for k in range(K)]
        for bw in itertools.product(*ranges):
            if any(sum(bw[k] for k in range(K) if assign[k] == v) > sc.nodes[v].bandwidth_capacity
                   for v in range(V)):
                continue
            delays = [_oracle_delay(reqs[k].size, reqs[k].demand, reqs[k].distances[assign[k]], bw[k])
                      for k in range(K)]
            value = sum(delays) if kind == "total" else max(delays)
            best = min(best, value)
    return best


def test_compositions_order_and_count():
    got = list(compositions(4, 2))
    assert got == [(3, 1), (2, 2), (1, 3)]
    assert len(list(compositions(6, 3))) == math.comb(5, 2)
    assert list(compositions(5, 1)) == [(5,)]


def test_single_request_takes_everything():
    sc = make_scenario([30.0], [50.0], [[80.0]], bandwidth=4)
    sol, _ = solve_exact(sc)
    assert sol == Solution((0,), (4,))


def test_two_identical_requests_split_evenly():
    sc = make_scenario([30.0, 30.0], [50.0, 50.0], [[80.0], [80.0]], bandwidth=4)
    assert solve_exact(sc)[0].bandwidth == (2, 2)


def test_split_one_request():
    sc = make_scenario([30.0], [50.0], [[80.0]], bandwidth=7)
    assert optimal_bandwidth_split(sc, 0, [0]) == (7,)


def test_split_identical_odd_gives_lower_index_the_extra_unit():
    sc = make_scenario([30.0, 30.0], [50.0, 50.0], [[80.0], [80.0]], bandwidth=5)
    assert optimal_bandwidth_split(sc, 0, [0, 1]) == (3, 2)


def test_split_near_and_far():
    # enumeration of all 9 splits puts the optimum at the even split
    sc = make_scenario([50.0, 50.0], [100.0, 100.0], [[30.0], [200.0]], bandwidth=10)
    split = optimal_bandwidth_split(sc, 0, [0, 1])
    assert split == (5, 5)
    assert split[1] >= split[0]


def test_split_too_many_requests():
    sc = make_scenario([1.0] * 3, [1.0] * 3, [[50.0]] * 3, bandwidth=2)
    with pytest.raises(InfeasibleInstanceError):
        optimal_bandwidth_split(sc, 0, [0, 1, 2])


def test_matches_brute_force_tiny(tiny_scenario):
    sol, opt = solve_exact(tiny_scenario)
    assert check_feasibility(tiny_scenario, sol) == []
    assert opt == pytest.approx(brute_force(tiny_scenario), rel=1e-12)


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("kind", ["total", "makespan"])
def test_matches_brute_force_random(seed, kind):
    sc = generate(GenConfig(seed=seed, request_count=3, bandwidth_mhz=4, capacity_mhz=260.0))
    try:
        sol, opt = solve_exact(sc, kind)
    except InfeasibleInstanceError:
        assert brute_force(sc, kind) == math.inf
        return
    assert check_feasibility(sc, sol) == []
    assert sum(sol.bandwidth) == sum(n.bandwidth_capacity for n in sc.nodes if n.id in sol.assignment)
    assert opt == pytest.approx(brute_force(sc, kind), rel=1e-12)


def test_infeasible_instance():
    sc = make_scenario([10.0, 10.0], [100.0, 100.0], [[50, 50], [60, 60]], bandwidth=4, capacity=50.0)
    with pytest.raises(InfeasibleInstanceError):
        solve_exact(sc)


def test_size_guard():
    with pytest.raises(InstanceTooLargeError):
        solve_exact(generate(GenConfig(request_count=20)))


def test_lexicographic_tie_break_on_assignment():
    # symmetric nodes: every mirrored assignment ties, the smallest must win
    sc = make_scenario([20.0, 20.0], [50.0, 50.0], [[70, 70], [90, 90]], bandwidth=4, capacity=60.0)
    sol, _ = solve_exact(sc)
    assert sol.assignment == (0, 1)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([4, 6]), st.integers(2, 4))
def test_optimum_dominates_random_feasible(seed, bandwidth, k):
    sc = generate(GenConfig(seed=seed, request_count=k, bandwidth_mhz=bandwidth, capacity_mhz=400.0))
    sol, opt = solve_exact(sc)
    rng = np.random.default_rng(seed)
    for _ in range(20):
        nodes = rng.integers(0, 2, k)
        bw = np.zeros(k, dtype=int)
        ok = True
        for v in range(2):
            idx = np.flatnonzero(nodes == v)
            if idx.size > bandwidth:
                ok = False
            elif idx.size:
                bw[idx] = 1 + rng.multinomial(bandwidth - idx.size, np.ones(idx.size) / idx.size)
        cand = Solution.from_arrays(nodes, bw)
        if ok and not check_feasibility(sc, cand):
            assert opt <= evaluate(sc, cand).sum_total + 1e-12
