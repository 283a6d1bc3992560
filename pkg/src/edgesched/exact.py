"""Exhaustive optimal solver for small instances.

Every assignment is enumerated in lexicographic order; for each one the
bandwidth of every node is split optimally by enumerating all integer
compositions of its capacity. The objective separates over nodes (sum of
node sums, or max of node maxima) so nodes are split independently.

Ties: the lexicographically smallest assignment wins; within an assignment
lower request ids receive the larger share (compositions are visited in
descending lexicographic order and only strict improvements replace the
incumbent).
"""

from __future__ import annotations

import itertools
from math import comb
from typing import Iterator, Sequence

from edgesched import channel
from edgesched.errors import InfeasibleInstanceError, InstanceTooLargeError
from edgesched.problem import (
    CAPACITY_EPS,
    Scenario,
    Solution,
    check_objective_kind,
    evaluate,
    objective,
    processing_time,
)

MAX_ASSIGNMENTS = 10**6
MAX_SPLIT_WORK = 10**7
TIE_RTOL = 1e-12


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Positive integer compositions of ``total`` into ``parts``, descending lexicographic order."""
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(total - parts + 1, 0, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def _better(value: float, incumbent: float) -> bool:
    return value < incumbent - TIE_RTOL * abs(incumbent)


def _delay_table(scenario: Scenario, node: int, request_ids: Sequence[int], bandwidth: int):
    table = {}
    for rid in request_ids:
        req = scenario.requests[rid]
        proc = processing_time(req)
        table[rid] = [0.0] + [
            channel.transmission_time(scenario.wireless, req.distances[node], b, req.size) + proc
            for b in range(1, bandwidth + 1)
        ]
    return table


def _split_candidates(scenario, node, request_ids, bandwidth):
    """Yield (split, node sum, node max) for every composition, in tie-break order."""
    table = _delay_table(scenario, node, request_ids, bandwidth)
    for split in compositions(bandwidth, len(request_ids)):
        s = 0.0
        m = 0.0
        for rid, b in zip(request_ids, split):
            t = table[rid][b]
            s += t
            m = max(m, t)
        yield split, s, m


def optimal_bandwidth_split(
    scenario: Scenario,
    node: int,
    request_ids: Sequence[int],
    bandwidth: int | None = None,
    kind: str = "total",
) -> tuple[int, ...]:
    """Integer split of ``bandwidth`` MHz (default: node capacity) over ``request_ids``.

    Minimises the node-local sum (``total``) or maximum (``makespan``) of the
    per-request delays. The returned vector always sums to ``bandwidth``.
    """
    check_objective_kind(kind)
    if bandwidth is None:
        bandwidth = scenario.nodes[node].bandwidth_capacity
    request_ids = list(request_ids)
    if not request_ids:
        return ()
    if bandwidth < len(request_ids):
        raise InfeasibleInstanceError(
            f"node {node}: {bandwidth} MHz cannot give 1 MHz to each of {len(request_ids)} requests"
        )
    split, _ = _best_split(scenario, node, request_ids, bandwidth, kind)
    return split


def _best_split(scenario, node, request_ids, bandwidth, kind):
    best, best_val = None, float("inf")
    for split, s, m in _split_candidates(scenario, node, request_ids, bandwidth):
        val = s if kind == "total" else m
        if best is None or _better(val, best_val):
            best, best_val = split, val
    return best, best_val


def _split_within(scenario, node, request_ids, bandwidth, limit):
    """First split (tie-break order) whose node maximum does not exceed ``limit``."""
    for split, _, m in _split_candidates(scenario, node, request_ids, bandwidth):
        if not _better(limit, m):
            return split
    raise AssertionError("no split within the node's own optimum")  # pragma: no cover


def check_size(scenario: Scenario) -> None:
    v, k = scenario.node_count, scenario.request_count
    if v**k > MAX_ASSIGNMENTS:
        raise InstanceTooLargeError(f"{v}^{k} assignments exceed the limit of {MAX_ASSIGNMENTS}")
    per_assignment = 0
    for node in scenario.nodes:
        cap = node.bandwidth_capacity
        per_assignment += max(comb(cap - 1, m - 1) for m in range(1, min(k, cap) + 1))
    if v**k * per_assignment > MAX_SPLIT_WORK:
        raise InstanceTooLargeError(
            f"bandwidth enumeration bound {v**k * per_assignment} exceeds {MAX_SPLIT_WORK}"
        )


def solve_exact(scenario: Scenario, kind: str = "total") -> tuple[Solution, float]:
    """Globally optimal solution and its objective value."""
    check_objective_kind(kind)
    check_size(scenario)
    v_count, k_count = scenario.node_count, scenario.request_count
    demands = [r.demand for r in scenario.requests]
    cache: dict[tuple[int, tuple[int, ...]], tuple[tuple[int, ...], float]] = {}

    best_solution, best_value = None, float("inf")
    for assignment in itertools.product(range(v_count), repeat=k_count):
        groups: list[list[int]] = [[] for _ in range(v_count)]
        for rid, node in enumerate(assignment):
            groups[node].append(rid)
        if any(
            len(g) > scenario.nodes[v].bandwidth_capacity
            or sum(demands[r] for r in g) - scenario.nodes[v].compute_capacity > CAPACITY_EPS
            for v, g in enumerate(groups)
        ):
            continue
        node_best = {}
        for v, g in enumerate(groups):
            if g:
                key = (v, tuple(g))
                if key not in cache:
                    cache[key] = _best_split(scenario, v, g, scenario.nodes[v].bandwidth_capacity, kind)
                node_best[v] = cache[key]
        if kind == "total":
            value = sum(val for _, val in node_best.values())
            splits = {v: split for v, (split, _) in node_best.items()}
        else:
            value = max(val for _, val in node_best.values())
            splits = {
                v: _split_within(scenario, v, groups[v], scenario.nodes[v].bandwidth_capacity, value)
                for v in node_best
            }
        if best_solution is None or _better(value, best_value):
            bandwidth = [0] * k_count
            for v, split in splits.items():
                for rid, b in zip(groups[v], split):
                    bandwidth[rid] = b
            best_solution = Solution(tuple(assignment), tuple(bandwidth))
            best_value = value

    if best_solution is None:
        raise InfeasibleInstanceError("no assignment satisfies the compute and bandwidth capacities")
    return best_solution, objective(evaluate(scenario, best_solution), kind)
