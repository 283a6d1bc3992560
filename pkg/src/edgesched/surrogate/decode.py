"""Turn raw network outputs into a feasible schedule."""

from __future__ import annotations

import math

import numpy as np

from edgesched.errors import DecodeError
from edgesched.problem import CAPACITY_EPS, Scenario, Solution


def round_shares(shares, total: int) -> list[int]:
    """Integers >= 1 proportional to ``shares`` that sum to exactly ``total``.

    Largest-remainder rounding; ties go to the lower index.
    """
    m = len(shares)
    if m == 0:
        return []
    if total < m:
        raise DecodeError(f"{total} MHz cannot give 1 MHz to each of {m} requests")
    s = np.asarray(shares, dtype=np.float64)
    weight = s.sum()
    raw = np.full(m, total / m) if not weight > 0 else total * s / weight
    base = [max(1, int(math.floor(r))) for r in raw]
    rem = [r - math.floor(r) for r in raw]
    diff = total - sum(base)
    # stable sorts keep the lower index first among equal remainders
    if diff > 0:
        order = sorted(range(m), key=lambda i: -rem[i])
        for j in range(diff):
            base[order[j % m]] += 1
    while diff < 0:
        order = sorted((i for i in range(m) if base[i] > 1), key=lambda i: rem[i])
        for i in order:
            if diff == 0:
                break
            base[i] -= 1
            diff += 1
    return base


def decode_with_repair(scenario: Scenario, logits, shares, order: str = "demand") -> Solution:
    """Greedy placement by descending demand, then per-node bandwidth rounding.

    Each request goes to its highest-logit node that still has compute room
    and a spare MHz; if none has room a :class:`DecodeError` is raised.
    """
    logits = np.asarray(logits, dtype=np.float64)
    shares = np.asarray(shares, dtype=np.float64)
    k_count, v_count = scenario.request_count, scenario.node_count
    if logits.shape != (k_count, v_count) or shares.shape != (k_count,):
        raise DecodeError(
            f"outputs of shape {logits.shape}/{shares.shape} do not match "
            f"{k_count} requests x {v_count} nodes"
        )
    demands = [r.demand for r in scenario.requests]
    if order == "demand":
        sequence = sorted(range(k_count), key=lambda k: -demands[k])
    elif order == "id":
        sequence = list(range(k_count))
    else:
        raise ValueError(f"unknown decode order {order!r}")

    room = [n.compute_capacity for n in scenario.nodes]
    slots = [n.bandwidth_capacity for n in scenario.nodes]
    assignment = [-1] * k_count
    for k in sequence:
        prefs = sorted(range(v_count), key=lambda v: -logits[k, v])
        for v in prefs:
            if slots[v] > 0 and demands[k] - room[v] <= CAPACITY_EPS:
                assignment[k] = v
                room[v] -= demands[k]
                slots[v] -= 1
                break
        else:
            raise DecodeError(f"request {k} (demand {demands[k]:g} MHz) fits on no node")

    bandwidth = [0] * k_count
    for v in range(v_count):
        members = [k for k in range(k_count) if assignment[k] == v]
        for k, b in zip(members, round_shares(shares[members], scenario.nodes[v].bandwidth_capacity)):
            bandwidth[k] = b
    return Solution(tuple(assignment), tuple(bandwidth))
