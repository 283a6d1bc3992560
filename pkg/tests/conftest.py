from __future__ import annotations

import numpy as np
import pytest

from edgesched.problem import EdgeNode, Request, Scenario


def make_scenario(sizes, demands, distances, bandwidth=100, capacity=1500.0, seed=0):
    """Scenario from per-request sizes/demands and a (K, V) distance table.

    ``bandwidth`` and ``capacity`` may be scalars (same for every node) or
    per-node sequences.
    """
    distances = np.atleast_2d(np.asarray(distances, dtype=float))
    v = distances.shape[1]
    bws = np.broadcast_to(bandwidth, (v,))
    caps = np.broadcast_to(capacity, (v,))
    nodes = [EdgeNode(i, int(bws[i]), float(caps[i])) for i in range(v)]
    reqs = [Request(k, sizes[k], demands[k], tuple(distances[k])) for k in range(len(sizes))]
    return Scenario(nodes, reqs, seed=seed)


@pytest.fixture
def tiny_scenario():
    """Two nodes, three requests, 4 MHz each; compute forces a 2/1 split."""
    return make_scenario(
        sizes=[40.0, 60.0, 20.0],
        demands=[100.0, 120.0, 80.0],
        distances=[[50.0, 150.0], [120.0, 40.0], [90.0, 90.0]],
        bandwidth=4,
        capacity=220.0,
    )


def binding_instance(i):
    """Small seeded instance whose compute capacity binds the packing.

    K in {3,4,5} and B in {4,6} are drawn from seed 1000+i; the scenario uses
    seed 5000+i. Each node gets f * (total demand) compute with the smallest
    f in 0.6..1.0 that still admits a feasible assignment. Returns
    (scenario, exact optimum).
    """
    from dataclasses import replace

    from edgesched.errors import InfeasibleInstanceError
    from edgesched.exact import solve_exact
    from edgesched.scengen import GenConfig, generate

    rng = np.random.default_rng(1000 + i)
    k = int(rng.choice([3, 4, 5]))
    b = int(rng.choice([4, 6]))
    base = generate(GenConfig(node_count=2, request_count=k, bandwidth_mhz=b, seed=5000 + i))
    total = sum(r.demand for r in base.requests)
    for f in (0.6, 0.7, 0.8, 0.9, 1.0):
        sc = replace(base, nodes=tuple(EdgeNode(v, b, f * total) for v in range(2)))
        try:
            return sc, solve_exact(sc)[1]
        except InfeasibleInstanceError:
            continue
    raise AssertionError("f = 1.0 always admits a packing")  # pragma: no cover


def gradient_check(seed=0, hidden=4, requests=3, nodes=2, share_weight=1.0, h=1e-6):
    """Max relative error between analytic and central-difference gradients.

    The finite differences run in extended precision (np.longdouble) so that
    their truncation and rounding error sit well below the 1e-4 tolerance.
    Returns (worst relative error, number of parameters checked).
    """
    from edgesched.surrogate import network
    from edgesched.surrogate.features import feature_dim

    rng = np.random.default_rng(seed)
    d = feature_dim(nodes)
    params = network.init_params(d, hidden, nodes, rng)
    x = rng.uniform(0, 1, size=(1, requests, d))
    y = rng.integers(0, nodes, size=(1, requests))
    s = rng.uniform(0.05, 0.95, size=(1, requests))
    _, grads = network.loss_and_grads(params, x, y, s, share_weight)

    ld = {k: v.astype(np.longdouble) for k, v in params.items()}
    xl, sl = x.astype(np.longdouble), s.astype(np.longdouble)

    def f(p):
        logits, shares = network.forward(p, xl)
        return network.loss_terms(logits, shares, y, sl, share_weight)[0]

    worst, count = 0.0, 0
    step = np.longdouble(h)
    for name, value in ld.items():
        for idx in np.ndindex(value.shape):
            orig = value[idx]
            value[idx] = orig + step
            up = f(ld)
            value[idx] = orig - step
            down = f(ld)
            value[idx] = orig
            numeric = float((up - down) / (2 * step))
            analytic = float(grads[name][idx])
            denom = max(abs(numeric), abs(analytic), 1e-300)
            if numeric != analytic:
                worst = max(worst, abs(numeric - analytic) / denom)
            count += 1
    return worst, count


# one line per acceptance criterion, printed after the run
ACCEPTANCE_RESULTS: dict[int, tuple[str, bool, str]] = {}


def record_criterion(number: int, title: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS[number] = (title, bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        title, ok, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}")
