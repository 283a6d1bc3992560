"""Penalty-constrained evolutionary search with a ranked solution archive.

An open stand-in for a commercial ant-colony MINLP solver. The problem is
handed to the search as an objective plus internal constraints:

* one equality per node: allocated bandwidth minus capacity must be 0;
* one inequality per node: compute capacity minus assigned demand must be >= 0.

Violations are folded into the fitness with a fixed weight. New candidates
perturb an archive member picked with rank-linear probability. With
probability ``flip_prob`` the assignment changes first: either two requests
on different nodes swap places (keeping their bandwidth), or one request
moves to another node and arrives with an average slice of it. Then one or
two integer bandwidth steps move MHz between requests sharing a node; the
maximum step shrinks linearly from a quarter of the node's capacity to 1 MHz
over the budget. The bandwidth equality is finally restored by random +-1
repair.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from edgesched import _kernels as K
from edgesched.errors import ConfigurationError, InfeasibleInstanceError
from edgesched.problem import (
    CAPACITY_EPS,
    Scenario,
    Solution,
    SolverReport,
    check_feasibility,
    check_objective_kind,
    evaluate,
    make_report,
    objective,
)

DEFAULT_PENALTY = 10.0
DEFAULT_ARCHIVE = 30


@dataclass(frozen=True)
class PenaltySpec:
    """Which internal-constraint entries are equalities and which are inequalities."""

    equality: tuple[int, ...]
    inequality: tuple[int, ...]
    weight: float = DEFAULT_PENALTY

    @classmethod
    def for_scenario(cls, scenario: Scenario, weight: float = DEFAULT_PENALTY) -> "PenaltySpec":
        v = scenario.node_count
        return cls(tuple(range(v)), tuple(range(v, 2 * v)), weight)

    def validate(self, n_constraints: int) -> None:
        eq, ineq = set(self.equality), set(self.inequality)
        if eq & ineq or eq | ineq != set(range(n_constraints)):
            raise ConfigurationError("equality and inequality indices must partition the constraints")


@dataclass
class Archive:
    """Fixed-capacity list of (solution, penalized fitness), kept ascending."""

    capacity: int
    entries: list[tuple[Solution, float]] = field(default_factory=list)

    def __post_init__(self):
        if self.capacity < 2:
            raise ConfigurationError("archive capacity must be >= 2")

    def insert(self, solution: Solution, fitness: float) -> bool:
        if len(self.entries) >= self.capacity and fitness >= self.entries[-1][1]:
            return False
        pos = len(self.entries)
        while pos > 0 and self.entries[pos - 1][1] > fitness:
            pos -= 1
        self.entries.insert(pos, (solution, fitness))
        del self.entries[self.capacity:]
        return True

    @property
    def fitnesses(self) -> list[float]:
        return [f for _, f in self.entries]


def internal_constraints(scenario: Scenario, solution: Solution) -> np.ndarray:
    """Constraint vector G: bandwidth sum minus capacity per node, then spare compute per node.

    Nodes with no request have nothing to allocate; their bandwidth entry is 0.
    """
    v = scenario.node_count
    g = np.zeros(2 * v, dtype=np.float64)
    used_bw = np.zeros(v, dtype=np.int64)
    count = np.zeros(v, dtype=np.int64)
    used_cpu = np.zeros(v, dtype=np.float64)
    for rid, (node, b) in enumerate(zip(solution.assignment, solution.bandwidth)):
        used_bw[node] += b
        count[node] += 1
        used_cpu[node] += scenario.requests[rid].demand
    for node in scenario.nodes:
        if count[node.id]:
            g[node.id] = used_bw[node.id] - node.bandwidth_capacity
        g[v + node.id] = node.compute_capacity - used_cpu[node.id]
    return g


def violation_total(g: np.ndarray, spec: PenaltySpec) -> float:
    eq = sum(abs(g[i]) for i in spec.equality)
    ineq = sum(-g[i] for i in spec.inequality if -g[i] > CAPACITY_EPS)
    return float(eq + ineq)


def penalized_fitness(scenario: Scenario, solution: Solution, spec: PenaltySpec | None = None, kind: str = "total") -> float:
    spec = spec or PenaltySpec.for_scenario(scenario)
    g = internal_constraints(scenario, solution)
    spec.validate(g.shape[0])
    return objective(evaluate(scenario, solution), kind) + spec.weight * violation_total(g, spec)


@dataclass(frozen=True)
class EvoParams:
    archive_size: int = DEFAULT_ARCHIVE
    flip_prob: float = 0.2
    penalty: float = DEFAULT_PENALTY

    def __post_init__(self):
        if self.archive_size < 2:
            raise ConfigurationError("archive_size must be >= 2")
        if not 0 <= self.flip_prob <= 1:
            raise ConfigurationError("flip_prob must lie in [0, 1]")


def solve_evo(
    scenario: Scenario,
    budget: int,
    seed: int = 0,
    kind: str = "total",
    params: EvoParams | None = None,
) -> SolverReport:
    return run_evo(scenario, budget, seed, kind, params)[0]


def run_evo(
    scenario: Scenario,
    budget: int,
    seed: int = 0,
    kind: str = "total",
    params: EvoParams | None = None,
) -> tuple[SolverReport, Archive]:
    """Like :func:`solve_evo` but also returns the final archive."""
    params = params or EvoParams()
    check_objective_kind(kind)
    if budget < params.archive_size:
        raise ConfigurationError(f"budget {budget} is below the archive size {params.archive_size}")
    arr = scenario.arrays
    rng = np.random.default_rng(seed)
    record_every = max(1, budget // 200)
    start = time.perf_counter()
    out = K.evo_run(
        arr.size, arr.demand, arr.signal, arr.noise_density, arr.processing,
        arr.bandwidth_cap, arr.compute_cap,
        K.KIND_TOTAL if kind == "total" else K.KIND_MAKESPAN, float(params.penalty),
        int(budget), params.archive_size, params.flip_prob, record_every, rng,
    )
    wall = time.perf_counter() - start
    best_nodes, best_bw, best_obj, evals, c_evals, c_best, a_nodes, a_bw, a_fit = out
    archive = Archive(params.archive_size)
    archive.entries = [
        (Solution.from_arrays(a_nodes[i], a_bw[i]), float(a_fit[i])) for i in range(params.archive_size)
    ]
    if not np.isfinite(best_obj):
        fallback = archive.entries[0][0]
        raise InfeasibleInstanceError(
            "evolutionary search found no feasible solution", check_feasibility(scenario, fallback)
        )
    report = make_report(
        scenario,
        Solution.from_arrays(best_nodes, best_bw),
        solver="evo",
        kind=kind,
        evaluations=evals,
        wall_time=wall,
        curve=list(zip(c_evals.tolist(), c_best.tolist())),
    )
    return report, archive
