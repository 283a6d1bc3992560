"""Genetic algorithm over combined assignment + bandwidth chromosomes.

A chromosome carries one gene per request: the node it is assigned to and
its integer bandwidth. Each generation draws ``population_size`` children:

1. pick a random father and mother and splice them at a random point;
2. repair (move requests off compute-overloaded nodes, then step random
   genes by +-1 MHz until every occupied node uses exactly its bandwidth);
3. mutate with a uniform draw ``mu``: ``mu <= 0.3`` moves 1 MHz from the
   largest to the smallest gene of each node, ``mu >= 0.75`` left-rotates the
   genes of each node by one, anything in between leaves bandwidth alone;
   independently one request is moved to another node with probability 0.1;
4. evaluate.

Survivors are the best ``population_size`` of parents and children.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from edgesched import _kernels as K
from edgesched.errors import ConfigurationError, InfeasibleInstanceError, RepairInfeasibleError
from edgesched.problem import Scenario, Solution, SolverReport, check_feasibility, check_objective_kind, make_report

DEFAULT_PENALTY = 10.0


@dataclass(frozen=True)
class GaParams:
    population_size: int = 50
    generation_budget: int = 100
    balance_below: float = 0.3
    rotate_above: float = 0.75
    flip_prob: float = 0.1
    penalty: float = DEFAULT_PENALTY
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ConfigurationError("population_size must be >= 2")
        if self.generation_budget < 0:
            raise ConfigurationError("generation_budget must be >= 0")
        if not 0 <= self.balance_below < self.rotate_above <= 1:
            raise ConfigurationError("need 0 <= balance_below < rotate_above <= 1")
        if not 0 <= self.flip_prob <= 1:
            raise ConfigurationError("flip_prob must lie in [0, 1]")

    @classmethod
    def for_evaluations(cls, evaluations: int, **kwargs) -> "GaParams":
        """Params whose run spends (at most) ``evaluations`` fitness evaluations.

        The initial population costs ``population_size`` evaluations and each
        generation another ``population_size``.
        """
        pop = kwargs.get("population_size", cls.population_size)
        generations = max(0, (evaluations - pop) // pop)
        return cls(generation_budget=generations, **kwargs)


@dataclass
class Chromosome:
    nodes: np.ndarray
    bandwidth: np.ndarray
    fitness: float | None = field(default=None, compare=False)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=np.int64).copy()
        self.bandwidth = np.asarray(self.bandwidth, dtype=np.int64).copy()
        if self.nodes.shape != self.bandwidth.shape or self.nodes.ndim != 1:
            raise ValueError("nodes and bandwidth must be equal-length vectors")

    def __len__(self) -> int:
        return self.nodes.shape[0]

    def copy(self) -> "Chromosome":
        return Chromosome(self.nodes, self.bandwidth, self.fitness)

    def to_solution(self) -> Solution:
        return Solution.from_arrays(self.nodes, self.bandwidth)


def _rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def init_population(scenario: Scenario, params: GaParams, rng=None) -> list[Chromosome]:
    """Random assignments with random per-node bandwidth compositions, repaired."""
    rng = _rng(params.seed if rng is None else rng)
    arr = scenario.arrays
    out = []
    for _ in range(params.population_size):
        nodes = np.empty(scenario.request_count, dtype=np.int64)
        bw = np.empty(scenario.request_count, dtype=np.int64)
        K.random_individual(nodes, bw, arr.demand, arr.bandwidth_cap, arr.compute_cap, rng)
        out.append(Chromosome(nodes, bw))
    return out


def crossover(father: Chromosome, mother: Chromosome, splice: int) -> Chromosome:
    """Child takes the father's first ``splice`` genes and the mother's remainder."""
    n = len(father)
    if len(mother) != n:
        raise ValueError("parents differ in length")
    if n > 1 and not 1 <= splice <= n - 1:
        raise ValueError(f"splice must lie in [1, {n - 1}], got {splice}")
    nodes = np.concatenate([father.nodes[:splice], mother.nodes[splice:]])
    bw = np.concatenate([father.bandwidth[:splice], mother.bandwidth[splice:]])
    return Chromosome(nodes, bw)


def repair_bandwidth(child: Chromosome, scenario: Scenario, rng=None) -> Chromosome:
    """Return a copy whose bandwidth sums equal each occupied node's capacity."""
    rng = _rng(rng)
    out = child.copy()
    out.fitness = None
    ok = K.repair_bandwidth(out.nodes, out.bandwidth, scenario.arrays.bandwidth_cap, rng)
    if not ok:
        counts = np.bincount(out.nodes, minlength=scenario.node_count)
        bad = [v for v in range(scenario.node_count) if counts[v] > scenario.nodes[v].bandwidth_capacity]
        raise RepairInfeasibleError(f"nodes {bad} hold more requests than MHz of bandwidth")
    return out


def mutate(child: Chromosome, mu: float, scenario: Scenario, rng=None, params: GaParams | None = None) -> Chromosome:
    """Apply the ``mu``-selected bandwidth mutation and the random node flip."""
    params = params or GaParams()
    rng = _rng(rng)
    arr = scenario.arrays
    out = child.copy()
    out.fitness = None
    K.mutate_inplace(
        out.nodes, out.bandwidth, float(mu), params.balance_below, params.rotate_above,
        params.flip_prob, arr.demand, arr.bandwidth_cap, arr.compute_cap, rng,
    )
    return out


def solve_ga(scenario: Scenario, params: GaParams | None = None, kind: str = "total") -> SolverReport:
    params = params or GaParams()
    check_objective_kind(kind)
    arr = scenario.arrays
    rng = np.random.default_rng(params.seed)
    start = time.perf_counter()
    best_nodes, best_bw, best_obj, top_nodes, top_bw, evals, c_evals, c_best = K.ga_run(
        arr.size, arr.demand, arr.signal, arr.noise_density, arr.processing,
        arr.bandwidth_cap, arr.compute_cap,
        K.KIND_TOTAL if kind == "total" else K.KIND_MAKESPAN, float(params.penalty),
        params.population_size, params.generation_budget,
        params.balance_below, params.rotate_above, params.flip_prob, rng,
    )
    wall = time.perf_counter() - start
    if not np.isfinite(best_obj):
        fallback = Solution.from_arrays(top_nodes, top_bw)
        raise InfeasibleInstanceError(
            "genetic search found no feasible solution", check_feasibility(scenario, fallback)
        )
    return make_report(
        scenario,
        Solution.from_arrays(best_nodes, best_bw),
        solver="ga",
        kind=kind,
        evaluations=evals,
        wall_time=wall,
        generations=params.generation_budget,
        curve=list(zip(c_evals.tolist(), c_best.tolist())),
    )
