"""Scenario and solution data model, latency evaluation and feasibility checks.

A scenario holds edge nodes (integer bandwidth capacity in MHz, compute
capacity in MHz) and requests (job size in Mbit, compute demand in MHz and a
distance to every node). A solution assigns every request to exactly one node
and gives it an integer bandwidth slice of that node.

The job size doubles as compute work: a request of ``L`` Mbit with demand
``c`` MHz is processed in ``L / c`` seconds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np

from edgesched import channel
from edgesched.channel import WirelessParams
from edgesched.errors import ConfigurationError, InfeasibleSolutionError

ObjectiveKind = Literal["total", "makespan"]
OBJECTIVE_KINDS = ("total", "makespan")

# Slack for floating compute-capacity sums; shared with the compiled kernels.
CAPACITY_EPS = 1e-9

SCENARIO_FORMAT = "edgesched-scenario/1"


def check_objective_kind(kind: str) -> str:
    if kind not in OBJECTIVE_KINDS:
        raise ConfigurationError(f"objective kind must be one of {OBJECTIVE_KINDS}, got {kind!r}")
    return kind


@dataclass(frozen=True)
class EdgeNode:
    id: int
    bandwidth_capacity: int
    compute_capacity: float

    def __post_init__(self):
        if int(self.bandwidth_capacity) != self.bandwidth_capacity or self.bandwidth_capacity <= 0:
            raise ConfigurationError(
                f"node {self.id}: bandwidth_capacity must be a positive integer MHz, "
                f"got {self.bandwidth_capacity}"
            )
        if not self.compute_capacity > 0:
            raise ConfigurationError(f"node {self.id}: compute_capacity must be > 0")
        object.__setattr__(self, "bandwidth_capacity", int(self.bandwidth_capacity))
        object.__setattr__(self, "compute_capacity", float(self.compute_capacity))


@dataclass(frozen=True)
class Request:
    id: int
    size: float
    demand: float
    distances: tuple[float, ...]

    def __post_init__(self):
        if not self.size >= 0:
            raise ConfigurationError(f"request {self.id}: size must be >= 0")
        if not self.demand >= 0:
            raise ConfigurationError(f"request {self.id}: demand must be >= 0")
        dists = tuple(float(d) for d in self.distances)
        if any(not d >= channel.MIN_DISTANCE_M for d in dists):
            raise ConfigurationError(f"request {self.id}: every distance must be >= 1 m")
        object.__setattr__(self, "distances", dists)
        object.__setattr__(self, "size", float(self.size))
        object.__setattr__(self, "demand", float(self.demand))


@dataclass(frozen=True)
class ScenarioArrays:
    """Dense per-scenario arrays consumed by the vectorised and compiled solvers."""

    size: np.ndarray  # (K,) Mbit
    demand: np.ndarray  # (K,) MHz
    signal: np.ndarray  # (K, V) received power in mW
    noise_density: float
    bandwidth_cap: np.ndarray  # (V,) int64
    compute_cap: np.ndarray  # (V,)
    processing: np.ndarray  # (K,) seconds


@dataclass(frozen=True)
class Scenario:
    nodes: tuple[EdgeNode, ...]
    requests: tuple[Request, ...]
    wireless: WirelessParams = field(default_factory=WirelessParams)
    seed: int = 0
    slot_count: int = 1
    version: str = SCENARIO_FORMAT

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "requests", tuple(self.requests))
        if not self.nodes:
            raise ConfigurationError("scenario needs at least one node")
        if not self.requests:
            raise ConfigurationError("scenario needs at least one request")
        for i, node in enumerate(self.nodes):
            if node.id != i:
                raise ConfigurationError(f"node ids must be 0..V-1 in order; got {node.id} at {i}")
        for i, req in enumerate(self.requests):
            if req.id != i:
                raise ConfigurationError(f"request ids must be 0..K-1 in order; got {req.id} at {i}")
            if len(req.distances) != len(self.nodes):
                raise ConfigurationError(
                    f"request {i} has {len(req.distances)} distances for {len(self.nodes)} nodes"
                )
        if self.slot_count < 1:
            raise ConfigurationError("slot_count must be >= 1")

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def request_count(self) -> int:
        return len(self.requests)

    @cached_property
    def arrays(self) -> ScenarioArrays:
        size = np.array([r.size for r in self.requests], dtype=np.float64)
        demand = np.array([r.demand for r in self.requests], dtype=np.float64)
        signal = np.array(
            [[channel.received_signal_mw(self.wireless, d) for d in r.distances] for r in self.requests],
            dtype=np.float64,
        )
        processing = np.array([processing_time(r) for r in self.requests], dtype=np.float64)
        return ScenarioArrays(
            size=size,
            demand=demand,
            signal=signal,
            noise_density=float(self.wireless.noise_density),
            bandwidth_cap=np.array([n.bandwidth_capacity for n in self.nodes], dtype=np.int64),
            compute_cap=np.array([n.compute_capacity for n in self.nodes], dtype=np.float64),
            processing=processing,
        )


@dataclass(frozen=True)
class Solution:
    """Per-request node index and integer bandwidth in MHz."""

    assignment: tuple[int, ...]
    bandwidth: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(int(a) for a in self.assignment))
        object.__setattr__(self, "bandwidth", tuple(int(b) for b in self.bandwidth))

    @classmethod
    def from_arrays(cls, assignment: Iterable[int], bandwidth: Iterable[int]) -> "Solution":
        return cls(tuple(int(a) for a in assignment), tuple(int(b) for b in bandwidth))


@dataclass(frozen=True)
class RequestDelay:
    transmission: float
    processing: float
    total: float


@dataclass(frozen=True)
class DelayReport:
    per_request: tuple[RequestDelay, ...]
    sum_total: float
    max_total: float


@dataclass(frozen=True)
class Violation:
    """One broken constraint. ``node``/``request`` are -1 when not applicable."""

    constraint: str  # bandwidth | compute | assignment | min_bandwidth | shape
    node: int
    request: int
    excess: float

    def describe(self) -> str:
        where = []
        if self.node >= 0:
            where.append(f"node {self.node}")
        if self.request >= 0:
            where.append(f"request {self.request}")
        return f"{self.constraint} violation at {', '.join(where) or 'solution'}: excess {self.excess:g}"


def _check_shape(scenario: Scenario, solution: Solution) -> None:
    k = scenario.request_count
    if len(solution.assignment) != k or len(solution.bandwidth) != k:
        raise InfeasibleSolutionError(
            f"solution covers {len(solution.assignment)}/{len(solution.bandwidth)} requests, "
            f"scenario has {k}"
        )
    for rid, v in enumerate(solution.assignment):
        if not 0 <= v < scenario.node_count:
            raise InfeasibleSolutionError(f"request {rid} assigned to unknown node {v}")


def processing_time(request: Request) -> float:
    if request.size == 0:
        return 0.0
    if not request.demand > 0:
        raise InfeasibleSolutionError(f"request {request.id} has non-positive demand")
    return request.size / request.demand


def transmission_delay(scenario: Scenario, solution: Solution, request_id: int) -> float:
    """Upload time of one request over its allocated slice of its assigned node."""
    _check_shape(scenario, solution)
    b = solution.bandwidth[request_id]
    if b <= 0:
        raise InfeasibleSolutionError(f"request {request_id} has no bandwidth allocated")
    req = scenario.requests[request_id]
    node = solution.assignment[request_id]
    return channel.transmission_time(scenario.wireless, req.distances[node], b, req.size)


def processing_delay(scenario: Scenario, solution: Solution, request_id: int) -> float:
    return processing_time(scenario.requests[request_id])


def evaluate(scenario: Scenario, solution: Solution) -> DelayReport:
    """Per-request transmission, processing and total delay plus aggregates."""
    _check_shape(scenario, solution)
    rows = []
    for rid in range(scenario.request_count):
        tr = transmission_delay(scenario, solution, rid)
        pr = processing_delay(scenario, solution, rid)
        rows.append(RequestDelay(tr, pr, tr + pr))
    sum_total = 0.0
    for row in rows:
        sum_total += row.total
    return DelayReport(tuple(rows), sum_total, max(row.total for row in rows))


def objective(report: DelayReport, kind: str = "total") -> float:
    check_objective_kind(kind)
    return report.sum_total if kind == "total" else report.max_total


def check_feasibility(scenario: Scenario, solution: Solution) -> list[Violation]:
    """List every violated constraint; an empty list means the solution is feasible."""
    out: list[Violation] = []
    k, v_count = scenario.request_count, scenario.node_count
    if len(solution.assignment) != k:
        out.append(Violation("shape", -1, -1, float(abs(len(solution.assignment) - k))))
    if len(solution.bandwidth) != k:
        out.append(Violation("shape", -1, -1, float(abs(len(solution.bandwidth) - k))))
    if out:
        return out
    bw_used = [0] * v_count
    cpu_used = [0.0] * v_count
    for rid, (node, b) in enumerate(zip(solution.assignment, solution.bandwidth)):
        if not 0 <= node < v_count:
            out.append(Violation("assignment", node, rid, 1.0))
            continue
        if b < 1:
            out.append(Violation("min_bandwidth", node, rid, float(1 - b)))
        bw_used[node] += b
        cpu_used[node] += scenario.requests[rid].demand
    for node in scenario.nodes:
        excess_bw = bw_used[node.id] - node.bandwidth_capacity
        if excess_bw > 0:
            out.append(Violation("bandwidth", node.id, -1, float(excess_bw)))
        excess_cpu = cpu_used[node.id] - node.compute_capacity
        if excess_cpu > CAPACITY_EPS:
            out.append(Violation("compute", node.id, -1, float(excess_cpu)))
    return out


@dataclass
class SolverReport:
    """Outcome of one solver run on one scenario."""

    solver: str
    solution: Solution
    objective: float
    objective_kind: str
    sum_total: float
    max_total: float
    evaluations: int
    wall_time: float
    generations: int = 0
    curve: list[tuple[int, float]] = field(default_factory=list)
    feasible: bool = True

    def to_dict(self) -> dict:
        return {
            "solver": self.solver,
            "objective_kind": self.objective_kind,
            "objective": self.objective,
            "sum_total": self.sum_total,
            "max_total": self.max_total,
            "evaluations": self.evaluations,
            "generations": self.generations,
            "wall_time_s": self.wall_time,
            "feasible": self.feasible,
            "curve": [[int(e), float(b)] for e, b in self.curve],
            "solution": solution_to_dict(self.solution),
        }


def make_report(
    scenario: Scenario,
    solution: Solution,
    *,
    solver: str,
    kind: str,
    evaluations: int,
    wall_time: float,
    generations: int = 0,
    curve: Sequence[tuple[int, float]] = (),
) -> SolverReport:
    delays = evaluate(scenario, solution)
    return SolverReport(
        solver=solver,
        solution=solution,
        objective=objective(delays, kind),
        objective_kind=kind,
        sum_total=delays.sum_total,
        max_total=delays.max_total,
        evaluations=int(evaluations),
        wall_time=float(wall_time),
        generations=int(generations),
        curve=[(int(e), float(b)) for e, b in curve],
        feasible=not check_feasibility(scenario, solution),
    )


# --------------------------------------------------------------------------- JSON


def scenario_to_dict(scenario: Scenario) -> dict:
    w = scenario.wireless
    return {
        "version": scenario.version,
        "seed": int(scenario.seed),
        "slot_count": int(scenario.slot_count),
        "wireless": {
            "freq_ghz": w.carrier_freq,
            "tx_power_dbm": w.tx_power,
            "noise_mw_per_mhz": w.noise_density,
        },
        "nodes": [
            {"id": n.id, "bandwidth_mhz": n.bandwidth_capacity, "capacity_mhz": n.compute_capacity}
            for n in scenario.nodes
        ],
        "requests": [
            {"id": r.id, "size_mbit": r.size, "demand_mhz": r.demand, "distances_m": list(r.distances)}
            for r in scenario.requests
        ],
    }


def scenario_from_dict(data: dict) -> Scenario:
    try:
        w = data["wireless"]
        wireless = WirelessParams(
            carrier_freq=float(w["freq_ghz"]),
            tx_power=float(w["tx_power_dbm"]),
            noise_density=float(w["noise_mw_per_mhz"]),
        )
        nodes = [
            EdgeNode(int(n["id"]), n["bandwidth_mhz"], float(n["capacity_mhz"]))
            for n in sorted(data["nodes"], key=lambda n: n["id"])
        ]
        requests = [
            Request(int(r["id"]), float(r["size_mbit"]), float(r["demand_mhz"]), tuple(r["distances_m"]))
            for r in sorted(data["requests"], key=lambda r: r["id"])
        ]
        return Scenario(
            nodes=tuple(nodes),
            requests=tuple(requests),
            wireless=wireless,
            seed=int(data.get("seed", 0)),
            slot_count=int(data.get("slot_count", 1)),
            version=str(data.get("version", SCENARIO_FORMAT)),
        )
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"malformed scenario JSON: {exc!r}") from exc


def solution_to_dict(solution: Solution) -> dict:
    return {
        "assignments": [
            {"request": rid, "node": node, "bandwidth_mhz": b}
            for rid, (node, b) in enumerate(zip(solution.assignment, solution.bandwidth))
        ]
    }


def solution_from_dict(data: dict) -> Solution:
    try:
        rows = sorted(data["assignments"], key=lambda a: a["request"])
        if [int(a["request"]) for a in rows] != list(range(len(rows))):
            raise ConfigurationError("solution JSON must list requests 0..K-1 exactly once")
        return Solution(
            tuple(int(a["node"]) for a in rows),
            tuple(int(a["bandwidth_mhz"]) for a in rows),
        )
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"malformed solution JSON: {exc!r}") from exc


def dumps_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=1, sort_keys=True)


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(dumps_scenario(scenario) + "\n")


def _read_json(path: str | Path):
    try:
        return json.loads(Path(path).read_text())
    except ValueError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc


def load_scenario(path: str | Path) -> Scenario:
    return scenario_from_dict(_read_json(path))


def save_solution(solution: Solution, path: str | Path) -> None:
    Path(path).write_text(json.dumps(solution_to_dict(solution), indent=1) + "\n")


def load_solution(path: str | Path) -> Solution:
    return solution_from_dict(_read_json(path))


def node_groups(solution: Solution, node_count: int) -> list[list[int]]:
    """Request ids assigned to each node, in id order."""
    groups: list[list[int]] = [[] for _ in range(node_count)]
    for rid, v in enumerate(solution.assignment):
        groups[v].append(rid)
    return groups

