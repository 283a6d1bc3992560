"""Per-request feature rows for the recurrent scheduler."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np

from edgesched.errors import ConfigurationError
from edgesched.problem import Scenario


@dataclass(frozen=True)
class Normalizer:
    """Corpus maxima used to scale every feature into [0, 1]."""

    max_size: float
    max_demand: float
    max_distance: float
    max_bandwidth: float
    max_capacity: float

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise ConfigurationError(f"normalizer {name} must be > 0, got {value}")

    @classmethod
    def from_corpus(cls, scenarios: Iterable[Scenario]) -> "Normalizer":
        scenarios = list(scenarios)
        if not scenarios:
            raise ConfigurationError("cannot derive normalization constants from an empty corpus")
        return cls(
            max_size=max(r.size for s in scenarios for r in s.requests) or 1.0,
            max_demand=max(r.demand for s in scenarios for r in s.requests) or 1.0,
            max_distance=max(d for s in scenarios for r in s.requests for d in r.distances),
            max_bandwidth=float(max(n.bandwidth_capacity for s in scenarios for n in s.nodes)),
            max_capacity=max(n.compute_capacity for s in scenarios for n in s.nodes),
        )

    def to_dict(self) -> dict:
        return asdict(self)


def feature_dim(node_count: int) -> int:
    # size, demand, then per node: distance, bandwidth capacity, compute capacity
    return 2 + 3 * node_count


def featurize(scenario: Scenario, normalizer: Normalizer | None) -> np.ndarray:
    """Feature matrix of shape (requests, 2 + 3 * nodes), rows in request-id order.

    Values above the corpus maxima are clipped to 1.
    """
    if normalizer is None:
        raise ConfigurationError("featurize needs normalization constants from the training corpus")
    arr = scenario.arrays
    k, v = scenario.request_count, scenario.node_count
    dist = np.array([r.distances for r in scenario.requests], dtype=np.float64)
    out = np.empty((k, feature_dim(v)), dtype=np.float64)
    out[:, 0] = arr.size / normalizer.max_size
    out[:, 1] = arr.demand / normalizer.max_demand
    out[:, 2 : 2 + v] = dist / normalizer.max_distance
    out[:, 2 + v : 2 + 2 * v] = arr.bandwidth_cap / normalizer.max_bandwidth
    out[:, 2 + 2 * v :] = arr.compute_cap / normalizer.max_capacity
    np.clip(out, 0.0, 1.0, out=out)
    return out
