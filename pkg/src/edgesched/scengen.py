"""Seeded random scenario generation.

Streams come from NumPy's PCG64 (``numpy.random.default_rng(seed)``). Draw
order is fixed: all job sizes, then all demands, then the request-by-node
distance matrix in row-major order. Scenario ``i`` of a corpus uses seed
``config.seed + i``. Both rules are stamped into every scenario's
``version`` field.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from edgesched.channel import WirelessParams
from edgesched.errors import ConfigurationError
from edgesched.problem import SCENARIO_FORMAT, EdgeNode, Request, Scenario

GENERATOR_TAG = f"{SCENARIO_FORMAT};rng=numpy-pcg64;draws=size,demand,distance;corpus-seed=seed+index"


@dataclass(frozen=True)
class GenConfig:
    node_count: int = 2
    request_count: int = 20
    bandwidth_mhz: int = 100
    capacity_mhz: float = 1500.0
    demand_range: tuple[float, float] = (50.0, 150.0)
    distance_range: tuple[float, float] = (30.0, 200.0)
    size_range: tuple[float, float] = (10.0, 100.0)
    seed: int = 0
    wireless: WirelessParams = WirelessParams()

    def __post_init__(self):
        if self.node_count < 1 or self.request_count < 1:
            raise ConfigurationError("node_count and request_count must be >= 1")
        if int(self.bandwidth_mhz) != self.bandwidth_mhz or self.bandwidth_mhz < 1:
            raise ConfigurationError("bandwidth_mhz must be a positive integer")
        if not self.capacity_mhz > 0:
            raise ConfigurationError("capacity_mhz must be > 0")
        for name in ("demand_range", "distance_range", "size_range"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ConfigurationError(f"{name} must satisfy low <= high, got ({lo}, {hi})")
            object.__setattr__(self, name, (float(lo), float(hi)))
        if self.distance_range[0] < 1:
            raise ConfigurationError("distance_range must start at >= 1 m")
        if self.demand_range[0] < 0 or self.size_range[0] < 0:
            raise ConfigurationError("demand and size ranges must be non-negative")
        if self.seed < 0:
            raise ConfigurationError("seed must be non-negative")


def generate(config: GenConfig) -> Scenario:
    rng = np.random.default_rng(config.seed)
    k, v = config.request_count, config.node_count
    sizes = rng.uniform(*config.size_range, size=k)
    demands = rng.uniform(*config.demand_range, size=k)
    distances = rng.uniform(*config.distance_range, size=(k, v))
    nodes = tuple(EdgeNode(i, int(config.bandwidth_mhz), float(config.capacity_mhz)) for i in range(v))
    requests = tuple(
        Request(i, float(sizes[i]), float(demands[i]), tuple(float(d) for d in distances[i]))
        for i in range(k)
    )
    return Scenario(
        nodes=nodes,
        requests=requests,
        wireless=config.wireless,
        seed=int(config.seed),
        version=GENERATOR_TAG,
    )


def generate_corpus(config: GenConfig, count: int) -> list[Scenario]:
    if count < 0:
        raise ConfigurationError("count must be >= 0")
    return [generate(replace(config, seed=config.seed + i)) for i in range(count)]
