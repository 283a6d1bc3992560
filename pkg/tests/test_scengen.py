"""Seeded scenario generation."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgesched.errors import ConfigurationError
from edgesched.problem import dumps_scenario
from edgesched.scengen import GENERATOR_TAG, GenConfig, generate, generate_corpus


def test_same_seed_same_json():
    assert dumps_scenario(generate(GenConfig(seed=42))) == dumps_scenario(generate(GenConfig(seed=42)))


def test_different_seeds_differ():
    assert generate(GenConfig(seed=1)) != generate(GenConfig(seed=2))


def test_demand_mean_law_of_large_numbers():
    sc = generate(GenConfig(seed=7, request_count=10_000))
    demands = sc.arrays.demand
    assert abs(demands.mean() - 100.0) / 100.0 < 0.02
    assert demands.min() >= 50 and demands.max() <= 150


def test_distances_within_range():
    sc = generate(GenConfig(seed=11, request_count=2000))
    d = np.array([r.distances for r in sc.requests])
    assert d.shape == (2000, 2)
    assert d.min() >= 30 and d.max() <= 200


def test_full_scale_defaults():
    sc = generate(GenConfig())
    assert sc.node_count == 2 and sc.request_count == 20
    assert all(n.bandwidth_capacity == 100 and n.compute_capacity == 1500 for n in sc.nodes)
    assert sc.version == GENERATOR_TAG and "pcg64" in sc.version


def test_corpus_is_stable_and_distinct():
    a = generate_corpus(GenConfig(seed=0), 100)
    b = generate_corpus(GenConfig(seed=0), 100)
    assert len(a) == 100 and a == b
    assert len({dumps_scenario(s) for s in a}) == 100


def test_empty_corpus():
    assert generate_corpus(GenConfig(), 0) == []
    with pytest.raises(ConfigurationError):
        generate_corpus(GenConfig(), -1)


def test_corpus_seed_rule():
    assert generate_corpus(GenConfig(seed=1), 6)[5] == generate(GenConfig(seed=6))


@pytest.mark.parametrize(
    "kw",
    [
        {"node_count": 0},
        {"request_count": 0},
        {"bandwidth_mhz": 0},
        {"bandwidth_mhz": 2.5},
        {"capacity_mhz": 0.0},
        {"demand_range": (150, 50)},
        {"distance_range": (0.5, 10)},
        {"size_range": (-1, 10)},
        {"seed": -3},
    ],
)
def test_config_validation(kw):
    with pytest.raises(ConfigurationError):
        GenConfig(**kw)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 4), st.integers(1, 30))
def test_generated_scenarios_are_valid(seed, v, k):
    sc = generate(GenConfig(seed=seed, node_count=v, request_count=k))
    assert sc.node_count == v and sc.request_count == k
    for r in sc.requests:
        assert 10 <= r.size <= 100 and 50 <= r.demand <= 150
        assert len(r.distances) == v and all(30 <= d <= 200 for d in r.distances)
    assert np.all(np.isfinite(sc.arrays.signal)) and np.all(sc.arrays.signal > 0)
