"""Surrogate model container and its on-disk format.

File layout::

    EDGESCHED-SURROGATE\\n
    <one line of JSON header>\\n
    <param_count little-endian float64 values>

The header records the format version, hidden width, node count, input
width, normalization constants, the parameter names and shapes in storage
order, and free-form training metadata.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from edgesched.errors import ConfigurationError, ModelFormatError
from edgesched.surrogate import network
from edgesched.surrogate.features import Normalizer, feature_dim

MAGIC = b"EDGESCHED-SURROGATE\n"
FORMAT_VERSION = 1


@dataclass
class SurrogateModel:
    hidden: int
    node_count: int
    params: dict[str, np.ndarray]
    normalizer: Normalizer | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def input_dim(self) -> int:
        return feature_dim(self.node_count)

    @classmethod
    def create(cls, node_count: int, hidden: int = 64, normalizer: Normalizer | None = None, seed: int | None = 0) -> "SurrogateModel":
        """Randomly initialised model; ``seed=None`` gives all-zero parameters."""
        rng = None if seed is None else np.random.default_rng(seed)
        params = network.init_params(feature_dim(node_count), hidden, node_count, rng)
        return cls(hidden, node_count, params, normalizer)

    def check(self) -> None:
        shapes = network.param_shapes(self.input_dim, self.hidden, self.node_count)
        for name in network.PARAM_ORDER:
            if name not in self.params or self.params[name].shape != shapes[name]:
                raise ConfigurationError(f"parameter {name} missing or mis-shaped")
            if not np.all(np.isfinite(self.params[name])):
                raise ConfigurationError(f"parameter {name} is not finite")

    def flat_params(self) -> np.ndarray:
        return np.concatenate([self.params[n].ravel() for n in network.PARAM_ORDER])


def save_model(model: SurrogateModel, path: str | Path) -> None:
    model.check()
    if model.normalizer is None:
        raise ConfigurationError("refusing to save a model without normalization constants")
    shapes = network.param_shapes(model.input_dim, model.hidden, model.node_count)
    flat = model.flat_params().astype("<f8")
    header = {
        "version": FORMAT_VERSION,
        "hidden": model.hidden,
        "node_count": model.node_count,
        "input_dim": model.input_dim,
        "normalizer": model.normalizer.to_dict(),
        "params": [[n, list(shapes[n])] for n in network.PARAM_ORDER],
        "param_count": int(flat.size),
        "metadata": model.metadata,
    }
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        fh.write(flat.tobytes())


def load_model(path: str | Path, node_count: int | None = None) -> SurrogateModel:
    """Read a model file; ``node_count`` (if given) must match the stored one."""
    blob = Path(path).read_bytes()
    if not blob.startswith(MAGIC):
        raise ModelFormatError(f"{path}: not a surrogate model file")
    rest = blob[len(MAGIC):]
    newline = rest.find(b"\n")
    if newline < 0:
        raise ModelFormatError(f"{path}: truncated header")
    try:
        header = json.loads(rest[:newline])
    except ValueError as exc:
        raise ModelFormatError(f"{path}: corrupt header") from exc
    if header.get("version") != FORMAT_VERSION:
        raise ModelFormatError(f"{path}: format version {header.get('version')} != {FORMAT_VERSION}")
    try:
        hidden, stored_nodes = int(header["hidden"]), int(header["node_count"])
        count = int(header["param_count"])
        normalizer = Normalizer(**header["normalizer"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"{path}: incomplete header") from exc
    if node_count is not None and node_count != stored_nodes:
        raise ConfigurationError(f"{path}: model built for {stored_nodes} nodes, scenario has {node_count}")
    payload = rest[newline + 1:]
    if len(payload) != 8 * count:
        raise ModelFormatError(f"{path}: expected {8 * count} parameter bytes, found {len(payload)}")
    flat = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    shapes = network.param_shapes(feature_dim(stored_nodes), hidden, stored_nodes)
    if [[n, list(shapes[n])] for n in network.PARAM_ORDER] != header.get("params"):
        raise ModelFormatError(f"{path}: parameter layout does not match the header")
    params, offset = {}, 0
    for name in network.PARAM_ORDER:
        size = int(np.prod(shapes[name]))
        params[name] = flat[offset:offset + size].reshape(shapes[name]).copy()
        offset += size
    if offset != count:
        raise ModelFormatError(f"{path}: parameter count mismatch")
    model = SurrogateModel(hidden, stored_nodes, params, normalizer, header.get("metadata", {}))
    model.check()
    return model
