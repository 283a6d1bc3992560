"""Supervised training on solver labels, and single-shot inference."""

from __future__ import annotations

import logging
import time
from collections import defaultdict
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from edgesched.errors import ConfigurationError, TrainingDivergedError
from edgesched.problem import Scenario, Solution, SolverReport, make_report
from edgesched.surrogate import network
from edgesched.surrogate.decode import decode_with_repair
from edgesched.surrogate.features import Normalizer, featurize
from edgesched.surrogate.model import SurrogateModel

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    dataset_size: int = 0  # 0 = use every labelled scenario
    epochs: int = 50
    learning_rate: float = 0.01
    batch_size: int = 32
    validation_fraction: float = 0.1
    seed: int = 0
    hidden: int = 64
    share_weight: float = 1.0
    optimizer: str = "sgd"  # sgd | adam
    clip_norm: float = 5.0  # 0 disables clipping

    def __post_init__(self):
        if self.dataset_size < 0 or self.epochs < 1 or self.batch_size < 1 or self.hidden < 1:
            raise ConfigurationError("dataset_size >= 0, epochs/batch_size/hidden >= 1 required")
        if not self.learning_rate > 0:
            raise ConfigurationError("learning_rate must be > 0")
        if not 0 < self.validation_fraction <= 0.5:
            raise ConfigurationError("validation_fraction must lie in (0, 0.5]")
        if self.optimizer not in ("sgd", "adam"):
            raise ConfigurationError(f"unknown optimizer {self.optimizer!r}")
        if self.share_weight < 0 or self.clip_norm < 0:
            raise ConfigurationError("share_weight and clip_norm must be >= 0")


def label_targets(scenario: Scenario, label: Solution) -> tuple[np.ndarray, np.ndarray]:
    """Node index and bandwidth share (b_k / capacity of its node) per request."""
    nodes = np.asarray(label.assignment, dtype=np.int64)
    caps = scenario.arrays.bandwidth_cap[nodes]
    return nodes, np.asarray(label.bandwidth, dtype=np.float64) / caps


def forward(model: SurrogateModel, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Node logits (requests, nodes) and bandwidth shares (requests,) for one scenario."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.input_dim:
        raise ConfigurationError(
            f"features of shape {features.shape} do not match input width {model.input_dim}"
        )
    logits, shares = network.forward(model.params, features[None])
    return logits[0], shares[0]


def loss(prediction: tuple[np.ndarray, np.ndarray], label: tuple[np.ndarray, np.ndarray], share_weight: float = 1.0) -> float:
    """Cross-entropy of the node choice plus ``share_weight`` x squared share error.

    ``prediction`` is (logits, shares) and ``label`` is (node indices, shares),
    either for one scenario or a batch.
    """
    logits, shares = (np.asarray(a, dtype=np.float64) for a in prediction)
    nodes, target = np.asarray(label[0], dtype=np.int64), np.asarray(label[1], dtype=np.float64)
    if logits.ndim == 2:
        logits, shares, nodes, target = logits[None], shares[None], nodes[None], target[None]
    if logits.shape[:2] != nodes.shape or shares.shape != target.shape:
        raise ConfigurationError("prediction and label shapes differ")
    return float(network.loss_terms(logits, shares, nodes, target, share_weight)[0])


def _batches(groups: dict[int, list[int]], batch_size: int, rng: np.random.Generator) -> list[list[int]]:
    out = []
    for length in sorted(groups):
        idx = np.array(groups[length])
        rng.shuffle(idx)
        out.extend(idx[i:i + batch_size].tolist() for i in range(0, len(idx), batch_size))
    order = rng.permutation(len(out))
    return [out[i] for i in order]


def _dataset_loss(model, feats, nodes, shares, indices, share_weight):
    if not indices:
        return float("nan")
    total, count = 0.0, 0
    by_len = defaultdict(list)
    for i in indices:
        by_len[feats[i].shape[0]].append(i)
    for idx in by_len.values():
        x = np.stack([feats[i] for i in idx])
        logits, out = network.forward(model.params, x)
        val = network.loss_terms(logits, out, np.stack([nodes[i] for i in idx]),
                                 np.stack([shares[i] for i in idx]), share_weight)[0]
        total += val * len(idx)
        count += len(idx)
    return total / count


def train(
    corpus: Sequence[Scenario],
    labels: Sequence[Solution],
    config: TrainConfig | None = None,
    label_solver: str = "evo-50000",
) -> SurrogateModel:
    """Mini-batch gradient descent on the node/share loss; deterministic per seed."""
    config = config or TrainConfig()
    corpus, labels = list(corpus), list(labels)
    if not corpus:
        raise ConfigurationError("cannot train on an empty corpus")
    if len(corpus) != len(labels):
        raise ConfigurationError(f"{len(corpus)} scenarios but {len(labels)} labels")
    if config.dataset_size:
        corpus, labels = corpus[: config.dataset_size], labels[: config.dataset_size]
    node_counts = {s.node_count for s in corpus}
    if len(node_counts) != 1:
        raise ConfigurationError(f"corpus mixes node counts {sorted(node_counts)}")
    node_count = node_counts.pop()

    normalizer = Normalizer.from_corpus(corpus)
    rng = np.random.default_rng(config.seed)
    model = SurrogateModel.create(node_count, config.hidden, normalizer, seed=int(rng.integers(2**32)))
    feats = [featurize(s, normalizer) for s in corpus]
    targets = [label_targets(s, l) for s, l in zip(corpus, labels)]
    t_nodes = [t[0] for t in targets]
    t_shares = [t[1] for t in targets]

    n = len(corpus)
    perm = rng.permutation(n)
    n_val = max(1, int(round(config.validation_fraction * n))) if n >= 2 else 0
    val_idx = sorted(perm[:n_val].tolist())
    train_idx = sorted(perm[n_val:].tolist())
    groups: dict[int, list[int]] = defaultdict(list)
    for i in train_idx:
        groups[feats[i].shape[0]].append(i)

    adam_m = {k: np.zeros_like(v) for k, v in model.params.items()}
    adam_v = {k: np.zeros_like(v) for k, v in model.params.items()}
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0
    loss_curve, val_curve = [], []
    start = time.perf_counter()
    for epoch in range(1, config.epochs + 1):
        running, seen = 0.0, 0
        for batch in _batches(groups, config.batch_size, rng):
            x = np.stack([feats[i] for i in batch])
            y = np.stack([t_nodes[i] for i in batch])
            s = np.stack([t_shares[i] for i in batch])
            value, grads = network.loss_and_grads(model.params, x, y, s, config.share_weight)
            if not np.isfinite(value):
                raise TrainingDivergedError(epoch)
            if config.clip_norm:
                norm = np.sqrt(sum(float((g * g).sum()) for g in grads.values()))
                if norm > config.clip_norm:
                    for g in grads.values():
                        g *= config.clip_norm / norm
            step += 1
            for name, g in grads.items():
                p = model.params[name]
                if config.optimizer == "sgd":
                    p -= config.learning_rate * g
                else:
                    adam_m[name] = beta1 * adam_m[name] + (1 - beta1) * g
                    adam_v[name] = beta2 * adam_v[name] + (1 - beta2) * g * g
                    m_hat = adam_m[name] / (1 - beta1**step)
                    v_hat = adam_v[name] / (1 - beta2**step)
                    p -= config.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
            running += value * len(batch)
            seen += len(batch)
        epoch_loss = running / max(seen, 1)
        if not np.isfinite(epoch_loss):
            raise TrainingDivergedError(epoch)
        loss_curve.append(epoch_loss)
        val_curve.append(_dataset_loss(model, feats, t_nodes, t_shares, val_idx, config.share_weight))
        log.debug("epoch %d train %.6f val %.6f", epoch, epoch_loss, val_curve[-1])

    model.metadata = {
        "corpus_seed": int(corpus[0].seed),
        "corpus_size": n,
        "label_solver": label_solver,
        "loss_curve": loss_curve,
        "val_curve": val_curve,
        "train_config": asdict(config),
        "train_seconds": time.perf_counter() - start,
    }
    return model


def assignment_accuracy(model: SurrogateModel, corpus: Sequence[Scenario], labels: Sequence[Solution]) -> float:
    """Fraction of requests whose arg-max node equals the label's node."""
    hits = total = 0
    for scenario, label in zip(corpus, labels):
        logits, _ = forward(model, featurize(scenario, model.normalizer))
        hits += int((logits.argmax(axis=1) == np.asarray(label.assignment)).sum())
        total += scenario.request_count
    return hits / total


def infer(model: SurrogateModel, scenario: Scenario, kind: str = "total") -> SolverReport:
    """Featurize, run the network once and decode; no iterative search."""
    if scenario.node_count != model.node_count:
        raise ConfigurationError(f"model expects {model.node_count} nodes, scenario has {scenario.node_count}")
    start = time.perf_counter()
    logits, shares = forward(model, featurize(scenario, model.normalizer))
    solution = decode_with_repair(scenario, logits, shares)
    report = make_report(scenario, solution, solver="surrogate", kind=kind, evaluations=1, wall_time=0.0)
    report.wall_time = time.perf_counter() - start
    return report
