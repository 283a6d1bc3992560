"""Recurrent scheduler trained on evolutionary-solver labels."""

from edgesched.surrogate.decode import decode_with_repair, round_shares
from edgesched.surrogate.features import Normalizer, feature_dim, featurize
from edgesched.surrogate.model import SurrogateModel, load_model, save_model
from edgesched.surrogate.training import (
    TrainConfig,
    assignment_accuracy,
    forward,
    infer,
    label_targets,
    loss,
    train,
)

__all__ = [
    "Normalizer",
    "SurrogateModel",
    "TrainConfig",
    "assignment_accuracy",
    "decode_with_repair",
    "feature_dim",
    "featurize",
    "forward",
    "infer",
    "label_targets",
    "load_model",
    "loss",
    "round_shares",
    "save_model",
    "train",
]
