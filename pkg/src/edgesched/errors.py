"""Exception hierarchy shared by every edgesched module."""

from __future__ import annotations


class EdgeSchedError(Exception):
    """Base class for all edgesched errors."""


class ChannelDomainError(EdgeSchedError, ValueError):
    """A wireless-chain function was called outside its domain."""


class InfeasibleSolutionError(EdgeSchedError):
    """A solution cannot be evaluated or violates a hard constraint.

    ``violations`` carries the offending constraint records when known.
    """

    def __init__(self, message: str, violations=None):
        super().__init__(message)
        self.violations = list(violations or [])


class InfeasibleInstanceError(EdgeSchedError):
    """No assignment of the instance satisfies the capacity constraints."""

    def __init__(self, message: str, violations=None):
        super().__init__(message)
        self.violations = list(violations or [])


class InstanceTooLargeError(EdgeSchedError):
    """The exact solver refuses instances beyond its enumeration guard."""


class RepairInfeasibleError(EdgeSchedError):
    """Bandwidth repair cannot reach the node capacity (too many requests)."""


class ConfigurationError(EdgeSchedError, ValueError):
    """Invalid or missing configuration."""


class TrainingDivergedError(EdgeSchedError):
    """Surrogate training produced a non-finite loss."""

    def __init__(self, epoch: int):
        super().__init__(f"training diverged (non-finite loss) at epoch {epoch}")
        self.epoch = epoch


class ModelFormatError(EdgeSchedError):
    """A model file is corrupt, truncated or of an unsupported version."""


class DecodeError(EdgeSchedError):
    """The surrogate decoder could not place some request on any node."""
