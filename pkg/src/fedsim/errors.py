"""Shared exception types."""


class ConfigError(ValueError):
    """Raised when shapes, hyperparameters or config values are inconsistent."""


class InstanceRejected(ValueError):
    """Raised when a testbed instance fails the preconditions of the bound it feeds."""
