"""Shared exception types."""


class ConfigurationError(ValueError):
    """Invalid configuration value or combination of values."""


class DatasetError(RuntimeError):
    """Dataset cannot be loaded or violates its invariants."""


class CheckpointError(RuntimeError):
    """Checkpoint file is missing, corrupt, or incompatible."""


class TrainingDivergenceError(RuntimeError):
    """Training aborted after repeated non-finite losses."""
