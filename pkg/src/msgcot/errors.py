"""Exception types shared across the package."""


class MsgcotError(Exception):
    """Base class for all package errors."""


class DatasetNotFoundError(MsgcotError):
    """A required dataset file is missing."""


class DatasetFormatError(MsgcotError):
    """Dataset files are present but internally inconsistent."""


class SamplingError(MsgcotError):
    """A task or batch cannot be sampled from the given data."""


class ConfigError(MsgcotError):
    """Invalid configuration value."""


class ShapeError(MsgcotError):
    """Operands do not satisfy an operation's shape contract."""


class TrainingError(MsgcotError):
    """Training diverged or hit an unrecoverable state."""

    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch


class CheckpointError(MsgcotError):
    """A persisted artifact is unreadable or does not match the request."""
