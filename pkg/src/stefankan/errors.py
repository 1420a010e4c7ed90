"""Exception types raised across the package."""


class StefanKanError(Exception):
    """Base class for all package-specific errors."""


class EvaluationError(StefanKanError, ValueError):
    """A non-finite or otherwise unusable coordinate reached an evaluator."""

    def __init__(self, message, coordinate=None):
        super().__init__(message)
        self.coordinate = coordinate


class ShapeError(StefanKanError, ValueError):
    """Input shape does not match the network or batch contract."""


class UnsupportedOperationError(StefanKanError, TypeError):
    """A recorded function used a primitive the tape does not support."""


class NonFiniteLossError(StefanKanError, FloatingPointError):
    """A loss evaluation produced a non-finite value.

    ``detail`` names the first non-finite intermediate on the tape.
    """

    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail


class DegenerateGradientError(StefanKanError, ValueError):
    """The level-set gradient vanished where a normal was required."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class DomainError(StefanKanError, ValueError):
    """Argument outside the mathematical domain of a special function."""


class RootBracketError(StefanKanError, ValueError):
    """A transcendental equation had no sign change on the search bracket."""


class ConfigError(StefanKanError, ValueError):
    """Invalid configuration value; ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class EmptyBatchError(StefanKanError, ValueError):
    """A loss term received an empty collocation batch."""


class CheckpointError(StefanKanError, ValueError):
    """Base class for checkpoint (de)serialization failures."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint format version is not supported."""


class CheckpointFormatError(CheckpointError):
    """Checkpoint document is truncated, unparseable, or carries bad values."""


class CheckpointShapeError(CheckpointError):
    """Checkpoint parameters are inconsistent with the declared shapes."""


class InterfaceExtractionError(StefanKanError, RuntimeError):
    """No usable zero crossing found when extracting the interface."""


class TrainingAbortError(StefanKanError, RuntimeError):
    """Training stopped early; the last written checkpoint is retained."""
