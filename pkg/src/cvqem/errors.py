"""Exception types shared across the package."""


class CvqemError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(CvqemError, ValueError):
    """Fock cutoff or matrix dimension is not usable."""


class DimensionMismatchError(CvqemError, ValueError):
    """Two objects that must share a dimension do not."""


class CutoffTooSmallError(CvqemError, ValueError):
    """Population leaked into the highest Fock levels beyond the guard."""


class IntegrationBlowupError(CvqemError, RuntimeError):
    """Non-finite entries appeared during time integration."""


class NumericalOverflowError(CvqemError, RuntimeError):
    """Phase-space evaluation produced non-finite values."""


class UndefinedSimilarityError(CvqemError, ValueError):
    """Cosine similarity requested for a zero-norm grid."""


class ShapeError(CvqemError, ValueError):
    """Tensor primitive called with incompatible shapes."""


class BackwardError(CvqemError, RuntimeError):
    """Misuse of the reverse-mode tape (e.g. double backward)."""


class HorizonViolationError(CvqemError, ValueError):
    """A training record carries a time beyond the training horizon."""


class DivergedTrainingError(CvqemError, RuntimeError):
    """Loss became non-finite; carries the last good checkpoint."""

    def __init__(self, message, last_checkpoint=None):
        super().__init__(message)
        self.last_checkpoint = last_checkpoint


class DivergedForwardError(CvqemError, RuntimeError):
    """Model forward pass produced non-finite values."""


class IterationDivergedError(CvqemError, RuntimeError):
    """Iterative mitigation produced a non-finite grid; carries the step index."""

    def __init__(self, message, step_index=None):
        super().__init__(message)
        self.step_index = step_index


class DecodeError(CvqemError, ValueError):
    """File could not be decoded."""


class MagicMismatchError(DecodeError):
    pass


class VersionMismatchError(DecodeError):
    pass


class TruncatedFileError(DecodeError):
    pass


class CheckpointMismatchError(CvqemError, ValueError):
    """Checkpoint does not match the requested model configuration."""


class ConfigError(CvqemError, ValueError):
    """Configuration file could not be parsed or is inconsistent."""
