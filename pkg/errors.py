"""
Exception hierarchy for the GritNet outcome predictor.

Every failure raised on purpose by the package derives from GritNetError so
the command line can tell expected failures from programming errors.
"""


class GritNetError(Exception):
    """Base class for all expected failures."""


# Event encoding

class SchemaMismatchError(GritNetError):
    """An event does not fit the course schema (ordinal out of bounds, bad outcome)."""


class OrderingError(GritNetError):
    """Day stamps go backwards where a non-decreasing order is required."""


class EmptyInputError(GritNetError):
    """An operation received no events, students or sequences."""


class VocabularyError(GritNetError):
    """A token lies outside the model vocabulary."""


class DatasetValidationError(GritNetError):
    """Event, label or schema files are inconsistent with each other."""


# Numerics

class ShapeError(GritNetError):
    """Operand shapes are incompatible."""


class NumericFailureError(GritNetError):
    """A computation produced NaN or Inf."""


class GradCheckError(GritNetError):
    """Analytic gradients disagree with finite differences."""

    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = offending or []


# Checkpoints

class CheckpointError(GritNetError):
    """Base class for checkpoint read failures."""


class CheckpointVersionError(CheckpointError):
    """The checkpoint was written by an unsupported format version."""


class CorruptCheckpointError(CheckpointError):
    """The checkpoint file is truncated or malformed."""


class ConfigMismatchError(CheckpointError):
    """The checkpoint vocabulary does not match the course schema."""


# Training and adaptation

class StratificationError(GritNetError):
    """Folds cannot be stratified (single class or too few members)."""


class TrainingConfigError(GritNetError):
    """Training was asked to run with an unusable configuration or dataset."""


class DegenerateLabelError(GritNetError):
    """Pseudo-labels collapsed to a single class."""

    def __init__(self, message, theta=None):
        super().__init__(message)
        self.theta = theta


# Metrics

class UndefinedAUCError(GritNetError):
    """AUC requested for a label set with a single class."""


class UndefinedARRError(GritNetError):
    """ARR requested where oracle and baseline AUC coincide."""


# Synthetic data

class CalibrationError(GritNetError):
    """Bisection could not reach the requested graduation rate."""


# Command line

class UsageError(GritNetError):
    """Invalid command-line usage or configuration."""
