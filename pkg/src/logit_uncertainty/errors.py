"""Exception types raised across the toolkit.

Errors fall into two rough groups, mirrored by the CLI exit codes:
usage errors (bad arguments or hyperparameters) and data/model errors
(unreadable files, unfittable inputs, numerical breakdown).
"""


class LogitUncertaintyError(Exception):
    """Base class for every error raised by this package."""


# --- tabular / file ingestion ---------------------------------------------

class MalformedRow(LogitUncertaintyError):
    """A CSV row is non-numeric, has the wrong arity, or a bad header."""


class LabelOutOfRange(LogitUncertaintyError):
    """A label or prediction index falls outside [0, num_classes)."""


class EmptyFile(LogitUncertaintyError):
    """The input file contains no header at all."""


class PredictionMismatch(LogitUncertaintyError):
    """A stored prediction disagrees with the argmax of its logits."""


class SchemaVersionMismatch(LogitUncertaintyError):
    """A model file declares a schema version this code does not know."""


class CorruptModelFile(LogitUncertaintyError):
    """A model file is truncated, not JSON, or structurally invalid."""


class IoFailure(LogitUncertaintyError):
    """An OS-level read or write failed."""


# --- mixture fitting -------------------------------------------------------

class InsufficientData(LogitUncertaintyError):
    """Fewer data points than mixture components."""


class NumericalFailure(LogitUncertaintyError):
    """A Cholesky factorization failed even after regularization."""


# --- calibration -----------------------------------------------------------

class EmptyCandidateSet(LogitUncertaintyError):
    """No candidate points were supplied for the density-maximum search."""


class EmptyInput(LogitUncertaintyError):
    """An operation that needs at least one value received none."""


class DegenerateScores(LogitUncertaintyError):
    """The two score quantiles coincide; the logistic map is undefined."""


class DegenerateHyperparams(LogitUncertaintyError):
    """Hyperparameters violate 0 < u2 < u1 < 1 or 0 < q2 < q1 < 1."""


# --- end-to-end model ------------------------------------------------------

class NoFittableClass(LogitUncertaintyError):
    """Every class ended up unfitted."""


class ClassNotFitted(LogitUncertaintyError):
    """A prediction landed in a class without a fitted mixture."""

    def __init__(self, message, indices=None):
        super().__init__(message)
        self.indices = list(indices) if indices is not None else None


# --- applications ----------------------------------------------------------

class LengthMismatch(LogitUncertaintyError):
    """Paired vectors have different lengths."""
