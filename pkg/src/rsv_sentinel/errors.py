"""Exception hierarchy shared across the package.

``DataError`` subclasses map to CLI exit code 2, ``UsageError`` to 1,
anything else to 3.
"""


class RsvSentinelError(Exception):
    """Base class for all package errors."""


class UsageError(RsvSentinelError):
    """Bad command line or configuration input."""


class DataError(RsvSentinelError):
    """Invalid or insufficient data for the requested operation."""


# -- ingest ----------------------------------------------------------------

class MissingColumn(DataError):
    """A required CSV column is absent; the whole file is unusable."""


class UnknownState(DataError):
    """State code outside the configured surveillance roster."""


class NonFinite(DataError):
    """NaN or infinity where a finite value is required."""


class InsufficientCoverage(DataError):
    """Too few daily values inside a week to form a weekly mean."""


class NoData(DataError):
    """No records available for the requested key."""


class RejectRateExceeded(DataError):
    """Share of rejected rows in a source file crossed the ceiling."""


# -- panel -----------------------------------------------------------------

class NegativeRate(DataError):
    """Hospitalization rates cannot be negative."""


class EmptyPanel(DataError):
    """Join produced no usable panel rows."""


class ClassTooSmall(DataError):
    """A class has too few rows for the requested split or folding."""


class EmptyInput(DataError):
    """Operation requires at least one value."""


# -- analysis ---------------------------------------------------------------

class ZeroVariance(DataError):
    """Pearson correlation undefined for a constant vector."""


class LengthMismatch(DataError):
    """Paired sequences differ in length."""


class UnresolvedGroup(DataError):
    """A high-correlation group has no preference rule covering it."""


class UnknownGroup(DataError):
    """Unsupported group-by dimension."""


# -- learners ----------------------------------------------------------------

class EmptyNode(DataError):
    """Impurity undefined for an empty node."""


class SchemaMismatch(DataError):
    """Feature vector or artifact disagrees with the model's schema."""


class NonFiniteFeature(DataError):
    """Prediction input contains NaN or infinity."""


# -- evaluation ---------------------------------------------------------------

class SingleClassLabels(DataError):
    """ROC needs at least one positive and one negative label."""


class TestSetMismatch(DataError):
    """Evaluation reports were built on different test sets."""


# -- artifacts ----------------------------------------------------------------

class IoFailure(RsvSentinelError):
    """Artifact could not be written."""


class CorruptArtifact(DataError):
    """Artifact file is unreadable or structurally invalid."""


class UnsupportedVersion(DataError):
    """Artifact format version is not supported by this build."""
