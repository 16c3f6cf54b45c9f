"""Exception types raised across the package."""


class SIRError(ValueError):
    """Base class for all domain errors."""


class InvalidProbabilityError(SIRError):
    """A transition probability left [0, 1].

    The offending value is kept on ``self.value`` so callers can report it.
    """

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class InconsistentCountsError(SIRError):
    """Count series violate conservation or monotonicity."""


class PopulationSizeError(SIRError):
    """Individual-level simulation requested for too large a population."""


class RootNotFoundError(SIRError):
    """A bracketed root search found no sign change."""


class NotEstimableError(SIRError):
    """No observation carries information about the requested parameter."""


class RankDeficiencyError(SIRError):
    """The least-squares Gram matrix is numerically singular."""


class SeriesLengthError(SIRError):
    """A series is too short for the requested computation."""


class EmptyResultError(SIRError):
    """Every Monte-Carlo replication was flagged."""


class NotFittedError(SIRError, AttributeError):
    """An estimator was used before ``fit``."""
