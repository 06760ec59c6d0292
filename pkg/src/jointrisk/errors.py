"""Exception hierarchy shared by all jointrisk modules."""


class JointRiskError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(JointRiskError):
    """An argument lies outside its mathematical domain (e.g. u not in [0,1])."""


class ParameterError(JointRiskError):
    """A family parameter violates its admissible range."""


class DimensionError(JointRiskError):
    """Dimensions of copulas, portfolios or distortion bundles disagree."""


class DataError(JointRiskError):
    """Scenario data is malformed (weights, finiteness, size, ties)."""


class FitError(JointRiskError):
    """Parameter estimation is infeasible for the requested family."""


class MatchError(JointRiskError):
    """Declared copula fails the goodness-of-fit assertion against the data."""


class DegenerateTailError(JointRiskError):
    """A conditional tail region has zero probability on the data."""


class TruncationError(JointRiskError):
    """A truncation level does not cover the range of the losses."""
