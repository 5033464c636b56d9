"""Exception hierarchy shared by all ruin2d modules."""


class Ruin2dError(Exception):
    """Base class for all library-specific errors."""


class InvalidInput(Ruin2dError):
    """A parameter is outside the domain of the requested operation."""


class NonConvergence(Ruin2dError):
    """Numerical integration failed to reach the requested tolerance.

    Carries the best available value and its error estimate so that callers
    can decide whether the result is still usable.
    """

    def __init__(self, message, value=None, err_est=None):
        super().__init__(message)
        self.value = value
        self.err_est = err_est


class RegimeError(Ruin2dError):
    """The capital ratio / correlation pair is outside the asymptotic regime
    required by the requested operation."""


class MissingConstant(Ruin2dError):
    """An asymptotic evaluation needs an estimated prefactor constant that
    was not supplied."""


class DegenerateDrift(Ruin2dError):
    """The two drifts coincide, so the two-line barrier is degenerate."""


class DegenerateIS(Ruin2dError):
    """Importance sampling produced too small an effective sample size."""


class EmptySample(Ruin2dError):
    """A statistic was requested from an empty sample."""


class DegenerateModelWarning(UserWarning):
    """A parameter combination makes the result trivially degenerate
    (e.g. non-positive safety loading in the infinite-horizon formula)."""


class RegimeBoundaryWarning(UserWarning):
    """The capital ratio sits numerically on the boundary between two
    asymptotic regimes, where both branches degrade."""
