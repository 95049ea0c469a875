"""Exception hierarchy shared across the package."""


class GaussTSError(Exception):
    """Base class for all package errors."""


class DomainError(GaussTSError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class BoundUndefinedError(DomainError):
    """A closed-form bound is undefined for the given parameters.

    Raised e.g. when B(1/2, -alpha) is requested with alpha >= 0.
    """


class AlphaInfeasibleError(BoundUndefinedError):
    pass


class EpsilonInfeasibleError(DomainError):
    pass


class DegenerateEnvironmentError(DomainError):
    """Environment violates a structural requirement (e.g. non-unique optimum)."""


class InsufficientDataError(DomainError):
    """Posterior requested for an arm with fewer than n0 observations."""


class DegenerateVarianceError(DomainError):
    """Centered sum of squares is numerically zero; posterior is undefined."""


class PreconditionError(DomainError):
    pass


class ConvergenceError(GaussTSError, RuntimeError):
    """An iterative evaluation ran out of iterations (internal error)."""


class ConfigError(GaussTSError):
    """Invalid experiment configuration; message names the offending field."""
