"""Exception hierarchy used across the package.

Every error raised on purpose derives from :class:`DWCavityError` so callers
can catch the whole family at once.  Validation problems additionally derive
from ``ValueError`` to stay friendly to generic argument checking.
"""


class DWCavityError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParamsError(DWCavityError, ValueError):
    """A parameter set or material description failed validation."""


class DomainError(DWCavityError, ValueError):
    """A quantity was requested outside its domain of definition.

    Examples: the bifurcation drive amplitude at non-negative effective
    detuning, or a branch-root index in a regime where that branch does
    not exist.
    """


class StabilityError(DWCavityError):
    """An operation that requires a dynamically stable working point was
    attempted on an unstable one."""


class ConditioningError(DWCavityError):
    """A linear solve was refused because the problem is singular or close
    enough to singular that the result would be noise."""


class ConvergenceError(DWCavityError):
    """An iterative procedure did not converge within its budget.

    The last iterate, when meaningful, is attached as ``last``.
    """

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class BracketError(DWCavityError, ValueError):
    """A root bracket does not actually straddle a sign change."""


class ResolutionError(DWCavityError):
    """A scan grid is too coarse for the feature analysis requested."""
