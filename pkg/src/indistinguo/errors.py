"""Exception hierarchy shared across the package.

Every error raised by library code derives from :class:`IndistinguoError` so
callers (and the command line front end) can map failures to a small set of
categories: bad input data, an unphysical scenario, or an estimation procedure
that cannot produce a trustworthy answer.
"""

__all__ = [
    "IndistinguoError",
    "DimensionError",
    "CapacityError",
    "InputDataError",
    "InvalidScenarioError",
    "RangeError",
    "DegenerateCaseError",
    "IdentifiabilityError",
    "ReconstructionError",
    "EstimatorError",
]


class IndistinguoError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(IndistinguoError, ValueError):
    """Matrix or vector shapes are inconsistent with the requested operation."""


class CapacityError(IndistinguoError, ValueError):
    """Problem size exceeds the documented limit of an exact algorithm."""


class InputDataError(IndistinguoError, ValueError):
    """Malformed user-supplied data (files, counts, duplicate modes, ...)."""


class InvalidScenarioError(IndistinguoError, ValueError):
    """A correlation matrix fails positivity or other physicality checks."""


class RangeError(IndistinguoError, ValueError):
    """A numeric argument or derived value falls outside its valid range."""


class DegenerateCaseError(IndistinguoError, ValueError):
    """The requested quantity is undefined for this input (zero denominator)."""


class IdentifiabilityError(IndistinguoError, RuntimeError):
    """The supplied design does not determine all parameters being estimated."""


class ReconstructionError(IndistinguoError, RuntimeError):
    """An optimization-based reconstruction failed to converge."""


class EstimatorError(IndistinguoError, RuntimeError):
    """A statistical estimator is unstable or its result is meaningless."""
