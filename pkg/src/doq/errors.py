"""Exception hierarchy.

``ValidationError`` covers bad inputs (CLI exit code 1); ``NumericalError``
covers failures that happen while computing on valid inputs (exit code 2).
"""


class ValidationError(ValueError):
    """Input outside the documented domain of an operation."""


class DomainError(ValidationError):
    pass


class DegenerateHurstError(DomainError):
    """Hurst index inside (0, 1) but too close to an endpoint to be usable."""


class DegenerateInputError(ValidationError):
    """Data that makes an estimator undefined (e.g. constant prices)."""


class ResourceCapError(ValidationError):
    """Requested problem size exceeds a configured cap."""


class AdmissibilityError(ValidationError):
    """Drift cut-on time too small for the change of measure to be justified."""


class DataFormatError(ValidationError):
    """Malformed or inconsistent input file."""


class NumericalError(RuntimeError):
    """A numerical routine failed on valid input (e.g. a non-PD covariance)."""


class GridTooCoarseError(NumericalError):
    """Finite-difference grid failed its refinement self-check."""
