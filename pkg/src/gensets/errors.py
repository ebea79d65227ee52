"""
Exceptions raised by the gensets package.
Infeasible bounds, rank deficiency and unaccepted searches are reported as values, not raised.
"""

from typing import Optional


class GensetsError(Exception):
    """Base class for all package errors."""


class DomainError(GensetsError, ValueError):
    """A parameter lies outside its mathematical domain (alpha <= 1/2, lambda >= alpha, eps > 1, ...)."""


class ResourceCapError(GensetsError):
    """A configured size cap would be exceeded (cross cardinality, N^d, primality range)."""


class ExhaustionError(GensetsError):
    """An explicit sigma table has fewer entries than requested."""


class TruncationError(DomainError):
    """The surrogate index set J does not contain the first m indices."""


class ShapeError(GensetsError, ValueError):
    """Matrix and sample vector dimensions do not match."""


class PreconditionError(GensetsError):
    """A search precondition fails (modulus not prime, modulus too small)."""


class ConfigError(GensetsError):
    """Invalid experiment configuration; `field` names the offending entry."""

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        if field:
            message = "{}: {}".format(field, message)
        super().__init__(message)
