"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class OrdResError(Exception):
    """Base class for all package errors."""


class ContextMismatch(OrdResError):
    """Arithmetic between elements of different valued-field contexts."""


class NegativeValuation(OrdResError):
    """Residue reduction requested for an element of negative valuation."""


class IncompatibleRamification(OrdResError):
    """Embedding into a context whose ramification index is not a multiple."""


class RamificationNeeded(OrdResError):
    """A radius valuation falls outside the value group of the context."""


class DegenerateMap(OrdResError):
    """The two forms of a lift share a projective root (zero resultant)."""


class SingularMatrix(OrdResError):
    """A Moebius transformation with zero determinant."""


class IterationBudgetExceeded(OrdResError):
    """An iterate would have more coefficients than the configured budget."""


class ZeroPolynomial(OrdResError):
    """A Newton polygon or root count was requested for the zero polynomial."""


class IdentityMap(OrdResError):
    """The fixed-point form vanishes identically."""


class UnlocatableFixedPoints(OrdResError):
    """Fixed points lie in tangent directions not defined over the prime field."""


class PartialCoverage(OrdResError):
    """Some candidate points could not be analysed over the prime field."""

    def __init__(self, message: str, unresolved: list | None = None):
        super().__init__(message)
        self.unresolved = list(unresolved or [])


class NoStabilization(OrdResError):
    """Difference quotients did not settle before the minimum step."""


class SupportOffGraph(OrdResError):
    """A measure has atoms outside the skeleton it is integrated against."""


class NotProbability(OrdResError):
    """A measure expected to be a probability measure is not one."""


class TypeISupport(OrdResError):
    """A measure charges a classical point where only type II points are allowed."""


class RouteMismatch(OrdResError):
    """Two independent computations of the same quantity disagree."""


class ConfigInvalid(OrdResError):
    """An experiment configuration failed validation."""
