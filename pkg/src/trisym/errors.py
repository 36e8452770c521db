"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class TrisymError(Exception):
    """Base class for every error raised by the library."""


class InvalidDimension(TrisymError, ValueError):
    """A constructor received a dimension or rank outside its domain."""


class IdealityViolation(TrisymError):
    """A computed radical is not closed under brackets with the algebra."""


class NotAutomorphism(TrisymError):
    """The candidate order-3 map does not preserve the bracket."""


class NotOrderThree(TrisymError):
    """The candidate automorphism does not satisfy sigma^3 = 1."""


class SigmaIsIdentity(TrisymError):
    """The candidate automorphism is the identity."""


class TheoremViolation(TrisymError):
    """Independent computations of the same object disagree."""


class MismatchedAlgebra(TrisymError):
    """Representations that must share a Lie algebra do not."""


class NotAdmissible(TrisymError):
    """The representation fails one of the admissibility conditions."""


class BackgroundCheckFailed(TrisymError):
    """The candidate background metric fails its symmetry conditions."""


class LambdaNotScalar(TrisymError):
    """The Killing form on the complement is not a multiple of the metric."""


class NotInCentralizer(TrisymError):
    """A metric deformation does not lie in the required centralizer branch."""


class NotPositive(TrisymError):
    """A metric deformation or scale does not give a positive definite form."""


class SymmetryViolation(TrisymError):
    """A curvature tensor fails its pair symmetry."""


class JacobiViolation(TrisymError):
    """A bracket assembled from computed data violates the Jacobi identity."""


class QuaternionicUnsupported(TrisymError):
    """Moduli of quaternionic-type representations are not available."""


class OutOfDomain(TrisymError):
    """A moduli parameter lies outside the normal-form domain."""


class Inconclusive(TrisymError):
    """A numerical decision fell into the gap between accept and reject."""


class UnknownModelId(TrisymError, KeyError):
    """A catalog or model identifier could not be resolved."""

    def __str__(self) -> str:
        return Exception.__str__(self)


class BadMetricFlag(TrisymError, ValueError):
    """A command-line metric specification could not be parsed."""
