"""Exception types shared across the toolkit.

Every error that a caller is expected to catch programmatically gets its own
class; plain ValueError/TypeError are reserved for programming mistakes.
"""


class IntFluxError(Exception):
    """Base class for toolkit errors."""


class InvalidInput(IntFluxError, ValueError):
    """Malformed user input: bad degrees, bad descriptors, bad parameters."""


class FieldDomainError(IntFluxError, ValueError):
    """Evaluation requested at a point where the field is undefined."""


class GridRangeError(FieldDomainError):
    """Evaluation or integration outside a sampled field's grid."""


class QuadratureIllConditioned(IntFluxError, RuntimeError):
    """A singularity sits on or too near the integration surface.

    Carries the offending face as (axis, sign) when known.
    """

    def __init__(self, message, face=None):
        super().__init__(message)
        self.face = face


class NoValidTranslation(IntFluxError, RuntimeError):
    """Every sampled lattice translation was rejected."""


class NonZeroTotalFlux(IntFluxError, ValueError):
    """Gauge fixing was handed a cube whose boundary total is not near zero."""


class SolverFailure(IntFluxError, RuntimeError):
    """A linear solve did not reach the requested residual."""


class CertificateInvalid(IntFluxError, ValueError):
    """A dual certificate violates a feasibility constraint."""


class NormEstimateDiverged(IntFluxError, RuntimeError):
    """Exclusion-radius extrapolation of an L^p norm failed to converge.

    Raised when the integral keeps growing as the excluded ball shrinks,
    i.e. the field is (numerically) not in L^p.
    """
