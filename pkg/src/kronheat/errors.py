"""Exception types shared across the package."""


class KronheatError(Exception):
    """Base class for all package errors."""


class TruncationBudgetExceeded(KronheatError):
    """The requested entry tolerance cannot be met by the given j_max."""


class DimensionMismatch(KronheatError):
    """Operands have inconsistent shapes."""


class DegenerateElement(KronheatError):
    """A mesh element has nonpositive area."""


class NotPositiveDefinite(KronheatError):
    """A matrix required to be SPD failed its Cholesky factorization."""


class ConvergenceFailure(KronheatError):
    """An iterative decomposition did not converge within its budget."""


class DefectivePencil(KronheatError):
    """Eigenvector residual of the temporal pencil exceeds tolerance."""


class ImaginaryResidueTooLarge(KronheatError):
    """The imaginary part discarded from a real solution exceeds tolerance."""


class SingularMatrix(KronheatError):
    """A pivot fell below the singularity threshold during factorization."""


class SizeGuardExceeded(KronheatError):
    """A brute-force oracle was asked to handle a system beyond its guard."""


class UsageError(KronheatError):
    """An operation was invoked with an unusable configuration."""
