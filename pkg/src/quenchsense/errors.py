"""Exception types shared across the package."""


class QuenchSenseError(Exception):
    """Base class for all package errors."""


class NotHermitian(QuenchSenseError):
    """Matrix expected to be Hermitian is not (beyond tolerance)."""


class DimMismatch(QuenchSenseError):
    """Operands have incompatible dimensions."""


class DimTooLarge(QuenchSenseError):
    """Requested Hilbert-space dimension exceeds the supported range."""


class Degenerate(QuenchSenseError):
    """Ground state is (near-)degenerate; result would be ill-defined."""


class BxZero(QuenchSenseError):
    """Closed form requires a nonzero transverse field."""


class NoRoot(QuenchSenseError):
    """Bracketing scan found no sign change."""


class NoExtremum(QuenchSenseError):
    """Derivative scan found fewer extrema than required."""


class GapClosed(QuenchSenseError):
    """An intermediate Hamiltonian along the ramp has a degenerate ground state."""


class NonTerminating(QuenchSenseError):
    """Iterative schedule construction exceeded its step budget."""


class PositivityLost(QuenchSenseError):
    """Integrated density matrix developed a significantly negative eigenvalue."""


class DegenerateLikelihood(QuenchSenseError):
    """Posterior update normalizer vanished (all grid likelihoods ~ 0)."""


class BadRange(QuenchSenseError):
    """Invalid parameter interval."""


class NonPositive(QuenchSenseError):
    """Quantity that must be positive is not."""
