"""Exception types raised by spinequil."""


class SpinEquilError(Exception):
    """Base class for all package errors."""


class DomainError(SpinEquilError, ValueError):
    """An argument lies outside the domain of an operation."""


class ResourceLimitError(SpinEquilError):
    """The requested Hilbert-space dimension exceeds the configured cap."""

    def __init__(self, dim, cap):
        super().__init__(f"Hilbert dimension {dim} exceeds dimension cap {cap}")
        self.dim = dim
        self.cap = cap


class EigensolverError(SpinEquilError):
    """Dense diagonalization failed or produced an inaccurate decomposition."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class NoDynamicsError(SpinEquilError):
    """The state has no off-diagonal weight, so nothing evolves."""


class NeverCrossedError(SpinEquilError):
    """A signal never fell below the requested threshold in the sampled window."""


class InsufficientDataError(SpinEquilError, ValueError):
    """Too few points for a fit."""
