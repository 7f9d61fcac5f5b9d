"""Exception types shared across the toolkit."""


class GendyneError(Exception):
    """Base class for toolkit errors."""


class UnstableSystemError(GendyneError):
    """The drift matrix does not admit a steady state (A + A^T not negative)."""


class ConvergenceError(GendyneError):
    """An iterative solver failed to reach its residual target."""


class PhysicalityError(GendyneError):
    """A covariance matrix violates the uncertainty relation beyond tolerance."""


class NotStabilisingError(GendyneError):
    """A target covariance matrix is not a stabilising solution for (A, D)."""
