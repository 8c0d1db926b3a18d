"""Exception types shared across the package."""


class SizeError(ValueError):
    """A size/count precondition was violated (e.g. k > number of points)."""


class EmptyInputError(ValueError):
    """An operation received an empty point set."""


class TopologyError(ValueError):
    """A boundary is not closed / not manifold."""


class VisibilityError(RuntimeError):
    """No boundary element is visible from the requested view direction."""


class ResolutionError(ValueError):
    """Mesh resolution is incompatible with the requested geometry."""


class SolverError(RuntimeError):
    """Newton iteration failed to converge; carries the last residual norm."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class NumericError(RuntimeError):
    """A forward pass produced non-finite intermediate values."""
