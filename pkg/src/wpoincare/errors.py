"""Exception hierarchy shared by every module of the toolkit."""


class WPError(Exception):
    """Base class for all toolkit errors."""


class DomainError(WPError, ValueError):
    """A point lies outside a profile's domain, or the value there is not finite."""


class BoundaryError(DomainError):
    """A finite-difference stencil would leave the domain."""


class QuadratureError(WPError, ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class ConfigurationError(WPError, ValueError):
    """A model or weight lacks data needed for the requested query."""


class DegenerateError(WPError, ValueError):
    """Degenerate input: dimension too small, vanishing gradient, and so on."""


class NoGreenFunctionError(WPError):
    """The model is parabolic, so no positive Green's function exists."""


class RangeError(WPError, IndexError):
    """A query falls outside the range covered by a precomputed table."""


class SolverError(WPError, RuntimeError):
    """An iterative solver (eigenvalue, shooting) did not converge."""


class FitError(WPError, ValueError):
    """A least-squares fit received unusable data."""


class HypothesisViolation(WPError, ValueError):
    """Inputs violate a stated hypothesis (for instance mu >= lambda_1)."""


class ZeroCrossingError(SolverError):
    """Integration of the warping ODE hit eta <= 0."""

    def __init__(self, t: float, message: str | None = None):
        self.t = t
        super().__init__(message or f"warping function reached eta <= 0 at t = {t:.12g}")


class AssemblyError(WPError, ArithmeticError):
    """A finite-element coefficient was not finite at a quadrature point."""


class DiagnosticsError(WPError, RuntimeError):
    """A computed sequence broke a property it must satisfy (e.g. monotonicity)."""
