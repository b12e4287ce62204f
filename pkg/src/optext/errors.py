"""Exception types shared across the library."""


class OptextError(Exception):
    """Base class for all library errors."""


class NonIntegrableWeightError(OptextError):
    """Weighted integral fails to converge (integrand not decaying)."""


class QuadratureError(OptextError):
    """Adaptive quadrature failed to reach the requested accuracy."""


class LimitUndefinedError(OptextError):
    """One-sided limit did not converge under extrapolation."""


class BoundaryValueError(OptextError):
    """Boundary value violates a precondition (zero or infinite)."""


class AdmissibilityError(OptextError):
    """Weight rejected by an admissibility precondition."""

    def __init__(self, message, violating_t=None):
        super().__init__(message)
        self.violating_t = violating_t


class PositivityViolationError(OptextError):
    """u''s - s'' <= 0 at a grid point (inadmissible weight signal)."""

    def __init__(self, message, violating_t=None):
        super().__init__(message)
        self.violating_t = violating_t


class ConstructionError(OptextError):
    """A constructive search (splice, tail, crossing) failed its budget."""


class InternalConsistencyError(OptextError):
    """Two independent evaluation routes disagree beyond tolerance."""


class DomainError(OptextError):
    """Point outside the domain of definition."""


class SingularityError(OptextError):
    """Evaluation requested at a singular point."""


class UnsupportedDomainError(OptextError):
    """Operation is defined only on a different domain kind."""


class ChartRangeError(OptextError):
    """Requested slab escapes the coordinate chart."""


class ConfigError(OptextError):
    """Run configuration failed strict parsing."""
