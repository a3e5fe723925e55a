"""Exception types shared across the package."""


class KineticFluidError(Exception):
    """Base class for all package errors."""


class ConfigurationError(KineticFluidError):
    """Invalid basis, grid, or run configuration."""


class DimensionError(KineticFluidError):
    """Axis index out of range for the configured dimension."""


class ShapeError(KineticFluidError):
    """Operands live on mismatched grids or velocity bases."""


class OrderError(KineticFluidError):
    """Requested derivative order exceeds the configured cap."""


class StateError(KineticFluidError):
    """Simulation state violates an invariant (vacuum guard, nonfinite entries)."""


class DivergenceError(KineticFluidError):
    """Time integration produced nonfinite values."""


class IterationError(KineticFluidError):
    """Fixed-point iteration failed to converge.

    Carries the residual history so callers can distinguish slow convergence
    from outright growth (dt too large for the contraction regime).
    """

    def __init__(self, message: str, residuals=None):
        super().__init__(message)
        self.residuals = list(residuals) if residuals is not None else []


class EntropyDomainError(KineticFluidError):
    """The phase-space density is nonpositive where an entropy integrand needs it."""


class DomainError(KineticFluidError):
    """Input values outside the mathematical domain of an operation (e.g.
    nonpositive samples handed to a log-linear fit)."""


class PresetError(KineticFluidError):
    """Initial-data preset cannot be realized with the requested parameters."""
