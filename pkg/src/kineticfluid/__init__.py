"""Fourier-Hermite spectral simulator and structure diagnostics for a coupled
compressible-fluid / kinetic-particle system in perturbation form on the
torus: conservation laws, entropy dissipation, operator coercivity,
fixed-point contraction, and decay to equilibrium, all checkable at desk
scale."""

from .errors import (
    ConfigurationError,
    DimensionError,
    DivergenceError,
    DomainError,
    EntropyDomainError,
    IterationError,
    KineticFluidError,
    OrderError,
    PresetError,
    ShapeError,
    StateError,
)
from .hermite import (
    BasisSpec,
    HermiteBasis,
    QuadratureTable,
    VelocityCoeffs,
    analyze,
    apply_L,
    apply_ladder,
    build_basis,
    coercivity_probe,
    gamma,
    moments,
    nu_inner,
    project,
    synthesize,
)
from .spectral import Grid
from .dynamics import (
    ModelParams,
    Schedule,
    SimState,
    StepStats,
    ft0,
    integrate,
    positivity_min,
    read_checkpoint,
    rhs_full,
    step_imex,
    step_picard,
    write_checkpoint,
    zero_state,
)
from .functionals import (
    EnergyReport,
    FunctionalWeights,
    conserved,
    energy_E0,
    energy_E1_D1,
    energy_E2_D2,
    energy_total,
    entropy_balance,
    fit_decay,
    mixed_sobolev_norm,
    moment_residuals,
    plain_norm,
    validate_weights,
    zero_mean_check,
)
from .harness import RunConfig, parse_config, preset_initial

__version__ = "0.1.0"
