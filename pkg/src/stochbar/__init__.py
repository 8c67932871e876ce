"""Stochastic dynamics of an elastic bar with nonlinear end attachments.

A bar fixed at one end carries a lumped mass, a linear spring, and a cubic
spring at the other.  Its elastic modulus is a gamma-distributed random
variable; uncertainty propagates by Monte Carlo over a Galerkin modal
reduced-order model integrated with the Newmark method.
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("stochbar")
except PackageNotFoundError:  # running from a source tree without metadata
    __version__ = "0.0.0+uninstalled"

from .core_model import (
    ConfigBundle,
    NumericsConfig,
    PhysicalConfig,
    StochasticConfig,
    mass_ratio,
    validate_config,
    wave_speed,
)
from .modal_basis import (
    ModalBasis,
    characteristic_residual,
    mode_mass_integral,
    mode_stiffness_integral,
    mode_value,
    ramp_mode_integral,
    solve_basis,
)
from .rom_assembly import (
    ReducedSystem,
    assemble_system,
    external_force,
    nonlinear_force,
    nonlinear_tangent,
    project_initial_conditions,
    reconstruct_end,
)
from .time_integration import (
    NewtonFailureError,
    State,
    Trajectory,
    initial_acceleration,
    integrate,
    newmark_step,
    rk4_reference,
)
from .uncertainty import (
    EnsembleFailureError,
    EnsembleResult,
    GammaSpec,
    StatsSummary,
    count_density_modes,
    gamma_pdf,
    mean_envelope,
    pdf_estimate,
    phase_mean,
    realization_stream,
    run_ensemble,
    run_realization,
    sample_modulus,
)

__all__ = [
    "__version__",
    "ConfigBundle",
    "NumericsConfig",
    "PhysicalConfig",
    "StochasticConfig",
    "mass_ratio",
    "validate_config",
    "wave_speed",
    "ModalBasis",
    "characteristic_residual",
    "mode_mass_integral",
    "mode_stiffness_integral",
    "mode_value",
    "ramp_mode_integral",
    "solve_basis",
    "ReducedSystem",
    "assemble_system",
    "external_force",
    "nonlinear_force",
    "nonlinear_tangent",
    "project_initial_conditions",
    "reconstruct_end",
    "NewtonFailureError",
    "State",
    "Trajectory",
    "initial_acceleration",
    "integrate",
    "newmark_step",
    "rk4_reference",
    "EnsembleFailureError",
    "EnsembleResult",
    "GammaSpec",
    "StatsSummary",
    "count_density_modes",
    "gamma_pdf",
    "mean_envelope",
    "pdf_estimate",
    "phase_mean",
    "realization_stream",
    "run_ensemble",
    "run_realization",
    "sample_modulus",
]
