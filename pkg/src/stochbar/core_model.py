"""Model parameters, validation, and derived scalar quantities.

Three immutable configuration records describe a complete run: the
deterministic bar/spring/mass parameters, the probabilistic model of the
elastic modulus, and the numerical controls of the solver chain.  All
downstream modules consume these records read-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConfig:
    """Deterministic parameters of the bar and its end attachments.

    The bar is fixed at x = 0 and carries, at x = L, a lumped mass, a
    linear spring, and a cubic spring.  A distributed sine force drives
    it and the initial displacement is one mode shape plus a linear ramp.
    """

    rho: float            # mass density (kg/m^3)
    area: float           # cross-section area (m^2)
    length: float         # bar length L (m)
    damping: float        # distributed damping c, per unit length (N*s/m/m)
    k_lin: float          # linear end-spring stiffness k (N/m)
    k_cub: float          # cubic end-spring stiffness (N/m^3)
    lumped_mass: float    # point mass m at x = L (kg)
    sigma: float          # force amplitude (N)
    alpha1: float         # initial-condition modal amplitude (m)
    alpha2: float         # initial-condition ramp slope (dimensionless)
    t_final: float        # simulated duration T (s)


@dataclass(frozen=True)
class StochasticConfig:
    """Probabilistic model of the elastic modulus and ensemble controls."""

    e_mean: float         # mean elastic modulus (Pa)
    e_dispersion: float   # coefficient of variation of the modulus
    n_samples: int        # Monte Carlo ensemble size
    master_seed: int      # 64-bit seed of the whole ensemble


@dataclass(frozen=True)
class NumericsConfig:
    """Numerical controls for the modal reduction and time integration."""

    n_modes: int = 10
    dt: float = 1.0e-6
    newmark_beta: float = 0.25
    newmark_gamma: float = 0.5
    newton_tol_rel: float = 1.0e-10
    newton_tol_abs: float = 1.0e-12
    newton_max_iter: int = 25
    quadrature_order: int = 64


@dataclass(frozen=True)
class ConfigBundle:
    """A validated (physical, stochastic, numerics) triple."""

    phys: PhysicalConfig
    stoch: StochasticConfig
    num: NumericsConfig


def _check_positive(errors: list[str], name: str, value: float) -> None:
    if not (value > 0):
        errors.append(f"{name} must be > 0, got {value}")


def _check_nonnegative(errors: list[str], name: str, value: float) -> None:
    if not (value >= 0):
        errors.append(f"{name} must be >= 0, got {value}")


def validate_config(
    phys: PhysicalConfig, stoch: StochasticConfig, num: NumericsConfig
) -> ConfigBundle | list[str]:
    """Validate a configuration triple.

    Returns a :class:`ConfigBundle` holding the inputs unchanged when every
    field invariant holds, otherwise a list of messages, one per violated
    field.  Never raises for invalid values.
    """
    errors: list[str] = []

    _check_positive(errors, "rho", phys.rho)
    _check_positive(errors, "area", phys.area)
    _check_positive(errors, "length", phys.length)
    _check_nonnegative(errors, "damping", phys.damping)
    _check_nonnegative(errors, "k_lin", phys.k_lin)
    _check_nonnegative(errors, "k_cub", phys.k_cub)
    _check_nonnegative(errors, "lumped_mass", phys.lumped_mass)
    _check_nonnegative(errors, "sigma", phys.sigma)
    _check_positive(errors, "t_final", phys.t_final)

    _check_positive(errors, "e_mean", stoch.e_mean)
    if not (0.0 < stoch.e_dispersion < 1.0):
        errors.append(
            "e_dispersion must lie strictly inside (0, 1), got "
            f"{stoch.e_dispersion}"
        )
    if stoch.n_samples < 1:
        errors.append(f"n_samples must be >= 1, got {stoch.n_samples}")

    if num.n_modes < 1:
        errors.append(f"n_modes must be >= 1, got {num.n_modes}")
    _check_positive(errors, "dt", num.dt)
    if not (0.0 <= num.newmark_gamma <= 1.0):
        errors.append(f"newmark_gamma must lie in [0, 1], got {num.newmark_gamma}")
    if not (0.0 <= num.newmark_beta <= 0.5):
        errors.append(f"newmark_beta must lie in [0, 0.5], got {num.newmark_beta}")

    if errors:
        return errors
    return ConfigBundle(phys=phys, stoch=stoch, num=num)


def wave_speed(e_modulus: float, rho: float) -> float:
    """Longitudinal wave speed sqrt(E / rho) of the bar material (m/s)."""
    if e_modulus <= 0 or rho <= 0:
        raise ValueError(
            f"wave_speed requires positive inputs, got E={e_modulus}, rho={rho}"
        )
    return math.sqrt(e_modulus / rho)


def mass_ratio(phys: PhysicalConfig) -> float:
    """Ratio rho*A*L/m of distributed bar mass to the lumped end mass."""
    if phys.lumped_mass <= 0:
        raise ValueError("mass_ratio is undefined for lumped_mass <= 0")
    return phys.rho * phys.area * phys.length / phys.lumped_mass
