"""Galerkin reduction of the bar onto its first N mode shapes.

Projecting the weak form of the damped bar equation onto sin(lambda_a*x/L)
produces an N-dimensional second-order system

    M q'' + C q' + K q + k_cub*(s.q)^3 * s = g*sin(nu_f*t),

where s_a = sin(lambda_a) collects the mode-shape values at the loaded end.
The distributed force and the initial displacement are fixed functions of
space built once from the nominal-modulus basis; every realization projects
those same functions onto its own basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_model import PhysicalConfig
from .modal_basis import (
    ModalBasis,
    mode_mass_integral,
    mode_stiffness_integral,
    ramp_mode_integral,
    solve_basis,
)


@dataclass(frozen=True)
class ReducedSystem:
    """Matrices and force descriptors of the N-mode reduced model."""

    mass: np.ndarray          # N x N (kg)
    damping: np.ndarray       # N x N (N*s/m)
    stiffness: np.ndarray     # N x N (N/m)
    force_shape: np.ndarray   # g, N-vector (N); f(t) = g*sin(force_freq*t)
    force_freq: float         # rad/s
    end_footprint: np.ndarray  # s, with s_a = sin(lambda_a)
    k_cub: float              # cubic end-spring stiffness (N/m^3)
    q0: np.ndarray            # initial modal displacement (m)
    v0: np.ndarray            # initial modal velocity (m/s)

    @property
    def n_modes(self) -> int:
        return self.end_footprint.size


def _overlap_matrix(basis: ModalBasis) -> np.ndarray:
    lam = basis.lambdas
    return mode_mass_integral(lam[:, None], lam[None, :], basis.length)


def _mass_matrix(basis: ModalBasis, phys: PhysicalConfig) -> np.ndarray:
    s = np.sin(basis.lambdas)
    return (
        phys.rho * phys.area * _overlap_matrix(basis)
        + phys.lumped_mass * np.outer(s, s)
    )


def project_initial_conditions(
    basis: ModalBasis, nominal: ModalBasis, phys: PhysicalConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Project the fixed initial displacement onto the realization basis.

    The initial displacement is alpha1 times the nominal third mode shape
    plus the ramp alpha2*x; the initial velocity is zero.  q0 solves
    M q0 = r where r collects the mass-weighted inner products of the
    initial displacement with each basis function, including the lumped
    point-mass contribution at x = L.
    """
    lam = basis.lambdas
    s = np.sin(lam)
    length = basis.length
    end_value = phys.alpha2 * length
    r = phys.rho * phys.area * phys.alpha2 * ramp_mode_integral(lam, length)
    if phys.alpha1 != 0.0:
        # The third nominal eigenvalue is a property of the configuration,
        # not of the truncation level, so solve for it if the supplied
        # nominal basis is shorter than three modes.
        if nominal.n_modes >= 3:
            lam3 = nominal.lambdas[2]
        else:
            lam3 = solve_basis(phys, nominal.e_modulus, 3).lambdas[2]
        end_value += phys.alpha1 * np.sin(lam3)
        r = r + phys.rho * phys.area * phys.alpha1 * mode_mass_integral(
            lam3, lam, length
        )
    r = r + phys.lumped_mass * end_value * s
    q0 = np.linalg.solve(_mass_matrix(basis, phys), r)
    return q0, np.zeros_like(q0)


def assemble_system(
    basis: ModalBasis,
    phys: PhysicalConfig,
    e_modulus: float,
    nominal: ModalBasis,
) -> ReducedSystem:
    """Build the reduced system for one realization of the modulus.

    ``basis`` must have been built with ``e_modulus``; ``nominal`` is the
    mean-modulus basis that defines the (deterministic) forcing shape,
    forcing frequency, and initial conditions.
    """
    if basis.e_modulus != e_modulus:
        raise ValueError(
            f"basis was built with E={basis.e_modulus}, not {e_modulus}"
        )
    if basis.n_modes != nominal.n_modes:
        raise ValueError(
            f"basis has {basis.n_modes} modes but nominal has {nominal.n_modes}"
        )
    lam = basis.lambdas
    length = basis.length
    s = np.sin(lam)

    mass = _mass_matrix(basis, phys)
    damping = phys.damping * _overlap_matrix(basis)
    stiffness = e_modulus * phys.area * mode_stiffness_integral(
        lam[:, None], lam[None, :], length
    ) + phys.k_lin * np.outer(s, s)

    # The force has the spatial profile of the nominal first mode; its
    # projection is a plain (unweighted) inner product with each shape.
    force_shape = phys.sigma * mode_mass_integral(nominal.lambdas[0], lam, length)
    force_freq = float(nominal.frequencies[0])

    q0, v0 = project_initial_conditions(basis, nominal, phys)
    return ReducedSystem(
        mass=mass,
        damping=damping,
        stiffness=stiffness,
        force_shape=force_shape,
        force_freq=force_freq,
        end_footprint=s,
        k_cub=phys.k_cub,
        q0=q0,
        v0=v0,
    )


def external_force(t: float, sys: ReducedSystem) -> np.ndarray:
    """Modal force vector g*sin(nu_f*t) at time t >= 0."""
    return sys.force_shape * np.sin(sys.force_freq * t)


def nonlinear_force(q: np.ndarray, sys: ReducedSystem) -> np.ndarray:
    """Cubic end-spring force -k_cub*(s.q)^3 * s projected on the basis."""
    u_end = float(sys.end_footprint @ q)
    return -sys.k_cub * u_end**3 * sys.end_footprint


def nonlinear_tangent(q: np.ndarray, sys: ReducedSystem) -> np.ndarray:
    """Derivative of nonlinear_force: the rank-one matrix -3*k_cub*(s.q)^2 s s^T."""
    u_end = float(sys.end_footprint @ q)
    return -3.0 * sys.k_cub * u_end**2 * np.outer(
        sys.end_footprint, sys.end_footprint
    )


def reconstruct_end(
    q: np.ndarray, v: np.ndarray, sys: ReducedSystem
) -> tuple[float, float]:
    """Displacement and velocity of the bar end x = L from modal coordinates."""
    return float(sys.end_footprint @ q), float(sys.end_footprint @ v)
