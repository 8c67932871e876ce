"""Eigenvalues, natural frequencies, and mode shapes of the end-loaded bar.

A bar fixed at x = 0 with a lumped mass m and linear spring k attached at
x = L has separable free vibrations sin(lambda*x/L) whose dimensionless
eigenvalues solve the transcendental equation

    cot(lambda) + kappa/lambda - mu*lambda = 0,

with kappa = k*L/(A*E) and mu = m/(rho*A*L).  The left-hand side decreases
strictly from +inf to -inf on every interval ((n-1)*pi, n*pi), so each
interval holds exactly one root.  The module also provides the closed forms
of the inner products of the mode shapes needed by the Galerkin reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core_model import PhysicalConfig, wave_speed

# Bracket shrink for the bisection intervals; keeps clear of cotangent poles.
_BRACKET_EPS = 1.0e-9
_BISECT_MAX_ITER = 200
_NEWTON_POLISH_STEPS = 3
# Below this eigenvalue separation the 0/0 limit branch of the closed-form
# integrals takes over.
_COINCIDENT_TOL = 1.0e-8


@dataclass(frozen=True)
class ModalBasis:
    """First eigenvalues and natural frequencies for one elastic modulus."""

    lambdas: np.ndarray     # dimensionless eigenvalues, strictly increasing
    frequencies: np.ndarray  # natural frequencies (rad/s)
    e_modulus: float        # elastic modulus used to build the basis (Pa)
    length: float           # bar length (m)
    kappa: float            # k*L/(A*E)
    mu: float               # m/(rho*A*L)

    @property
    def n_modes(self) -> int:
        return self.lambdas.size


def characteristic_residual(lam: float, kappa: float, mu: float) -> float:
    """Left-hand side cot(lam) + kappa/lam - mu*lam of the eigenvalue equation."""
    if lam <= 0.0 or math.remainder(lam, math.pi) == 0.0:
        raise ValueError(
            f"characteristic residual undefined at lam={lam} (pole or nonpositive)"
        )
    return math.cos(lam) / math.sin(lam) + kappa / lam - mu * lam


def _residual_derivative(lam: float, kappa: float, mu: float) -> float:
    cot = math.cos(lam) / math.sin(lam)
    return -(1.0 + cot * cot) - kappa / (lam * lam) - mu


def _solve_root(n: int, kappa: float, mu: float) -> float:
    """Root of the characteristic equation inside ((n-1)*pi, n*pi)."""
    lo = (n - 1) * math.pi + _BRACKET_EPS
    hi = n * math.pi - _BRACKET_EPS
    f_lo = characteristic_residual(lo, kappa, mu)
    f_hi = characteristic_residual(hi, kappa, mu)
    if f_lo < 0.0 or f_hi > 0.0:
        # The residual decreases strictly across the interval, so this can
        # only be reached through a programming error.
        raise RuntimeError(f"root bracketing failed on interval {n}")
    for _ in range(_BISECT_MAX_ITER):
        if hi - lo < 1.0e-12:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break  # interval exhausted at float resolution
        if characteristic_residual(mid, kappa, mu) > 0.0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    # From a 1e-12-wide bracket Newton is contractive (|f'| >= 1 everywhere),
    # so a fixed number of polish steps reaches float resolution.
    for _ in range(_NEWTON_POLISH_STEPS):
        root -= characteristic_residual(root, kappa, mu) / _residual_derivative(
            root, kappa, mu
        )
    return root


def solve_basis(phys: PhysicalConfig, e_modulus: float, n_modes: int) -> ModalBasis:
    """First ``n_modes`` eigenvalues and frequencies at the given modulus."""
    if e_modulus <= 0.0:
        raise ValueError(f"e_modulus must be > 0, got {e_modulus}")
    if n_modes < 1:
        raise ValueError(f"n_modes must be >= 1, got {n_modes}")
    kappa = phys.k_lin * phys.length / (phys.area * e_modulus)
    mu = phys.lumped_mass / (phys.rho * phys.area * phys.length)
    lambdas = np.array(
        [_solve_root(n, kappa, mu) for n in range(1, n_modes + 1)], dtype=float
    )
    frequencies = lambdas * (wave_speed(e_modulus, phys.rho) / phys.length)
    return ModalBasis(
        lambdas=lambdas,
        frequencies=frequencies,
        e_modulus=e_modulus,
        length=phys.length,
        kappa=kappa,
        mu=mu,
    )


def mode_value(lam: float, x, length: float):
    """Mode shape sin(lam*x/L) evaluated at x (scalar or array)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(x > length):
        raise ValueError("x must lie inside the bar [0, L]")
    value = np.sin(lam * x / length)
    return float(value) if value.ndim == 0 else value


def _as_positive_arrays(*lams):
    arrays = tuple(np.asarray(lam, dtype=float) for lam in lams)
    for arr in arrays:
        if np.any(arr <= 0.0):
            raise ValueError("eigenvalue arguments must be > 0")
    return arrays


def mode_mass_integral(lambda_a, lambda_b, length: float):
    """Closed form of int_0^L sin(la*x/L) sin(lb*x/L) dx.

    Broadcasts over array arguments; switches to the coincidence-limit
    branch when the eigenvalues differ by less than 1e-8.
    """
    la, lb = _as_positive_arrays(lambda_a, lambda_b)
    diff = la - lb
    total = la + lb
    near = np.abs(diff) < _COINCIDENT_TOL
    safe = np.where(near, 1.0, diff)
    general = 0.5 * length * (np.sin(diff) / safe - np.sin(total) / total)
    lam = np.where(near, la, 1.0)
    equal = 0.5 * length * (1.0 - np.sin(2.0 * lam) / (2.0 * lam))
    out = np.where(near, equal, general)
    return float(out) if out.ndim == 0 else out


def mode_stiffness_integral(lambda_a, lambda_b, length: float):
    """Closed form of int_0^L (d/dx sin(la*x/L)) (d/dx sin(lb*x/L)) dx."""
    la, lb = _as_positive_arrays(lambda_a, lambda_b)
    diff = la - lb
    total = la + lb
    near = np.abs(diff) < _COINCIDENT_TOL
    safe = np.where(near, 1.0, diff)
    general = (
        la * lb / (2.0 * length) * (np.sin(diff) / safe + np.sin(total) / total)
    )
    lam = np.where(near, la, 1.0)
    equal = lam * lam / (2.0 * length) * (1.0 + np.sin(2.0 * lam) / (2.0 * lam))
    out = np.where(near, equal, general)
    return float(out) if out.ndim == 0 else out


def ramp_mode_integral(lam, length: float):
    """Closed form of int_0^L x sin(lam*x/L) dx."""
    (la,) = _as_positive_arrays(lam)
    out = length * length * (np.sin(la) / (la * la) - np.cos(la) / la)
    return float(out) if out.ndim == 0 else out
