"""Shared fixtures: the reference configuration, warmed kernels, helpers."""

from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from stochbar import integrate, rk4_reference, solve_basis
from stochbar.cli_io import parse_config
from stochbar.core_model import ConfigBundle, NumericsConfig
from stochbar.rom_assembly import ReducedSystem, assemble_system

REPO_ROOT = Path(__file__).resolve().parent.parent
CONFIG_PATH = REPO_ROOT / "reference_m1p5.json"

#: The four end-mass values of the reference study, lightest to heaviest.
FOUR_MASSES = (1.5, 7.5, 15.0, 75.0)

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=25,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def reference_bundle() -> ConfigBundle:
    """The shipped reference configuration (m = 1.5 kg study case)."""
    bundle = parse_config(CONFIG_PATH)
    assert isinstance(bundle, ConfigBundle)
    return bundle


@pytest.fixture(scope="session")
def bundle_with_mass(reference_bundle):
    """Factory: the reference bundle with the end mass replaced."""

    def build(lumped_mass: float) -> ConfigBundle:
        return dataclasses.replace(
            reference_bundle,
            phys=dataclasses.replace(reference_bundle.phys, lumped_mass=lumped_mass),
        )

    return build


@pytest.fixture(scope="session")
def nominal_basis(reference_bundle):
    """Mean-modulus basis of the reference configuration (10 modes)."""
    return solve_basis(
        reference_bundle.phys, reference_bundle.stoch.e_mean, reference_bundle.num.n_modes
    )


@pytest.fixture(scope="session")
def nominal_system(reference_bundle, nominal_basis) -> ReducedSystem:
    """Reduced system of the reference configuration at the mean modulus."""
    return assemble_system(
        nominal_basis,
        reference_bundle.phys,
        reference_bundle.stoch.e_mean,
        nominal_basis,
    )


def build_system(
    mass,
    damping,
    stiffness,
    *,
    force_shape=None,
    force_freq: float = 0.0,
    end_footprint=None,
    k_cub: float = 0.0,
    q0=None,
    v0=None,
) -> ReducedSystem:
    """Hand-build a reduced system from explicit matrices for kernel tests."""
    mass = np.atleast_2d(np.asarray(mass, dtype=float))
    n = mass.shape[0]

    def vec(value, default=0.0):
        if value is None:
            return np.full(n, default)
        return np.asarray(value, dtype=float).reshape(n)

    return ReducedSystem(
        mass=mass,
        damping=np.atleast_2d(np.asarray(damping, dtype=float)),
        stiffness=np.atleast_2d(np.asarray(stiffness, dtype=float)),
        force_shape=vec(force_shape),
        force_freq=float(force_freq),
        end_footprint=vec(end_footprint, default=1.0),
        k_cub=float(k_cub),
        q0=vec(q0),
        v0=vec(v0),
    )


@pytest.fixture(scope="session")
def warm_kernels():
    """Compile the integrator kernels once so timed tests measure solve time."""
    tiny = build_system([[1.0]], [[0.0]], [[1.0]], q0=[1.0])
    num = NumericsConfig(n_modes=1, dt=0.5)
    integrate(tiny, num, 1.0)
    rk4_reference(tiny, 0.5, 1.0)
    return True
