"""Configuration records, validation, and the derived scalar quantities."""

import dataclasses
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from stochbar.core_model import (
    ConfigBundle,
    NumericsConfig,
    PhysicalConfig,
    StochasticConfig,
    mass_ratio,
    validate_config,
    wave_speed,
)

#: Wave speed of the reference material, rho = 7900 kg/m^3, E = 203 GPa.
REFERENCE_WAVE_SPEED = 5069.142188935478

#: Bar-to-end-mass ratio of the reference bar with m = 1.5 kg.
REFERENCE_MASS_RATIO = 10.341075818066402


class TestValidateConfig:
    def test_reference_configuration_is_valid(self, reference_bundle):
        result = validate_config(
            reference_bundle.phys, reference_bundle.stoch, reference_bundle.num
        )
        assert isinstance(result, ConfigBundle)
        assert result.phys is reference_bundle.phys
        assert result.stoch is reference_bundle.stoch
        assert result.num is reference_bundle.num

    def test_negative_lumped_mass_is_named(self, reference_bundle):
        phys = dataclasses.replace(reference_bundle.phys, lumped_mass=-1.0)
        errors = validate_config(phys, reference_bundle.stoch, reference_bundle.num)
        assert isinstance(errors, list)
        assert len(errors) == 1
        assert "lumped_mass" in errors[0]

    def test_zero_dispersion_is_named(self, reference_bundle):
        stoch = dataclasses.replace(reference_bundle.stoch, e_dispersion=0.0)
        errors = validate_config(reference_bundle.phys, stoch, reference_bundle.num)
        assert isinstance(errors, list)
        assert any("e_dispersion" in msg for msg in errors)

    def test_dispersion_of_one_or_more_rejected(self, reference_bundle):
        for bad in (1.0, 1.5):
            stoch = dataclasses.replace(reference_bundle.stoch, e_dispersion=bad)
            errors = validate_config(reference_bundle.phys, stoch, reference_bundle.num)
            assert isinstance(errors, list)
            assert any("e_dispersion" in msg for msg in errors)

    def test_every_violation_is_reported(self, reference_bundle):
        phys = dataclasses.replace(reference_bundle.phys, rho=-1.0, t_final=0.0)
        num = dataclasses.replace(reference_bundle.num, dt=0.0)
        errors = validate_config(phys, reference_bundle.stoch, num)
        assert isinstance(errors, list)
        joined = "\n".join(errors)
        assert "rho" in joined
        assert "t_final" in joined
        assert "dt" in joined
        assert len(errors) == 3

    def test_validation_never_raises_and_is_idempotent(self, reference_bundle):
        first = validate_config(
            reference_bundle.phys, reference_bundle.stoch, reference_bundle.num
        )
        second = validate_config(first.phys, first.stoch, first.num)
        assert isinstance(second, ConfigBundle)
        assert second == first

    def test_boundary_values_accepted(self, reference_bundle):
        # Zero damping, springs, end mass, and force amplitude are all legal.
        phys = dataclasses.replace(
            reference_bundle.phys,
            damping=0.0,
            k_lin=0.0,
            k_cub=0.0,
            lumped_mass=0.0,
            sigma=0.0,
        )
        result = validate_config(phys, reference_bundle.stoch, reference_bundle.num)
        assert isinstance(result, ConfigBundle)

    def test_sample_count_below_one_rejected(self, reference_bundle):
        stoch = dataclasses.replace(reference_bundle.stoch, n_samples=0)
        errors = validate_config(reference_bundle.phys, stoch, reference_bundle.num)
        assert isinstance(errors, list)
        assert any("n_samples" in msg for msg in errors)


class TestWaveSpeed:
    def test_unit_ratio(self):
        assert wave_speed(4.0, 4.0) == 1.0

    def test_simple_ratio(self):
        assert wave_speed(4.0, 1.0) == 2.0

    def test_reference_material(self, reference_bundle):
        c = wave_speed(reference_bundle.stoch.e_mean, reference_bundle.phys.rho)
        assert c == pytest.approx(REFERENCE_WAVE_SPEED, rel=1e-13)

    @pytest.mark.parametrize("e_modulus, rho", [(0.0, 1.0), (-2.0, 1.0), (1.0, 0.0), (1.0, -3.0)])
    def test_nonpositive_inputs_rejected(self, e_modulus, rho):
        with pytest.raises(ValueError):
            wave_speed(e_modulus, rho)

    @given(
        e_modulus=st.floats(min_value=1e6, max_value=1e13),
        rho=st.floats(min_value=1.0, max_value=1e5),
        scale=st.floats(min_value=1e-3, max_value=1e3),
    )
    def test_scaling_in_modulus(self, e_modulus, rho, scale):
        assert wave_speed(scale * e_modulus, rho) == pytest.approx(
            math.sqrt(scale) * wave_speed(e_modulus, rho), rel=1e-12
        )


class TestMassRatio:
    def test_equal_masses_give_one(self, reference_bundle):
        phys = reference_bundle.phys
        bar_mass = phys.rho * phys.area * phys.length
        assert mass_ratio(dataclasses.replace(phys, lumped_mass=bar_mass)) == pytest.approx(1.0, rel=1e-15)

    def test_reference_value(self, reference_bundle):
        assert mass_ratio(reference_bundle.phys) == pytest.approx(
            REFERENCE_MASS_RATIO, rel=1e-13
        )
        assert round(mass_ratio(reference_bundle.phys)) == 10

    def test_heaviest_case_rounds_to_point_two(self, reference_bundle):
        phys = dataclasses.replace(reference_bundle.phys, lumped_mass=75.0)
        assert round(mass_ratio(phys), 1) == 0.2

    @pytest.mark.parametrize("bad_mass", [0.0, -1.0])
    def test_nonpositive_end_mass_rejected(self, reference_bundle, bad_mass):
        phys = dataclasses.replace(reference_bundle.phys, lumped_mass=bad_mass)
        with pytest.raises(ValueError):
            mass_ratio(phys)

    @given(scale=st.floats(min_value=1e-3, max_value=1e3))
    def test_inverse_scaling_in_end_mass(self, reference_bundle, scale):
        phys = reference_bundle.phys
        scaled = dataclasses.replace(phys, lumped_mass=scale * phys.lumped_mass)
        assert mass_ratio(scaled) == pytest.approx(
            mass_ratio(phys) / scale, rel=1e-12
        )


def test_numerics_defaults():
    num = NumericsConfig()
    assert num.n_modes == 10
    assert num.dt == 1.0e-6
    assert num.newmark_beta == 0.25
    assert num.newmark_gamma == 0.5
    assert num.newton_tol_rel == 1.0e-10
    assert num.newton_tol_abs == 1.0e-12
    assert num.newton_max_iter == 25
    assert num.quadrature_order == 64


def test_records_are_immutable(reference_bundle):
    with pytest.raises(dataclasses.FrozenInstanceError):
        reference_bundle.phys.rho = 1.0
    with pytest.raises(dataclasses.FrozenInstanceError):
        reference_bundle.stoch.master_seed = 1
    with pytest.raises(dataclasses.FrozenInstanceError):
        reference_bundle.num.dt = 1.0
