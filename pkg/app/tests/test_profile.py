"""Black and gray soliton profiles against the Gross–Pitaevskii closed forms.

Run:
    python -m pytest app/tests/test_profile.py -v
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from app.data import gp_reference
from app.errors import ResolutionError, ValidationError
from app.models.field import FieldState
from app.models.nonlinearity import ModelCase
from app.models.soliton import ProfileKind
from app.services.functionals import energy
from app.services.nonlinearity import builtin_model, kappa_tilde, speed_of_sound
from app.services.profile import (
    decay_rate_fit,
    expected_decay_rate,
    first_integral_residual,
    gray_profile,
    kink_energy_closed_form,
    kink_profile,
    madelung_variables,
    sample_field,
    second_order_residual,
    soliton_profile,
    traveling_wave_residual,
)


# ── Fixtures ──────────────────────────────────────────────────────────────────

@pytest.fixture(scope="module")
def gp():
    return builtin_model(ModelCase.GP1, 1.0, 0.0)


@pytest.fixture(scope="module")
def gp_kink(gp):
    return kink_profile(gp)


@pytest.fixture(scope="module")
def gp_gray(gp):
    return gray_profile(gp, 0.5)


# ── Tests ─────────────────────────────────────────────────────────────────────

class TestKink:
    def test_matches_tanh(self, gp_kink):
        x = gp_kink.grid
        window = np.abs(x) <= 10.0
        err = np.max(np.abs(gp_kink.signed[window] - gp_reference.kink(x[window])))
        assert err <= 1e-8, f"kink sup error {err:.2e}"

    def test_kink_is_odd_and_real(self, gp_kink):
        np.testing.assert_allclose(gp_kink.signed, -gp_kink.signed[::-1], atol=1e-14)
        assert gp_kink.kind is ProfileKind.kink
        assert np.all(gp_kink.phase == 0.0)
        assert gp_kink.mu_c == 0.0

    def test_field_energy_matches_closed_form(self, gp, gp_kink):
        value = energy(sample_field(gp_kink), gp)
        assert value == pytest.approx(gp_reference.KINK_ENERGY, abs=1e-6)
        assert kink_energy_closed_form(gp) == pytest.approx(gp_reference.KINK_ENERGY, abs=1e-10)

    @pytest.mark.parametrize("case", [ModelCase.GP1, ModelCase.GP2, ModelCase.SF3])
    @pytest.mark.parametrize("kappa", [0.0, 1.0])
    def test_least_energy_identity(self, case, kappa):
        model = builtin_model(case, 1.0, kappa)
        field_energy = energy(sample_field(kink_profile(model)), model)
        closed = kink_energy_closed_form(model)
        assert field_energy == pytest.approx(closed, abs=1e-6), (
            f"{model.descriptor.label}: grid {field_energy:.10f} vs closed form {closed:.10f}"
        )

    def test_first_integral_holds(self, gp, gp_kink):
        assert first_integral_residual(gp_kink, gp) <= 1e-6

    def test_quasilinear_kink_residuals(self):
        model = builtin_model(ModelCase.GP2, 1.0, 1.0)
        profile = kink_profile(model)
        assert first_integral_residual(profile, model) <= 1e-6
        assert second_order_residual(profile, model) <= 1e-5

    def test_profiles_are_cached(self, gp, gp_kink):
        assert kink_profile(gp) is gp_kink


class TestGray:
    def test_matches_closed_form(self, gp_gray):
        x = gp_gray.grid
        window = np.abs(x) <= 10.0
        err = np.max(np.abs(gp_gray.values[window] - gp_reference.gray(x[window], 0.5)))
        assert err <= 1e-6, f"gray sup error {err:.2e}"

    def test_minimum_modulus(self, gp_gray):
        assert gp_gray.mu_c == pytest.approx(gp_reference.mu(0.5), abs=1e-8)
        assert np.min(gp_gray.amplitude) >= gp_gray.mu_c - 1e-12

    def test_traveling_wave_equation(self, gp, gp_gray):
        assert traveling_wave_residual(sample_field(gp_gray), gp, 0.5) <= 1e-3

    def test_quasilinear_gray_satisfies_both_ode_forms(self):
        model = builtin_model(ModelCase.SF3, 1.0, 1.0)
        profile = gray_profile(model, 0.3 * speed_of_sound(model))
        assert first_integral_residual(profile, model) <= 1e-6
        assert second_order_residual(profile, model) <= 1e-5
        assert traveling_wave_residual(sample_field(profile), model, profile.c) <= 1e-3

    def test_madelung_phase_gradient(self, gp_gray):
        eta, dtheta = madelung_variables(sample_field(gp_gray))
        inner = np.abs(gp_gray.grid) <= 10.0
        np.testing.assert_allclose(eta[inner], gp_gray.eta[inner], atol=1e-12)
        expected = 0.5 * eta / (2.0 * (1.0 + eta))
        np.testing.assert_allclose(dtheta[inner], expected[inner], atol=1e-6)

    def test_madelung_needs_nonvanishing_field(self):
        grid = np.linspace(-5.0, 5.0, 201)
        field = FieldState(grid=grid, values=np.tanh(grid).astype(complex), r0=1.0)
        with pytest.raises(ResolutionError):
            madelung_variables(field)

    def test_zero_speed_needs_kink(self, gp):
        with pytest.raises(ValidationError):
            gray_profile(gp, 0.0)
        assert soliton_profile(gp, 0.0).kind is ProfileKind.kink


class TestResidualSweep:
    """First integral and second-order ODE on the builtin branches across κ."""

    @pytest.mark.parametrize("case", [ModelCase.GP1, ModelCase.GP2, ModelCase.SF3])
    @pytest.mark.parametrize("kappa_choice", ["above_tilde", "zero", "one", "five"])
    @pytest.mark.parametrize("fraction", [0.0, 0.3])
    def test_profile_residuals(self, case, kappa_choice, fraction):
        base = builtin_model(case, 1.0, 0.0)
        kappa = {
            "above_tilde": kappa_tilde(base) + 0.1,
            "zero": 0.0,
            "one": 1.0,
            "five": 5.0,
        }[kappa_choice]
        model = builtin_model(case, 1.0, kappa)
        c = fraction * speed_of_sound(model)
        profile = soliton_profile(model, c, n=8192)
        first = first_integral_residual(profile, model)
        second = second_order_residual(profile, model)
        label = f"{model.descriptor.label} κ={kappa:.3f} c={c:.3f}"
        assert first <= 1e-6, f"{label}: first integral residual {first:.2e}"
        assert second <= 1e-4, f"{label}: second-order residual {second:.2e}"

    def test_gp_kink_tail_keeps_relative_accuracy(self, gp_kink):
        # η = −sech²(x/√2) exactly; a cancelling dx/dy would distort the far tail
        x = gp_kink.grid
        tail = (x >= 10.0) & (x <= 18.0)
        exact = -1.0 / np.cosh(x[tail] / math.sqrt(2.0)) ** 2
        rel = np.max(np.abs(gp_kink.eta[tail] / exact - 1.0))
        assert rel <= 1e-6, f"relative tail error {rel:.2e}"

    def test_gp_kink_builds_on_long_grid(self, gp):
        profile = kink_profile(gp, x_max=40.0, n=8192)
        assert np.all(np.isfinite(profile.signed))
        assert first_integral_residual(profile, gp) <= 1e-6


class TestDecay:
    @pytest.mark.parametrize("kappa", [0.0, 1.0])
    @pytest.mark.parametrize("fraction", [0.0, 0.3])
    def test_fitted_rate(self, kappa, fraction):
        model = builtin_model(ModelCase.GP1, 1.0, kappa)
        c = fraction * speed_of_sound(model)
        fit = decay_rate_fit(soliton_profile(model, c))
        assert fit.expected == pytest.approx(expected_decay_rate(model, c))
        assert fit.relative_error <= 0.02, f"κ={kappa} c={c:.3f}: rate {fit.rate:.5f} vs {fit.expected:.5f}"

    def test_gp_rate(self, gp):
        assert expected_decay_rate(gp, 0.5) == pytest.approx(gp_reference.decay_rate(0.5))


class TestGridValidation:
    def test_too_few_nodes(self, gp):
        with pytest.raises(ValidationError):
            kink_profile(gp, n=64)

    def test_non_positive_extent(self, gp):
        with pytest.raises(ValidationError):
            kink_profile(gp, x_max=-1.0)

    def test_shift_outside_grid(self, gp_kink):
        with pytest.raises(ValidationError):
            sample_field(gp_kink, shift=1e3)

    def test_phase_offset_and_shift(self, gp_kink):
        field = sample_field(gp_kink, phase_offset=math.pi / 2, shift=1.0)
        x = field.grid
        inner = np.abs(x) <= 10.0
        np.testing.assert_allclose(field.values[inner], 1j * gp_reference.kink(x[inner] - 1.0), atol=1e-6)
