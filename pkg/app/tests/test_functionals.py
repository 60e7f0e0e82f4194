"""Energy, both momenta, the Lyapunov functional and the distances.

Run:
    python -m pytest app/tests/test_functionals.py -v
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from app.data import gp_reference
from app.errors import ResolutionError, ValidationError
from app.models.field import BoundaryKind, FieldState
from app.models.nonlinearity import ModelCase
from app.services.functionals import (
    distance_d0,
    distance_dinf,
    distance_dmod,
    distance_dX,
    energy,
    energy_density,
    functional_report,
    kink_minimality_check,
    lyapunov,
    momentum_bound,
    momentum_renormalized,
    momentum_untwisted,
    triangle_wave_field,
)
from app.services.nonlinearity import builtin_model, pointwise_energy_constants
from app.services.profile import gray_profile, kink_profile, sample_field
from app.utils.numerics import d1


# ── Fixtures ──────────────────────────────────────────────────────────────────

@pytest.fixture(scope="module")
def gp():
    return builtin_model(ModelCase.GP1, 1.0, 0.0)


@pytest.fixture(scope="module")
def kink(gp):
    return sample_field(kink_profile(gp))


@pytest.fixture(scope="module")
def gray(gp):
    return sample_field(gray_profile(gp, 0.5))


@pytest.fixture(scope="module")
def tanh_grid():
    # odd sample count: x = 0 is a node and tanh vanishes there
    return np.linspace(-20.0, 20.0, 4001)


def _tanh_field(grid: np.ndarray, scale: float = 1.0) -> FieldState:
    return FieldState(grid=grid, values=np.tanh(scale * grid / math.sqrt(2.0)), r0=1.0)


def _random_modulated(grid: np.ndarray, rng: np.random.Generator, swing: float) -> np.ndarray:
    """(1 + swing·tanh(Σ Gaussians))·e^{iθ}: smooth, background at the ends, modulus in (1−swing, 1+swing)."""
    bumps = np.zeros_like(grid)
    phase = np.zeros_like(grid)
    for _ in range(rng.integers(1, 4)):
        x0, width = rng.uniform(-5.0, 5.0), rng.uniform(0.7, 2.0)
        bumps += rng.uniform(-3.0, 3.0) * np.exp(-(((grid - x0) / width) ** 2))
        phase += rng.uniform(-2.0, 2.0) * 0.5 * (1.0 + np.tanh((grid - x0) / width))
    return (1.0 + swing * np.tanh(bumps)) * np.exp(1j * phase)


# ── Tests ─────────────────────────────────────────────────────────────────────

class TestEnergy:
    def test_background_is_zero(self, tanh_grid, gp):
        field = FieldState(grid=tanh_grid, values=np.ones_like(tanh_grid), r0=1.0)
        assert energy(field, gp) == 0.0

    def test_kink_energy(self, kink, gp):
        assert energy(kink, gp) == pytest.approx(gp_reference.KINK_ENERGY, rel=1e-6)

    def test_gray_energy(self, gray, gp):
        assert energy(gray, gp) == pytest.approx(gp_reference.energy(0.5), rel=1e-6)


class TestMomenta:
    def test_gray_renormalized_momentum(self, gray):
        assert momentum_renormalized(gray) == pytest.approx(gp_reference.momentum(0.5), abs=1e-6)

    def test_untwisted_equals_renormalized_when_nonvanishing(self, gray):
        p = momentum_renormalized(gray)
        untwisted = momentum_untwisted(gray)
        assert untwisted == pytest.approx(p, abs=1e-6), f"𝒫={untwisted} P={p}"

    def test_kink_untwisted_momentum_is_pi(self, kink):
        assert momentum_untwisted(kink) == pytest.approx(math.pi, abs=1e-10)

    def test_renormalized_undefined_on_zero(self, tanh_grid):
        with pytest.raises(ValidationError):
            momentum_renormalized(_tanh_field(tanh_grid))

    def test_untwisted_defined_on_zero(self, tanh_grid):
        assert momentum_untwisted(_tanh_field(tanh_grid)) == pytest.approx(math.pi, abs=1e-10)

    def test_untwisted_in_range_for_phase_shifted_gray(self, gp):
        field = sample_field(gray_profile(gp, 0.5), phase_offset=2.0)
        value = momentum_untwisted(field)
        assert 0.0 <= value < 2.0 * math.pi
        assert value == pytest.approx(gp_reference.momentum(0.5), abs=1e-6)

    def test_momentum_bound(self, gray):
        p, rhs = momentum_bound(gray)
        assert p <= rhs, f"|P|={p} exceeds bound {rhs}"

    def test_endpoint_away_from_background(self, tanh_grid):
        with pytest.raises(ValueError, match="grid ends"):
            FieldState(grid=tanh_grid, values=0.1 * np.ones_like(tanh_grid), r0=1.0)
        with pytest.raises(ValueError, match="grid ends"):
            FieldState(grid=tanh_grid, values=np.tanh(tanh_grid) * (tanh_grid < 19.0), r0=1.0)
        periodic = FieldState(
            grid=tanh_grid, values=0.1 * np.ones_like(tanh_grid), r0=1.0, boundary_kind=BoundaryKind.Periodic
        )
        assert momentum_untwisted(periodic) == 0.0

    def test_unresolved_phase_jump(self):
        grid = np.linspace(-10.0, 10.0, 200)
        field = FieldState(grid=grid, values=np.sign(grid), r0=1.0)
        with pytest.raises(ResolutionError):
            momentum_untwisted(field)


class TestLyapunov:
    def test_equals_energy_on_kink(self, kink, gp):
        assert lyapunov(kink, gp, 1.0) == pytest.approx(energy(kink, gp), abs=1e-12)

    def test_penalises_momentum_away_from_pi(self, gray, gp):
        M = 3.0
        twist = math.sin((gp_reference.momentum(0.5) - math.pi) / 2.0)
        expected = gp_reference.energy(0.5) + 2.0 * M * twist**2
        assert lyapunov(gray, gp, M) == pytest.approx(expected, rel=1e-6)

    def test_weight_must_be_positive(self, kink, gp):
        with pytest.raises(ValidationError):
            lyapunov(kink, gp, 0.0)

    def test_report(self, tanh_grid, gp):
        report = functional_report(_tanh_field(tanh_grid), gp, M=1.0)
        assert report.momentum_renormalized is None
        assert report.momentum_untwisted == pytest.approx(math.pi, abs=1e-10)
        assert report.energy == pytest.approx(gp_reference.KINK_ENERGY, rel=1e-6)
        assert report.lyapunov == pytest.approx(report.energy, abs=1e-12)
        assert report.min_modulus == 0.0
        assert report.quadrature_error < 1e-4


class TestDistances:
    def test_zero_on_identical_fields(self, kink):
        for distance in (distance_dX, distance_dinf, distance_dmod, distance_d0):
            assert distance(kink, kink) == 0.0, distance.__name__

    def test_dX_never_exceeds_dinf(self, kink):
        rng = np.random.default_rng(7)
        for _ in range(100):
            bump = rng.normal(size=kink.grid.size) + 1j * rng.normal(size=kink.grid.size)
            scale = rng.uniform(0.0, 0.1)
            other = kink.with_values(kink.values + scale * np.exp(-kink.grid**2) * bump)
            assert distance_dX(kink, other) <= distance_dinf(kink, other) + 1e-14

    def test_triangle_wave_separates_distances(self):
        grid = np.arange(-10200.0, 100.5, 0.5)
        background = FieldState(grid=grid, values=np.ones_like(grid), r0=1.0)
        for n in (25, 50, 100):
            wave = triangle_wave_field(n, grid)
            dX = distance_dX(wave, background)
            dinf = distance_dinf(wave, background)
            assert dX**2 * n == pytest.approx(2.0, rel=5e-2), f"n={n}: d_X²={dX**2}"
            assert math.sqrt(dinf**2 - dX**2) == pytest.approx(2.0 * math.sin(0.5), abs=1e-9)

    def test_triangle_index_validated(self):
        with pytest.raises(ValidationError):
            triangle_wave_field(0, np.linspace(-1.0, 1.0, 32))

    def test_grid_mismatch(self, kink):
        other = FieldState(grid=np.linspace(-5.0, 5.0, 64), values=np.ones(64), r0=1.0)
        with pytest.raises(ValidationError):
            distance_dX(kink, other)

    def test_d0_locally_comparable_to_dX(self, kink):
        rng = np.random.default_rng(11)
        ratios = []
        for _ in range(100):
            bump = (rng.uniform(-1.0, 1.0) + 1j * rng.uniform(-1.0, 1.0)) * np.exp(
                -((kink.grid - rng.uniform(-3.0, 3.0)) ** 2) / rng.uniform(0.5, 2.0)
            )
            other = kink.with_values(kink.values + rng.uniform(1e-3, 0.2) * bump)
            dX = distance_dX(kink, other)
            assert dX <= 1.0
            ratios.append(distance_d0(kink, other) / dX)
        assert 0.1 <= min(ratios) and max(ratios) <= 10.0, f"d₀/d_X in [{min(ratios):.3g}, {max(ratios):.3g}]"

    def test_d0_of_grid_shift(self, gp):
        profile = kink_profile(gp)
        kink = sample_field(profile)
        dx = kink.dx
        one = distance_d0(kink, sample_field(profile, shift=dx))
        two = distance_d0(kink, sample_field(profile, shift=2.0 * dx))
        assert one > 0.0
        assert one / dx <= 10.0, f"d₀/dx = {one / dx:.3g}"
        assert two / one == pytest.approx(2.0, rel=1e-2)


class TestPointwiseBounds:
    @pytest.mark.parametrize("kappa", [-0.2, 0.0, 1.0])
    def test_energy_density_controls_gradient_and_eta(self, tanh_grid, kappa):
        model = builtin_model(ModelCase.GP1, 1.0, kappa)
        K = pointwise_energy_constants(model).K
        rng = np.random.default_rng(5)
        for _ in range(20):
            field = FieldState(grid=tanh_grid, values=_random_modulated(tanh_grid, rng, swing=0.4), r0=1.0)
            density = energy_density(field, model)
            eta = field.modulus**2 - 1.0
            floor = (np.abs(d1(field.values, field.dx)) ** 2 + eta**2) / K
            worst = float(np.min(density - floor))
            assert worst >= -1e-10, f"κ={kappa}: e_κ undercuts the bound by {-worst:.2e}"

    def test_momentum_bound_on_random_fields(self, tanh_grid):
        rng = np.random.default_rng(17)
        for k in range(100):
            field = FieldState(grid=tanh_grid, values=_random_modulated(tanh_grid, rng, swing=0.4), r0=1.0)
            p, rhs = momentum_bound(field)
            assert p <= rhs + 1e-12, f"field {k}: |P|={p:.6g} exceeds {rhs:.6g}"


class TestKinkMinimality:
    def test_rescaled_tanh_costs_more(self, tanh_grid, gp):
        fields = [_tanh_field(tanh_grid, scale) for scale in (0.8, 1.0, 1.25)]
        gap = kink_minimality_check(gp, fields)
        assert abs(gap) <= 1e-6, f"minimum gap {gap} should come from the kink itself"
        for scale, field in zip((0.8, 1.25), fields[::2]):
            expected = (scale**2 + 1.0) / (2.0 * scale) * gp_reference.KINK_ENERGY
            assert energy(field, gp) == pytest.approx(expected, rel=1e-6)

    def test_needs_fields(self, gp):
        with pytest.raises(ValidationError):
            kink_minimality_check(gp, [])

    @pytest.mark.parametrize("kappa", [0.0, 1.0])
    def test_random_vanishing_fields_cost_more(self, tanh_grid, kappa):
        model = builtin_model(ModelCase.GP1, 1.0, kappa)
        rng = np.random.default_rng(23)
        fields = []
        for _ in range(50):
            x0 = tanh_grid[rng.integers(1700, 2300)]
            scale = rng.uniform(0.7, 1.4)
            core = np.tanh((tanh_grid - x0) / (math.sqrt(2.0) * scale))
            values = core * _random_modulated(tanh_grid, rng, swing=0.3)
            field = FieldState(grid=tanh_grid, values=values, r0=1.0)
            assert field.modulus.min() == 0.0
            fields.append(field)
        gap = kink_minimality_check(model, fields)
        assert gap >= -1e-6, f"κ={kappa}: a vanishing field undercuts the kink by {-gap:.2e}"
