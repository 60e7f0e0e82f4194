"""Black and gray soliton profiles by quadrature.

Both profiles are parametrised by y ≥ 0 through
    η(y) = ξ(c)·sech²(y),   |u|² = μ_c² + |ξ(c)|·tanh²(y),
which removes the turning-point singularity at y = 0 and makes the tail
linear in y (exactly linear for the Gross–Pitaevskii case).

Phase 1: x(y) = ∫₀^y √(ν/(−𝒱_c(η)))·|dη/dy| on y-nodes (adaptive Gauss–Kronrod)
Phase 2: monotone (Fritsch–Carlson) inversion onto the uniform x-grid
Phase 3: Newton polish of y(x) with panel Gauss–Legendre sums
Phase 4: phase θ(x) = ∫₀^x cη/(2(r0²+η)) and odd/even extension
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from app.config import GRID_N, PROFILE_NODES
from app.errors import ResolutionError, ValidationError
from app.models.field import BoundaryKind, FieldState
from app.models.nonlinearity import NonlinearModel
from app.models.soliton import DecayFit, ExistenceClass, PotentialSlice, ProfileKind, SolitonProfile
from app.services import storage
from app.services.nonlinearity import ellipticity, require_hypotheses, speed_of_sound
from app.services.potential import (
    branch_root,
    classify_existence,
    potential_derivative,
    potential_eval,
    potential_slice,
    reduced_potential,
)
from app.utils.numerics import adaptive_quad, d1, d2, uniform_grid

logger = logging.getLogger(__name__)

_SMALL_Y = 1e-4  # below this the turning-point linearisation of 𝒱 is used
_ETA_FLOOR = 1e-11  # |η| at the last quadrature node
_NEWTON_STEPS = 5
_GL_T, _GL_W = np.polynomial.legendre.leggauss(10)


# ── Branch context ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class _Branch:
    model: NonlinearModel
    c: float
    xi: float
    mu2: float
    vp: float  # 𝒱'_c(ξ(c)) < 0
    slice: PotentialSlice
    rate: float  # expected decay of |η|

    def jacobian(self, y: np.ndarray) -> np.ndarray:
        """dx/dy."""
        y = np.asarray(y, dtype=float)
        abs_xi = -self.xi
        th = np.tanh(y)
        sech2 = 1.0 / np.cosh(y) ** 2
        sigma = self.mu2 + abs_xi * th**2
        nu = ellipticity(self.model, sigma)
        # −𝒱_c(η) = δ²W(δ) with δ = |ξ|sech²y, so |dη/dy|/√(−𝒱_c) = 2·tanh(y)/√W
        with np.errstate(all="ignore"):
            w = reduced_potential(self.slice, abs_xi * sech2, sigma)
            general = 2.0 * th * np.sqrt(nu / w)
        small = 2.0 * abs_xi * sech2 * np.sqrt(nu / (-self.vp * abs_xi))
        return np.where(y < _SMALL_Y, small, general)

    def phase_density(self, y: np.ndarray) -> np.ndarray:
        """dθ/dy = cη/(2|u|²)·dx/dy."""
        if self.c == 0:
            return np.zeros_like(np.asarray(y, dtype=float))
        y = np.asarray(y, dtype=float)
        eta = self.xi / np.cosh(y) ** 2
        sigma = self.mu2 - self.xi * np.tanh(y) ** 2
        return self.c * eta / (2.0 * sigma) * self.jacobian(y)

    def sigma(self, y: np.ndarray) -> np.ndarray:
        return self.mu2 - self.xi * np.tanh(y) ** 2

    def eta(self, y: np.ndarray) -> np.ndarray:
        return self.xi / np.cosh(y) ** 2


def expected_decay_rate(model: NonlinearModel, c: float) -> float:
    """√((c_s² − c²)/ν(r0²))."""
    c_s = speed_of_sound(model)
    nu = float(ellipticity(model, np.array(model.r0**2)))
    return math.sqrt(max(c_s**2 - c**2, 0.0) / nu)


def default_x_max(model: NonlinearModel, c: float) -> float:
    return max(20.0, 30.0 / expected_decay_rate(model, c))


# ── Quadrature + inversion ───────────────────────────────────────────────────

def _panel(fn, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Vectorised Gauss–Legendre ∫_lo^hi fn for arrays of short panels."""
    half = 0.5 * (hi - lo)[:, None]
    mid = 0.5 * (hi + lo)[:, None]
    pts = mid + half * _GL_T[None, :]
    return np.sum(fn(pts) * _GL_W[None, :] * half, axis=1)


def _node_table(branch: _Branch, n_nodes: int):
    abs_xi = -branch.xi
    y_max = math.acosh(math.sqrt(max(abs_xi / _ETA_FLOOR, 1.0 + 1e-12)))
    y_nodes = np.linspace(0.0, y_max, n_nodes)
    x_inc = np.empty(n_nodes - 1)
    th_inc = np.empty(n_nodes - 1)
    for k in range(n_nodes - 1):
        a, b = float(y_nodes[k]), float(y_nodes[k + 1])
        x_inc[k] = adaptive_quad(lambda y: float(branch.jacobian(np.array(y))), a, b)[0]
        if branch.c != 0:
            th_inc[k] = adaptive_quad(lambda y: float(branch.phase_density(np.array(y))), a, b)[0]
        else:
            th_inc[k] = 0.0
    x_nodes = np.concatenate([[0.0], np.cumsum(x_inc)])
    th_nodes = np.concatenate([[0.0], np.cumsum(th_inc)])
    if np.any(np.diff(x_nodes) <= 0):
        raise ResolutionError("x(y) is not strictly increasing", c=branch.c)
    return y_nodes, x_nodes, th_nodes


def _invert(branch: _Branch, y_nodes, x_nodes, th_nodes, x: np.ndarray):
    """y(x) and θ(x) for x ≥ 0."""
    y = np.empty_like(x)
    theta = np.empty_like(x)
    inside = x <= x_nodes[-1]

    # Monotone inversion as the initial guess, then Newton on X(y) = x.
    xi_in = x[inside]
    guess = PchipInterpolator(x_nodes, y_nodes)(xi_in)
    for _ in range(_NEWTON_STEPS):
        k = np.clip(np.searchsorted(y_nodes, guess, side="right") - 1, 0, y_nodes.size - 2)
        X = x_nodes[k] + _panel(branch.jacobian, y_nodes[k], guess)
        J = branch.jacobian(guess)
        guess = np.clip(guess - (X - xi_in) / J, 0.0, y_nodes[-1])
    k = np.clip(np.searchsorted(y_nodes, guess, side="right") - 1, 0, y_nodes.size - 2)
    y[inside] = guess
    theta[inside] = th_nodes[k] + _panel(branch.phase_density, y_nodes[k], guess)

    # Exponential tail beyond the last node: y linear with slope rate/2.
    tail = ~inside
    if np.any(tail):
        dx_tail = x[tail] - x_nodes[-1]
        y[tail] = y_nodes[-1] + 0.5 * branch.rate * dx_tail
        eta_last = float(branch.eta(np.array(y_nodes[-1])))
        theta[tail] = th_nodes[-1] + branch.c * eta_last / (
            2.0 * branch.model.r0**2 * branch.rate
        ) * (1.0 - np.exp(-branch.rate * dx_tail))
    return y, theta


def _build(model: NonlinearModel, c: float, x_max: float, n: int) -> SolitonProfile:
    if c == 0:
        require_hypotheses(model)
        root_xi, mu2 = -model.r0**2, 0.0
        vp = potential_derivative(potential_slice(model, 0.0), root_xi)
    else:
        root = branch_root(model, c)
        root_xi, mu2, vp = root.xi_c, root.mu_c**2, root.vc_prime_at_root
    rate = expected_decay_rate(model, c)
    branch = _Branch(
        model=model, c=float(c), xi=float(root_xi), mu2=float(mu2), vp=float(vp),
        slice=potential_slice(model, c), rate=rate,
    )

    y_nodes, x_nodes, th_nodes = _node_table(branch, PROFILE_NODES)
    grid = uniform_grid(x_max, n)
    y, theta = _invert(branch, y_nodes, x_nodes, th_nodes, np.abs(grid))
    sign = np.sign(grid)

    sigma = branch.sigma(y)
    amplitude = np.sqrt(sigma)
    eta = branch.eta(y)
    if c == 0:
        kind = ProfileKind.kink
        signed = sign * amplitude
        phase = np.zeros_like(grid)
    else:
        kind = ProfileKind.gray
        signed = amplitude
        phase = sign * theta

    logger.info(
        "Built %s profile for %s at c=%.4g (x_max=%.3g, n=%d, μ_c=%.6g)",
        kind.value, model.descriptor.label, c, x_max, n, math.sqrt(mu2),
    )
    return SolitonProfile(
        model=model.descriptor,
        kind=kind,
        c=float(c),
        grid=grid,
        amplitude=amplitude,
        phase=phase,
        eta=eta,
        signed=signed,
        mu_c=math.sqrt(mu2),
        decay_rate=rate,
        x_max=float(x_max),
    )


# ── Public operations ────────────────────────────────────────────────────────

def _validate_grid(x_max: float | None, n: int, model: NonlinearModel, c: float) -> float:
    if n < 128:
        raise ValidationError("profile grids need at least 128 nodes", n=n)
    x_max = default_x_max(model, c) if x_max is None else float(x_max)
    if x_max <= 0:
        raise ValidationError("x_max must be positive", x_max=x_max)
    return x_max


def kink_profile(model: NonlinearModel, x_max: float | None = None, n: int = GRID_N) -> SolitonProfile:
    """Odd real black soliton u_{0,κ} from the implicit kink formula."""
    x_max = _validate_grid(x_max, n, model, 0.0)
    key = ("kink", model.descriptor, x_max, n)
    return storage.get_or_build(key, lambda: _build(model, 0.0, x_max, n))


def gray_profile(
    model: NonlinearModel, c: float, x_max: float | None = None, n: int = GRID_N
) -> SolitonProfile:
    """Gray soliton u_{c,κ}, 0 < c < c_s, with θ(0) = 0 and even modulus."""
    if not c > 0:
        raise ValidationError("gray profiles need c > 0", c=c)
    existence = classify_existence(model, c)
    if existence is not ExistenceClass.GraySolitonExists:
        branch_root(model, c)  # raises the specific failure
        raise ValidationError("no gray soliton at this speed", c=c, existence=existence.value)
    x_max = _validate_grid(x_max, n, model, c)
    key = ("gray", model.descriptor, float(c), x_max, n)
    return storage.get_or_build(key, lambda: _build(model, float(c), x_max, n))


def soliton_profile(model: NonlinearModel, c: float, x_max: float | None = None, n: int = GRID_N) -> SolitonProfile:
    if c == 0:
        return kink_profile(model, x_max, n)
    return gray_profile(model, c, x_max, n)


def decay_rate_fit(profile: SolitonProfile) -> DecayFit:
    """Slope of −log|η| over x ∈ [0.3·x_max, 0.8·x_max]."""
    x = profile.grid
    window = (x >= 0.3 * profile.x_max) & (x <= 0.8 * profile.x_max)
    eta = np.abs(profile.eta[window])
    if eta.size < 2 or eta.min() < 1e-14:
        raise ResolutionError(
            "decay window reaches |η| < 1e-14; fitted rate unreliable",
            min_eta=float(eta.min()) if eta.size else None,
        )
    slope = np.polyfit(x[window], -np.log(eta), 1)[0]
    return DecayFit(rate=float(slope), expected=profile.decay_rate)


def sample_field(profile: SolitonProfile, phase_offset: float = 0.0, shift: float = 0.0) -> FieldState:
    """u(x − shift)·e^{i·phase_offset} resampled by cubic interpolation on the profile grid."""
    x = profile.grid
    if abs(shift) > profile.x_max:
        raise ValidationError("shift outside the grid range", shift=shift, x_max=profile.x_max)
    u = profile.values
    if shift == 0:
        shifted = u.copy()
    else:
        target = x - shift
        re = CubicSpline(x, u.real)(target)
        im = CubicSpline(x, u.imag)(target)
        shifted = re + 1j * im
        shifted[target < x[0]] = u[0]
        shifted[target > x[-1]] = u[-1]
    return FieldState(
        grid=x,
        values=shifted * np.exp(1j * phase_offset),
        r0=profile.model.r0,
        boundary_kind=BoundaryKind.Background,
    )


def kink_energy_closed_form(model: NonlinearModel) -> float:
    """4∫₀^{r0} √(F(r²)·ν(r²)) dr."""
    def integrand(r: float) -> float:
        s = np.array(r * r)
        return float(np.sqrt(max(float(model.F(s)), 0.0) * float(ellipticity(model, s))))

    return 4.0 * adaptive_quad(integrand, 0.0, model.r0)[0]


# ── Residual diagnostics ─────────────────────────────────────────────────────

def _interior(profile: SolitonProfile) -> np.ndarray:
    x = profile.grid
    return np.abs(x) <= 0.9 * profile.x_max


def first_integral_residual(profile: SolitonProfile, model: NonlinearModel) -> float:
    """sup |ν(|u|²)η'² + 𝒱_c(η)| over interior nodes."""
    s = potential_slice(model, profile.c)
    eta_p = d1(profile.eta, profile.dx)
    sigma = model.r0**2 + profile.eta
    res = ellipticity(model, sigma) * eta_p**2 + potential_eval(s, profile.eta)
    return float(np.max(np.abs(res[_interior(profile)])))


def second_order_residual(profile: SolitonProfile, model: NonlinearModel) -> float:
    """sup |2νη'' + 2κη'²(h'² + 2σh'h'') + 𝒱'_c(η)|, σ = r0² + η."""
    s = potential_slice(model, profile.c)
    eta_p = d1(profile.eta, profile.dx)
    eta_pp = d2(profile.eta, profile.dx)
    sigma = model.r0**2 + profile.eta
    hp, hpp = model.h_prime(sigma), model.h_dprime(sigma)
    res = (
        2.0 * ellipticity(model, sigma) * eta_pp
        + 2.0 * model.kappa * eta_p**2 * (hp**2 + 2.0 * sigma * hp * hpp)
        + potential_derivative(s, profile.eta)
    )
    return float(np.max(np.abs(res[_interior(profile)])))


def traveling_wave_residual(field: FieldState, model: NonlinearModel, c: float) -> float:
    """sup |icu' − u'' − uf − κuh'(h)''| / sup |u''| over interior nodes."""
    u, dx = field.values, field.dx
    rho = np.abs(u) ** 2
    u_pp = d2(u, dx)
    res = 1j * c * d1(u, dx) - (
        u_pp + u * model.f(rho) + model.kappa * u * model.h_prime(rho) * d2(model.h(rho), dx)
    )
    inner = np.abs(field.grid) <= 0.9 * np.abs(field.grid).max()
    return float(np.max(np.abs(res[inner])) / max(np.max(np.abs(u_pp[inner])), 1e-300))


def madelung_variables(field: FieldState) -> tuple[np.ndarray, np.ndarray]:
    """(η, ∂ₓθ) = (|v|² − r0², Im(v̄ ∂ₓv)/|v|²) for nonvanishing fields."""
    rho = np.abs(field.values) ** 2
    if rho.min() < 1e-28:
        raise ResolutionError("field vanishes: hydrodynamic variables undefined", min_modulus=float(np.sqrt(rho.min())))
    dv = d1(field.values, field.dx, field.periodic)
    return rho - field.r0**2, np.imag(np.conj(field.values) * dv) / rho
