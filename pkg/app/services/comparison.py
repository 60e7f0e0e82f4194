"""Comparison fields for the variational picture.

- pathology probes: fixed-momentum fields whose energy is unbounded below
  when F < 0 or ν < 0 somewhere on the amplitude range
- constrained profiles: gray-soliton tails of minimum modulus μ glued to a
  plateau of half-width R, the candidates for minimising L at fixed μ
- the plateau scan of L over R and the coercivity fit L_min − E(kink) ≳ μ²/K
"""
from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np
from scipy import optimize
from scipy.interpolate import CubicSpline

from app.config import GRID_N, MU_CAP_FRACTION, NEAR_SONIC_FRACTION
from app.errors import ResolutionError, ValidationError
from app.models.field import BoundaryKind, FieldState
from app.models.functionals import CoercivityFit, ConstrainedProfile, PathologyKind, PlateauScan
from app.models.nonlinearity import NonlinearModel
from app.services.criterion import energy_on_branch, momentum_on_branch, vk_slope_integral
from app.services.nonlinearity import ellipticity, speed_of_sound
from app.services.potential import branch_root
from app.services.profile import default_x_max, gray_profile

logger = logging.getLogger(__name__)


# ── Pathology probes ─────────────────────────────────────────────────────────

def _smoothstep(t: np.ndarray) -> np.ndarray:
    """C³ monotone ramp from 0 to 1 on [0, 1]."""
    t = np.clip(t, 0.0, 1.0)
    return t**4 * (35.0 - 84.0 * t + 70.0 * t**2 - 20.0 * t**3)


def _violation_radius(model: NonlinearModel, kind: PathologyKind) -> tuple[float, float]:
    """(r, δ): the worst violating amplitude on (0, 2r0] and a half-width keeping the violation."""
    r0 = model.r0
    s = np.linspace(r0 / 400.0, 2.0 * r0, 1600)
    if kind is PathologyKind.NegativeF:
        values = model.F(s**2)
    else:
        values = ellipticity(model, s**2)
    bad = (values < 0) & (np.abs(s - r0) > 0.05 * r0)
    if not bad.any():
        raise ValidationError(
            f"no {kind.value} violation on (0, 2r0] for this model",
            model=model.descriptor.label,
        )
    k = int(np.argmin(np.where(bad, values, np.inf)))
    # Centre of the violating interval that holds the worst sample.
    lo, hi = k, k
    while lo > 0 and bad[lo - 1]:
        lo -= 1
    while hi < s.size - 1 and bad[hi + 1]:
        hi += 1
    r = 0.5 * float(s[lo] + s[hi])
    delta = 0.5 * min(r - float(s[lo]), float(s[hi]) - r, abs(r - r0), r)
    return r, delta


def pathology_probe(
    model: NonlinearModel, kind: PathologyKind | str, p_target: float, n: int
) -> FieldState:
    """Twisted plateau v_n with P(v_n) = p_target and E_κ(v_n) → −∞.

    Modulus ramps r0 → r on (0, 1) with phase C·s(x), s the C³ ramp; the
    plateau is r on (1, n) (NegativeF) or r + δ sin(2πnx) on (1, 2)
    (NegativeEllipticity), then ramps back to r0. Since θ' vanishes off
    (0, 1), P = C(r − r0)(r + 2r0)/3 for every ramp shape.
    """
    kind = PathologyKind(kind)
    if n < 2:
        raise ValidationError("probe index n must be ≥ 2", n=n)
    r0 = model.r0
    r, delta = _violation_radius(model, kind)
    C = 3.0 * p_target / ((r - r0) * (r + 2.0 * r0))

    if kind is PathologyKind.NegativeF:
        end, dx = float(n), 5e-3
    else:
        end, dx = 2.0, min(5e-3, 1.0 / (40.0 * n))
    lo, hi = -8.0, end + 1.0 + 8.0
    count = int(round((hi - lo) / dx)) + 1
    x = np.linspace(lo, hi, count)

    up = _smoothstep(x)
    down = _smoothstep(x - end)
    rho = r0 + (r - r0) * up - (r - r0) * down
    if kind is PathologyKind.NegativeEllipticity:
        inside = (x > 1.0) & (x < 2.0)
        rho = rho + np.where(inside, delta * np.sin(2.0 * math.pi * n * x), 0.0)
    theta = C * up
    logger.info(
        "Probe %s for %s: r=%.4g δ=%.3g C=%.6g n=%d", kind.value, model.descriptor.label, r, delta, C, n
    )
    return FieldState(grid=x, values=rho * np.exp(1j * theta), r0=r0, boundary_kind=BoundaryKind.Background)


# ── Constrained profiles ─────────────────────────────────────────────────────

def speed_for_minimum(model: NonlinearModel, mu: float) -> float:
    """𝐜(μ): the speed whose gray soliton has minimum modulus μ."""
    c_s = speed_of_sound(model)
    c_hi = NEAR_SONIC_FRACTION * c_s
    c_lo = 1e-9 * c_s

    def gap(c: float) -> float:
        return branch_root(model, c).mu_c - mu

    if gap(c_hi) < 0:
        raise ValidationError("μ beyond the validated branch range", mu=mu)
    return float(optimize.brentq(gap, c_lo, c_hi, xtol=1e-14, rtol=1e-13))


def plateau_phase_slope(c: float, mu: float, r0: float) -> float:
    """C = c(μ² − r0²)/(2μ²), the hydrodynamic phase slope at |u| = μ."""
    return c * (mu * mu - r0 * r0) / (2.0 * mu * mu)


def _check_mu(model: NonlinearModel, mu: float) -> None:
    cap = MU_CAP_FRACTION * model.r0
    if not 0 < mu <= cap:
        raise ValidationError("plateau modulus must satisfy 0 < μ ≤ μ_*", mu=mu, mu_cap=cap)


def constrained_profile(
    model: NonlinearModel, mu: float, R: float, x_max: float | None = None, n: int = GRID_N
) -> ConstrainedProfile:
    """Tails u_{𝐜(μ)}(x ∓ R) glued to μ·e^{iCx} on (−R, R); modulus and phase continuous at ±R."""
    _check_mu(model, mu)
    if R < 0:
        raise ValidationError("plateau half-width must be non-negative", R=R)
    c = speed_for_minimum(model, mu)
    C = plateau_phase_slope(c, mu, model.r0)
    profile = gray_profile(model, c)
    x_max = default_x_max(model, c) + R if x_max is None else float(x_max)

    px = profile.grid
    u = profile.values
    re, im = CubicSpline(px, u.real), CubicSpline(px, u.imag)

    def tail(t: np.ndarray) -> np.ndarray:
        out = re(t) + 1j * im(t)
        out[t < px[0]] = u[0]
        out[t > px[-1]] = u[-1]
        return out

    x = np.linspace(-x_max, x_max, n)
    values = np.empty(n, dtype=complex)
    right, left = x > R, x < -R
    middle = ~(right | left)
    values[right] = tail(x[right] - R) * np.exp(1j * C * R)
    values[left] = tail(x[left] + R) * np.exp(-1j * C * R)
    values[middle] = mu * np.exp(1j * C * x[middle])
    field = FieldState(grid=x, values=values, r0=model.r0, boundary_kind=BoundaryKind.Background)
    return ConstrainedProfile(model=model.descriptor, mu=mu, R=float(R), c=c, phase_slope=C, field=field)


# ── Lyapunov along the plateau family ────────────────────────────────────────

def optimal_plateau_radius(model: NonlinearModel, mu: float, M: float, p_prime_0: float) -> float:
    """R(μ) = −μ²(P'_κ(0) + 1/M)/r0⁴."""
    return -mu * mu * (p_prime_0 + 1.0 / M) / model.r0**4


def default_lyapunov_weight(p_prime_0: float) -> float:
    """M = 2/|P'_κ(0)| for a negative slope."""
    if not p_prime_0 < 0:
        raise ValidationError("Lyapunov weight needs P'_κ(0) < 0", p_prime_0=p_prime_0)
    return 2.0 / abs(p_prime_0)


def plateau_lyapunov(model: NonlinearModel, mu: float, M: float, R) -> np.ndarray:
    """L of the constrained profile, exactly additive in the plateau:

    E = E(u_c) + 2R(μ²C² + F(μ²)),   𝒫 = P(u_c) + 2RC(μ² − r0²).
    """
    _check_mu(model, mu)
    r0 = model.r0
    c = speed_for_minimum(model, mu)
    C = plateau_phase_slope(c, mu, r0)
    R = np.asarray(R, dtype=float)
    e = energy_on_branch(model, c) + 2.0 * R * (mu * mu * C * C + float(model.F(np.array(mu * mu))))
    p = momentum_on_branch(model, c) + 2.0 * R * C * (mu * mu - r0 * r0)
    return e + 2.0 * M * r0**4 * np.sin((p - math.pi * r0**2) / (2.0 * r0**2)) ** 2


def lyapunov_plateau_scan(
    model: NonlinearModel,
    mu: float,
    R_grid: Sequence[float] | None = None,
    M: float | None = None,
) -> PlateauScan:
    """L over a grid of R, with the minimiser refined by bounded Brent search."""
    p_prime = vk_slope_integral(model).p_prime_0
    M = default_lyapunov_weight(p_prime) if M is None else float(M)
    R_pred = optimal_plateau_radius(model, mu, M, p_prime)
    if R_grid is None:
        R_grid = np.linspace(0.0, max(4.0 * R_pred, 1e-6), 201)
    R_grid = np.asarray(R_grid, dtype=float)
    if R_grid.size < 3 or np.any(R_grid < 0):
        raise ValidationError("R grid needs ≥ 3 non-negative values")

    values = plateau_lyapunov(model, mu, M, R_grid)
    k = int(np.argmin(values))
    interior = 0 < k < R_grid.size - 1
    R_star, L_min = float(R_grid[k]), float(values[k])
    if interior:
        res = optimize.minimize_scalar(
            lambda r: float(plateau_lyapunov(model, mu, M, r)),
            bounds=(float(R_grid[k - 1]), float(R_grid[k + 1])),
            method="bounded",
            options={"xatol": 1e-12},
        )
        if res.fun < L_min:
            R_star, L_min = float(res.x), float(res.fun)
    logger.info("Plateau scan μ=%.3g: R*=%.4g (predicted %.4g), L_min=%.10g", mu, R_star, R_pred, L_min)
    return PlateauScan(
        model=model.descriptor,
        mu=mu,
        M=M,
        R_grid=R_grid,
        lyapunov=values,
        R_star=R_star,
        L_min=L_min,
        R_predicted=R_pred,
        interior=interior,
    )


def fit_coercivity_constant(
    mus: Sequence[float], L_mins: Sequence[float], e_kink: float
) -> CoercivityFit:
    """Smallest K with L_min(μ) − E(kink) ≥ μ²/K over the sampled μ."""
    mus = [float(m) for m in mus]
    excess = [float(L) - e_kink for L in L_mins]
    if len(mus) != len(excess) or not mus:
        raise ValidationError("μ and L_min samples differ in length")
    if min(excess) <= 0:
        raise ResolutionError("L_min does not exceed E(kink): coercivity not observed", excess=excess)
    ratios = [m * m / e for m, e in zip(mus, excess)]
    return CoercivityFit(K=max(ratios), mus=mus, excess=excess, ratios=ratios)


def minimizing_speed(momentum: float, M: float, r0: float) -> float:
    """c = 2Mr0²·cos(π/2 − 𝒫/(2r0²))·sin(π/2 − 𝒫/(2r0²))."""
    angle = 0.5 * math.pi - momentum / (2.0 * r0 * r0)
    return 2.0 * M * r0 * r0 * math.cos(angle) * math.sin(angle)
