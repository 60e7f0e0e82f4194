"""Slope P'_κ(0) of the momentum along the dark-soliton branch.

Three independent estimates:
  IntegralFormula       : closed quadrature at c = 0 (r = r0 − s² endpoint substitution)
  BranchFiniteDifference: Richardson extrapolation of (P_κ(c) − r0²π)/c
  GPClosedForm          : the Gross–Pitaevskii formula (κ ≠ 0), reported ×2 with the raw value

The sign decides the verdict: P'_κ(0) < 0 is the stability condition for
the black soliton; values inside ±tolerance stay Inconclusive.
"""
from __future__ import annotations

import logging
import math
from typing import Iterable, Sequence

import numpy as np
from scipy import optimize

from app.errors import QLSError, ValidationError
from app.models.criterion import CriterionReport, CrossValidation, SlopeMethod, SweepRow, Verdict
from app.models.nonlinearity import ModelCase, NonlinearModel
from app.services.nonlinearity import builtin_model, ellipticity, require_hypotheses
from app.services.potential import branch_root, potential_slice, reduced_potential
from app.utils.numerics import adaptive_quad

logger = logging.getLogger(__name__)

_SMALL_R = 1e-3
_SMALL_S = 1e-7
_TOL_FACTOR = 10.0
_TOL_FLOOR = 1e-12


def verdict_for(value: float, tolerance: float) -> Verdict:
    if value < -tolerance:
        return Verdict.StableSlope
    if value > tolerance:
        return Verdict.UnstableSlope
    return Verdict.Inconclusive


def _report(model, kappa, value, method, err, raw=None, note="") -> CriterionReport:
    tol = max(_TOL_FACTOR * err, _TOL_FLOOR * (1.0 + abs(value)))
    return CriterionReport(
        model=None if model is None else model.descriptor,
        kappa=kappa,
        p_prime_0=value,
        method=method,
        tolerance=tol,
        verdict=verdict_for(value, tol),
        raw_value=raw,
        note=note,
    )


# ── IntegralFormula ──────────────────────────────────────────────────────────

def _slope_integrand(model: NonlinearModel, F0: float):
    r0 = model.r0
    inv_sqrt_F0 = 1.0 / math.sqrt(F0)

    def g(r: float) -> float:
        sigma = np.array(r * r)
        F = float(model.F(sigma))
        nu = float(ellipticity(model, sigma))
        weight = (r * r - r0 * r0) ** 2
        if r < _SMALL_R:
            # (√(ν/F) − F0^{-1/2})/r² without cancellation: F0 − F(σ) ≈ σ·f(σ/2)
            hp = float(model.h_prime(sigma))
            num = float(model.f(np.array(0.5 * r * r))) + 2.0 * model.kappa * hp * hp * F0
            return weight * num / (F * F0) / (math.sqrt(nu / F) + inv_sqrt_F0)
        return weight / (r * r) * (math.sqrt(nu / F) - inv_sqrt_F0)

    def in_s(s: float) -> float:
        # r = r0 − s², dr = −2s ds
        if s < _SMALL_S:
            return 0.0
        return 2.0 * s * g(r0 - s * s)

    return in_s


def vk_slope_integral(model: NonlinearModel) -> CriterionReport:
    """P'_κ(0) = −8r0³/(3√F(0)) + ∫₀^{r0} ((r²−r0²)²/r²)(√(ν(r²)/F(r²)) − 1/√F(0)) dr."""
    require_hypotheses(model)
    F0 = float(model.F(np.array(0.0)))
    if not F0 > 0:
        raise ValidationError("F(0) must be positive for the slope formula", F0=F0)
    r0 = model.r0
    integral, err = adaptive_quad(_slope_integrand(model, F0), 0.0, math.sqrt(r0))
    value = -8.0 * r0**3 / (3.0 * math.sqrt(F0)) + integral
    logger.info("P'_κ(0) = %.12g ± %.2g for %s (integral)", value, err, model.descriptor.label)
    return _report(model, model.kappa, value, SlopeMethod.IntegralFormula, err)


# ── Branch quadratures ───────────────────────────────────────────────────────

def _branch_quad(model: NonlinearModel, c: float, weight) -> tuple[float, float]:
    """∫_{ξ(c)}^0 ω(η)·√(ν/(−𝒱_c(η))) dη with η = ξ(c) + s².

    `weight(δ, σ)` returns ω/δ for δ = −η, σ = r0² + η. With −𝒱_c = δ²W(δ)
    the integrand is 2·weight·√(ν·s²/W), free of differences that vanish at
    either end of the interval.
    """
    root = branch_root(model, c)
    s_slice = potential_slice(model, c)
    xi, vp = root.xi_c, root.vc_prime_at_root
    mu2 = root.mu_c**2
    s_max = math.sqrt(-xi)
    s_guard = 1e-5 * s_max
    turning = xi * xi / -vp  # s²/W → ξ²/(−𝒱'(ξ)) as s → 0

    def integrand(s: float) -> float:
        delta = max(-xi - s * s, 0.0)
        sigma = mu2 + s * s
        nu = float(ellipticity(model, np.array(sigma)))
        if s < s_guard:
            ratio = turning
        else:
            w = float(reduced_potential(s_slice, delta, sigma))
            if w <= 0:
                return 0.0
            ratio = s * s / w
        return 2.0 * weight(delta, sigma) * math.sqrt(nu * ratio)

    points = [p for p in (root.mu_c, 10.0 * root.mu_c) if 0.0 < p < s_max] or None
    return adaptive_quad(integrand, 0.0, s_max, points=points)


def _momentum_with_error(model: NonlinearModel, c: float) -> tuple[float, float]:
    value, err = _branch_quad(model, c, lambda delta, sigma: delta / sigma)
    return c * value, c * err


def momentum_on_branch(model: NonlinearModel, c: float) -> float:
    """P_κ(c) = c∫_{ξ(c)}^0 η²/(r0²+η)·√(ν/(−𝒱_c)) dη; the kink limit r0²π at c = 0."""
    if c == 0:
        return math.pi * model.r0**2
    return _momentum_with_error(model, c)[0]


def energy_on_branch(model: NonlinearModel, c: float) -> float:
    """E_κ(u_c) = 4∫_{ξ(c)}^0 F(r0²+η)·√(ν/(−𝒱_c)) dη."""
    value, _ = _branch_quad(
        model, c, lambda delta, sigma: delta * float(model.F_reduced(np.array(delta)))
    )
    return 4.0 * value


def vk_slope_branch_fd(model: NonlinearModel, c_step: float) -> CriterionReport:
    """Richardson extrapolation of D(h) = (P_κ(h) − r0²π)/h from h = c_step, c_step/2."""
    if not c_step > 0:
        raise ValidationError("c_step must be positive", c_step=c_step)
    p0 = math.pi * model.r0**2
    h = float(c_step)
    p_h, err_h = _momentum_with_error(model, h)
    d_h = (p_h - p0) / h
    d_half = (momentum_on_branch(model, 0.5 * h) - p0) / (0.5 * h)
    value = 2.0 * d_half - d_h
    # Extrapolation error is bounded by the raw difference of the two quotients.
    err = (err_h / (0.5 * h) + abs(d_h - d_half)) / _TOL_FACTOR
    logger.info("P'_κ(0) ≈ %.10g from branch at c_step=%.3g", value, h)
    return _report(model, model.kappa, value, SlopeMethod.BranchFiniteDifference, err)


def hamilton_residual(model: NonlinearModel, c: float, dc: float = 1e-3) -> float:
    """|dE/dc − c·dP/dc| by central differences."""
    if not 0 < dc < c:
        raise ValidationError("need 0 < dc < c", c=c, dc=dc)
    dE = (energy_on_branch(model, c + dc) - energy_on_branch(model, c - dc)) / (2.0 * dc)
    dP = (momentum_on_branch(model, c + dc) - momentum_on_branch(model, c - dc)) / (2.0 * dc)
    return abs(dE - c * dP)


def energy_taylor_ratio(model: NonlinearModel, c: float) -> float:
    """(E_κ(u_c) − E_κ(u_0))/(c²/2); tends to P'_κ(0) as c → 0."""
    return (energy_on_branch(model, c) - energy_on_branch(model, 0.0)) / (0.5 * c * c)


# ── Gross–Pitaevskii closed form ─────────────────────────────────────────────

def gp_closed_form_slope(c: float, kappa: float) -> float:
    """Closed-form slope for f = 1 − σ, h = σ, r0 = 1 (atanh branch for κ > 0, atan for κ < 0)."""
    if not kappa > -0.5:
        raise ValidationError("closed form needs κ > −1/2", kappa=kappa)
    if not 0.0 <= c < math.sqrt(2.0):
        raise ValidationError("closed form needs 0 ≤ c < √2", c=c)
    if kappa == 0:
        logger.warning("κ = 0: closed form singular, returning the limit −√2 (convention-dependent)")
        return -math.sqrt(2.0)
    k = abs(kappa)
    arg = math.sqrt(k) * math.sqrt((2.0 - c * c) / (1.0 + 2.0 * kappa))
    T = math.atanh(arg) if kappa > 0 else math.atan(arg)
    return -(3.0 * c * c * kappa - 4.0 * kappa + 1.0) / (4.0 * math.sqrt(k)) * T - (
        3.0 * (2.0 - c * c) / 4.0
    ) * math.sqrt((1.0 + 2.0 * kappa) / (2.0 - c * c))


def gp_closed_form_report(kappa: float) -> CriterionReport:
    raw = gp_closed_form_slope(0.0, kappa)
    note = "value = 2 × raw (momentum normalization of the integral formula)"
    if kappa == 0:
        note += "; κ = 0 limit, convention-dependent"
    return _report(None, kappa, 2.0 * raw, SlopeMethod.GPClosedForm, 0.0, raw=raw, note=note)


def find_kappa0(xtol: float = 1e-8) -> float:
    """Root of the GP closed-form slope at c = 0 on [1, 10]."""
    return float(optimize.brentq(lambda k: gp_closed_form_slope(0.0, k), 1.0, 10.0, xtol=xtol))


# ── Cross-validation and sweeps ──────────────────────────────────────────────

def cross_validate(reports: Sequence[CriterionReport], tolerance: float | None = None) -> CrossValidation:
    """Agreement of slope estimates within the combined (or given) tolerance."""
    if len(reports) < 2:
        raise ValidationError("cross-validation needs at least two reports")
    values = [r.p_prime_0 for r in reports]
    spread = max(values) - min(values)
    tol = sum(r.tolerance for r in reports) if tolerance is None else tolerance
    agree = spread <= tol
    if not agree:
        logger.warning("Slope methods disagree: spread %.3g > %.3g", spread, tol)
    return CrossValidation(agree=agree, spread=spread, tolerance=tol, methods=[r.method for r in reports])


def slope_report(model: NonlinearModel, method: SlopeMethod | str, c_step: float = 0.05) -> CriterionReport:
    method = SlopeMethod(method)
    if method is SlopeMethod.IntegralFormula:
        return vk_slope_integral(model)
    if method is SlopeMethod.BranchFiniteDifference:
        return vk_slope_branch_fd(model, c_step)
    if model.case is not ModelCase.GP1 or model.r0 != 1.0:
        raise ValidationError("GP closed form applies to case GP1 with r0 = 1 only", model=model.descriptor.label)
    return gp_closed_form_report(model.kappa)


def sweep_row(case: ModelCase | str, r0: float, kappa: float) -> SweepRow:
    """One κ-sweep row; failures are recorded instead of raised."""
    case = ModelCase(case)
    try:
        report = vk_slope_integral(builtin_model(case, r0, kappa))
    except QLSError as exc:
        logger.info("Sweep row %s r0=%g κ=%g failed: %s", case.value, r0, kappa, exc.message)
        return SweepRow(case=case.value, r0=r0, kappa=kappa, error=f"{exc.code}: {exc.message}")
    return SweepRow(
        case=case.value, r0=r0, kappa=kappa, p_prime_0=report.p_prime_0, verdict=report.verdict
    )


def sweep_kappa(case: ModelCase | str, r0: float, kappa_grid: Iterable[float]) -> list[SweepRow]:
    return [sweep_row(case, r0, float(k)) for k in kappa_grid]


def kappa_grid(kappa_min: float, kappa_max: float, steps: int) -> np.ndarray:
    if steps < 2 or not kappa_max > kappa_min:
        raise ValidationError("need steps ≥ 2 and kappa_max > kappa_min", steps=steps)
    return np.linspace(kappa_min, kappa_max, steps)
