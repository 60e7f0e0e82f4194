"""Nonlinearity instances (f, h, r0, κ) and their hypothesis checks.

Builtin cases carry analytic f', h', h'' and F; custom models are compiled
from expression strings and fall back to centered differences for the
derivatives and to adaptive quadrature for F(σ) = ∫_σ^{r0²} f.
"""
from __future__ import annotations

import logging
import math

import numpy as np
from scipy import optimize

from app.config import HYPOTHESIS_GRID_N
from app.errors import HypothesisError, ValidationError
from app.models.nonlinearity import (
    EnergyConstants,
    HypothesisReport,
    Margin,
    ModelCase,
    ModelDescriptor,
    NonlinearModel,
)
from app.utils.expression import compile_expression
from app.utils.numerics import adaptive_quad, central_diff, chebyshev_points

logger = logging.getLogger(__name__)

_F_ZERO_TOL = 1e-10
_REDUCED_SWITCH = 1e-5  # |δ|/(1 + r0²) below which custom G(δ) uses its Taylor form


# ── Builtin cases ────────────────────────────────────────────────────────────

def _quadratic_f(r0: float) -> dict:
    a = r0 * r0
    return dict(
        f=lambda s: a - np.asarray(s, dtype=float),
        f_prime=lambda s: -np.ones_like(np.asarray(s, dtype=float)),
        F=lambda s: 0.5 * (a - np.asarray(s, dtype=float)) ** 2,
        F_reduced=lambda d: np.full_like(np.asarray(d, dtype=float), 0.5),
    )


def _linear_h() -> dict:
    return dict(
        h=lambda s: np.asarray(s, dtype=float) * 1.0,
        h_prime=lambda s: np.ones_like(np.asarray(s, dtype=float)),
        h_dprime=lambda s: np.zeros_like(np.asarray(s, dtype=float)),
    )


def _sqrt_h() -> dict:
    return dict(
        h=lambda s: np.sqrt(1.0 + np.asarray(s, dtype=float)),
        h_prime=lambda s: 0.5 / np.sqrt(1.0 + np.asarray(s, dtype=float)),
        h_dprime=lambda s: -0.25 * (1.0 + np.asarray(s, dtype=float)) ** -1.5,
    )


def _saturated_f(r0: float) -> dict:
    # Factored forms in δ = r0² − σ, t = 1 + σ stay accurate as σ → r0².
    a = 1.0 + r0 * r0
    b = r0 * r0

    def f(s):
        s = np.asarray(s, dtype=float)
        t = 1.0 + s
        return (b - s) * (a * a + a * t + t * t) / t**3

    def F(s):
        s = np.asarray(s, dtype=float)
        t = 1.0 + s
        return (b - s) ** 2 * (a + 2.0 * t) / (2.0 * t * t)

    def F_reduced(d):
        # t = a − δ
        d = np.asarray(d, dtype=float)
        return (3.0 * a - 2.0 * d) / (2.0 * (a - d) ** 2)

    return dict(
        f=f,
        f_prime=lambda s: -3.0 * a**3 / (1.0 + np.asarray(s, dtype=float)) ** 4,
        F=F,
        F_reduced=F_reduced,
    )


def builtin_model(case_id: ModelCase | str, r0: float, kappa: float) -> NonlinearModel:
    """GP1: f = r0²−σ, h = σ; GP2: f = r0²−σ, h = √(1+σ); SF3: f = ((1+r0²)/(1+σ))³−1, h = σ."""
    try:
        case = ModelCase(case_id)
    except ValueError:
        raise ValidationError(f"unknown case id {case_id!r}", case=str(case_id))
    if case is ModelCase.custom:
        raise ValidationError("custom models need expressions; use model_from_descriptor")
    if not r0 > 0:
        raise ValidationError("r0 must be positive", r0=r0)

    parts: dict = {}
    if case is ModelCase.GP1:
        parts.update(_quadratic_f(r0), **_linear_h())
    elif case is ModelCase.GP2:
        parts.update(_quadratic_f(r0), **_sqrt_h())
    else:
        parts.update(_saturated_f(r0), **_linear_h())

    descriptor = ModelDescriptor(case=case, r0=float(r0), kappa=float(kappa))
    model = NonlinearModel(descriptor=descriptor, **parts)
    _check_boundary_zero(model)
    return model


def _custom_model(descriptor: ModelDescriptor) -> NonlinearModel:
    if not descriptor.f or not descriptor.h:
        raise ValidationError("custom model needs both 'f' and 'h' expressions")
    r0 = descriptor.r0
    f = compile_expression(descriptor.f, r0)
    h = compile_expression(descriptor.h, r0)
    b = r0 * r0

    if descriptor.F:
        F = compile_expression(descriptor.F, r0)
    else:
        def F(s):
            s = np.asarray(s, dtype=float)
            flat = [
                adaptive_quad(lambda w: float(f(np.array(w))), float(v), b)[0]
                for v in s.ravel()
            ]
            return np.asarray(flat, dtype=float).reshape(s.shape)

    f_prime_b = float(central_diff(f, np.array(b)))
    f_dprime_b = float(central_diff(f, np.array(b), order=2))
    small = _REDUCED_SWITCH * (1.0 + b)

    def F_reduced(d):
        # Taylor F(r0² − δ) = −f'(r0²)δ²/2 + f''(r0²)δ³/6 near δ = 0
        d = np.asarray(d, dtype=float)
        near = np.abs(d) < small
        safe = np.where(near, small, d)
        quotient = F(b - safe) / safe**2
        return np.where(near, -0.5 * f_prime_b + f_dprime_b * d / 6.0, quotient)

    return NonlinearModel(
        descriptor=descriptor,
        f=f,
        f_prime=lambda s: central_diff(f, s),
        h=h,
        h_prime=lambda s: central_diff(h, s),
        h_dprime=lambda s: central_diff(h, s, order=2),
        F=F,
        F_reduced=F_reduced,
        analytic_derivatives=False,
    )


def _check_boundary_zero(model: NonlinearModel) -> None:
    value = float(model.f(np.array(model.r0**2)))
    if abs(value) > _F_ZERO_TOL:
        raise ValidationError(
            "f(r0²) must vanish for the nonzero boundary condition",
            f_at_r0=value,
            model=model.descriptor.label,
        )


def model_from_descriptor(descriptor: ModelDescriptor | dict) -> NonlinearModel:
    if isinstance(descriptor, dict):
        try:
            descriptor = ModelDescriptor(**descriptor)
        except Exception as exc:  # pydantic raises its own ValidationError
            raise ValidationError(f"invalid model descriptor: {exc}")
    if not descriptor.r0 > 0:
        raise ValidationError("r0 must be positive", r0=descriptor.r0)
    if descriptor.case is ModelCase.custom:
        model = _custom_model(descriptor)
        _check_boundary_zero(model)
        return model
    return builtin_model(descriptor.case, descriptor.r0, descriptor.kappa)


# ── Derived quantities ───────────────────────────────────────────────────────

def ellipticity(model: NonlinearModel, sigma) -> np.ndarray:
    """ν(σ) = 1 + 2κσh'(σ)²."""
    sigma = np.asarray(sigma, dtype=float)
    return 1.0 + 2.0 * model.kappa * sigma * model.h_prime(sigma) ** 2


def speed_of_sound(model: NonlinearModel, strict: bool = True) -> float:
    """c_s = √(−2 f'(r0²)).

    f'(r0²) > 0 always raises. A degenerate f'(r0²) = 0 raises when strict,
    otherwise returns 0.
    """
    fp = float(model.f_prime(np.array(model.r0**2)))
    if fp > 0:
        raise HypothesisError(
            "f'(r0²) > 0: imaginary sound speed, defocusing assumption violated",
            f_prime=fp,
        )
    if fp == 0 or abs(fp) < 1e-14:
        if strict:
            raise HypothesisError("f'(r0²) = 0: degenerate sound speed", f_prime=fp)
        logger.warning("Degenerate sound speed for %s", model.descriptor.label)
        return 0.0
    return math.sqrt(-2.0 * fp)


def kappa_tilde(model: NonlinearModel) -> float:
    """sup over σ ∈ (0, r0²] of −1/(2σh'(σ)²); −inf when h' vanishes anywhere on the grid."""
    if kappa_tilde_vacuous(model):
        logger.warning("h' vanishes on (0, r0²] for %s: κ̃ constraint vacuous", model.descriptor.label)
        return -math.inf
    b = model.r0**2
    sigma = np.concatenate([np.geomspace(1e-8 * b, b, 1024), np.linspace(b / 2048, b, 2048)])
    sigma = np.unique(sigma)
    hp2 = model.h_prime(sigma) ** 2
    usable = hp2 > 1e-300

    def g(s: float) -> float:
        d = float(model.h_prime(np.array(s))) ** 2
        return -math.inf if d <= 1e-300 else -1.0 / (2.0 * s * d)

    values = np.where(usable, -1.0 / (2.0 * sigma * np.where(usable, hp2, 1.0)), -np.inf)
    k = int(np.argmax(values))
    best = float(values[k])
    if 0 < k < sigma.size - 1:
        res = optimize.minimize_scalar(
            lambda s: -g(s),
            bounds=(float(sigma[k - 1]), float(sigma[k + 1])),
            method="bounded",
            options={"xatol": 1e-14 * b},
        )
        best = max(best, -float(res.fun))
    return max(best, g(b))


def kappa_tilde_vacuous(model: NonlinearModel, n: int = 2048) -> bool:
    sigma = np.linspace(model.r0**2 / n, model.r0**2, n)
    return bool(np.any(np.abs(model.h_prime(sigma)) < 1e-150))


# ── Hypotheses (H2)–(H3) ─────────────────────────────────────────────────────

def _cap_ok(model: NonlinearModel, xi: float, samples: int = 256) -> bool:
    b = model.r0**2
    sigma = b + xi * np.linspace(1.0 / samples, 1.0, samples)
    return bool(np.all(model.F(sigma) > 0) and np.all(ellipticity(model, sigma) > 0))


def amplitude_cap(model: NonlinearModel) -> float:
    """ξ̃ = min(largest cap with F > 0 and ν > 0 on (r0², r0²+ξ̃], r0²)."""
    b = model.r0**2
    if _cap_ok(model, b):
        return b
    lo, hi = 0.0, b
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _cap_ok(model, mid):
            lo = mid
        else:
            hi = mid
    return max(lo, 1e-12 * b)


def check_hypotheses(model: NonlinearModel, grid_n: int = HYPOTHESIS_GRID_N) -> HypothesisReport:
    """Evaluate (H2)–(H3) margins on Chebyshev samples; failures are reported."""
    if grid_n < 64:
        raise ValidationError("grid_n must be at least 64", grid_n=grid_n)
    b = model.r0**2
    sigma = chebyshev_points(0.0, b, grid_n)

    nu = ellipticity(model, sigma)
    k = int(np.argmin(nu))
    h2 = Margin(ok=bool(nu[k] > 0), worst_sigma=float(sigma[k]), margin=float(nu[k]))

    inner = sigma[:-1]
    F = model.F(inner)
    k = int(np.argmin(F))
    h3 = Margin(ok=bool(F[k] > 0), worst_sigma=float(inner[k]), margin=float(F[k]))

    step = 1e-4 * (1.0 + b)
    F2 = float(
        (model.F(np.array(b + step)) - 2.0 * model.F(np.array(b)) + model.F(np.array(b - step)))
        / step**2
    )
    convex = Margin(ok=F2 > 0, worst_sigma=b, margin=F2)

    report = HypothesisReport(
        model=model.descriptor,
        h2_ellipticity=h2,
        h3_potential=h3,
        h3_convexity=convex,
        kappa_tilde=kappa_tilde(model),
        kappa_tilde_vacuous=kappa_tilde_vacuous(model),
        xi_tilde=amplitude_cap(model),
        grid_n=grid_n,
    )
    if not report.passed:
        logger.info(
            "Hypotheses fail for %s: H2 margin %.3g at σ=%.3g, H3 margin %.3g",
            model.descriptor.label, h2.margin, h2.worst_sigma, h3.margin,
        )
    return report


def require_hypotheses(model: NonlinearModel) -> HypothesisReport:
    report = check_hypotheses(model)
    if not report.passed:
        raise HypothesisError(
            f"hypotheses H2–H3 fail for {model.descriptor.label}",
            h2_margin=report.h2_ellipticity.margin,
            h3_margin=report.h3_potential.margin,
            kappa_tilde=report.kappa_tilde,
        )
    return report


def pointwise_energy_constants(model: NonlinearModel, xi_tilde: float | None = None) -> EnergyConstants:
    """Constants C_F = inf F/(σ−r0²)², C_ν = inf ν on [0, r0²+ξ̃]; K = 1/min(C_F, C_ν, 1)."""
    b = model.r0**2
    cap = amplitude_cap(model) if xi_tilde is None else xi_tilde
    below = chebyshev_points(0.0, b, 400)[:-1]
    above = b + cap * np.linspace(1e-3, 1.0, 200)
    sigma = np.concatenate([below, above])
    ratio = model.F_reduced(b - sigma)
    c_potential = float(min(ratio.min(), 0.5 * -float(model.f_prime(np.array(b)))))
    c_ellipticity = float(ellipticity(model, np.concatenate([sigma, [b]])).min())
    floor = min(c_potential, c_ellipticity, 1.0)
    if floor <= 0:
        raise HypothesisError(
            "pointwise energy bound needs F > 0 and ν > 0 on the amplitude range",
            c_potential=c_potential,
            c_ellipticity=c_ellipticity,
        )
    return EnergyConstants(c_potential=c_potential, c_ellipticity=c_ellipticity, K=1.0 / floor)
