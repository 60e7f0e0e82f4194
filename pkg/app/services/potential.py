"""Effective potential 𝒱_c(ξ) = c²ξ² − 4(r0²+ξ)F(r0²+ξ) and the dark/black branch.

Phase 1: locate a bracket by a geometric sweep from ξ = −r0² toward 0
Phase 2: Brent refinement of the simple root ξ(c) with 𝒱'_c(ξ(c)) < 0
Phase 3: classify (TrivialOnly / KinkExists / GraySolitonExists)
"""
from __future__ import annotations

import logging

import numpy as np
from scipy import optimize

from app.config import NEAR_SONIC_FRACTION, ROOT_XTOL
from app.errors import HypothesisError, RootNotFound, ValidationError
from app.models.nonlinearity import NonlinearModel
from app.models.soliton import BranchRoot, ExistenceClass, PotentialCurve, PotentialSlice
from app.services.nonlinearity import (
    amplitude_cap,
    check_hypotheses,
    ellipticity,
    require_hypotheses,
    speed_of_sound,
)

logger = logging.getLogger(__name__)

# Sweep nodes ξ = −r0²·10^(−k/20), k = 0..300, approaching 0 geometrically.
_SWEEP = 10.0 ** (-np.arange(0, 301) / 20.0)


def potential_slice(model: NonlinearModel, c: float) -> PotentialSlice:
    return PotentialSlice(model=model, c=float(c), c_s=speed_of_sound(model))


# ── Evaluation ───────────────────────────────────────────────────────────────

def reduced_potential(slice: PotentialSlice, delta, sigma):
    """W(δ) = −𝒱_c(−δ)/δ² = 4σG(δ) − c² with σ = r0² − δ passed in by the caller.

    Callers that know σ more accurately than r0² − δ (the profile
    parametrisation does) pass it directly, so neither factor cancels.
    """
    delta = np.asarray(delta, dtype=float)
    return 4.0 * np.asarray(sigma, dtype=float) * slice.model.F_reduced(delta) - slice.c**2


def potential_eval(slice: PotentialSlice, xi):
    """𝒱_c(ξ); ξ < −r0² is an error (negative squared amplitude)."""
    xi_arr = np.asarray(xi, dtype=float)
    b = slice.model.r0**2
    if np.any(xi_arr < -b * (1.0 + 1e-14)):
        raise ValidationError("ξ < −r0²: amplitude squared negative", xi=float(np.min(xi_arr)))
    sigma = np.maximum(b + xi_arr, 0.0)
    value = -xi_arr**2 * reduced_potential(slice, -xi_arr, sigma)
    return float(value) if np.ndim(xi) == 0 else value


def potential_derivative(slice: PotentialSlice, xi):
    """𝒱'_c(ξ) = 2c²ξ − 4F(σ) + 4σf(σ), σ = r0² + ξ."""
    xi_arr = np.asarray(xi, dtype=float)
    sigma = slice.model.r0**2 + xi_arr
    m = slice.model
    value = 2.0 * slice.c**2 * xi_arr - 4.0 * m.F(sigma) + 4.0 * sigma * m.f(sigma)
    return float(value) if np.ndim(xi) == 0 else value


def potential_curve(model: NonlinearModel, c: float, n: int) -> PotentialCurve:
    """Samples of 𝒱_c on [−r0², ξ̃] for export."""
    if n < 2:
        raise ValidationError("xi grid needs at least 2 nodes", n=n)
    s = potential_slice(model, c)
    xi = np.linspace(-model.r0**2, amplitude_cap(model), n)
    return PotentialCurve(model=model.descriptor, c=float(c), xi=xi, values=potential_eval(s, xi))


# ── Branch root ──────────────────────────────────────────────────────────────

def _root(model: NonlinearModel, c: float) -> BranchRoot:
    b = model.r0**2
    s = potential_slice(model, c)
    if c == 0:
        return BranchRoot(
            c=0.0, xi_c=-b, vc_prime_at_root=potential_derivative(s, -b), valid=True, mu_c=0.0
        )

    nodes = -b * np.concatenate([[1.0 - 1e-12], _SWEEP[1:]])
    values = potential_eval(s, nodes)
    positive = np.nonzero(values >= 0)[0]
    if positive.size == 0:
        # ξ(c) + r0² below the first node: 𝒱_c ≈ c²r0⁴ − 4σF(0) there.
        sigma = c * c * b * b / (4.0 * float(model.F(np.array(0.0))))
        return BranchRoot(
            c=float(c),
            xi_c=sigma - b,
            vc_prime_at_root=potential_derivative(s, sigma - b),
            valid=True,
            mu_c=float(np.sqrt(sigma)),
        )
    last = int(positive[-1])
    if last == nodes.size - 1:
        raise RootNotFound(
            "no nontrivial traveling wave at this speed",
            c=c, c_s=s.c_s, model=model.descriptor.label,
        )
    xi_c = optimize.brentq(
        lambda x: potential_eval(s, x), nodes[last], nodes[last + 1], xtol=ROOT_XTOL, maxiter=200
    )
    vp = potential_derivative(s, xi_c)
    between = np.linspace(xi_c, 0.0, 66)[1:-1]
    negative = bool(np.all(potential_eval(s, between) < 0))
    return BranchRoot(
        c=float(c),
        xi_c=float(xi_c),
        vc_prime_at_root=float(vp),
        valid=bool(vp < 0 and negative),
        mu_c=float(np.sqrt(max(b + xi_c, 0.0))),
    )


def branch_root(
    model: NonlinearModel, c: float, near_sonic_fraction: float = NEAR_SONIC_FRACTION
) -> BranchRoot:
    """The root ξ(c) ∈ (−r0², 0) of 𝒱_c with 𝒱_c < 0 on (ξ(c), 0); ξ(0) = −r0²."""
    if c < 0:
        raise ValidationError("branch speeds are non-negative; use |c|", c=c)
    require_hypotheses(model)
    c_s = speed_of_sound(model)
    if c >= c_s:
        raise RootNotFound("no nontrivial traveling wave at this speed", c=c, c_s=c_s)
    if c > near_sonic_fraction * c_s:
        raise ValidationError(
            "near-sonic speed rejected: profile quadrature ill-conditioned",
            c=c, c_s=c_s, near_sonic_fraction=near_sonic_fraction,
        )
    root = _root(model, c)
    if not root.valid:
        raise RootNotFound("root is not simple or 𝒱_c changes sign on (ξ(c), 0)", c=c, xi_c=root.xi_c)
    return root


def branch_scan(model: NonlinearModel, c_grid) -> list[BranchRoot]:
    """Roots along a speed grid; delta_estimate = largest validated speed."""
    roots: list[BranchRoot] = []
    for c in c_grid:
        try:
            root = _root(model, float(c))
            nu_ok = bool(np.all(ellipticity(model, np.linspace(root.mu_c**2, model.r0**2, 64)) > 0))
            roots.append(root.model_copy(update={"valid": root.valid and nu_ok}))
        except RootNotFound as exc:
            logger.debug("Branch scan stops at c=%.4g: %s", c, exc.message)
            break
    delta = max((r.c for r in roots if r.valid), default=0.0)
    return [r.model_copy(update={"delta_estimate": delta}) for r in roots]


# ── Classification ───────────────────────────────────────────────────────────

def classify_existence(model: NonlinearModel, c: float) -> ExistenceClass:
    try:
        c_s = speed_of_sound(model)
    except HypothesisError:
        return ExistenceClass.TrivialOnly
    speed = abs(float(c))
    if speed >= c_s:
        return ExistenceClass.TrivialOnly
    if not check_hypotheses(model).passed:
        return ExistenceClass.TrivialOnly
    if speed == 0:
        return ExistenceClass.KinkExists
    try:
        root = _root(model, speed)
    except RootNotFound:
        return ExistenceClass.TrivialOnly
    sigma = np.linspace(root.mu_c**2, model.r0**2, 128)
    if root.valid and np.all(ellipticity(model, sigma) > 0):
        return ExistenceClass.GraySolitonExists
    return ExistenceClass.TrivialOnly
