"""Modulation parameters (z, φ) of a field near the kink orbit.

Minimises J(z, φ) = d₀(Ψ, u₀(· − z)e^{iφ})². The gradient (g₁, g₂) is the
analytic derivative of J in z and φ with every grid derivative taken by the
same difference operator as d₀, so an exact orbit element has J = 0 and a
vanishing discrete gradient. The Hessian is a centered difference of (g₁, g₂).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from app.config import CAPTURE_RADIUS, NEWTON_MAX_ITERS
from app.errors import CaptureError, ConvergenceError, ValidationError
from app.models.evolution import ModulationFit
from app.models.field import FieldState
from app.models.soliton import ProfileKind, SolitonProfile
from app.utils.numerics import d1

logger = logging.getLogger(__name__)

_Z_NODES = np.linspace(-5.0, 5.0, 21)
_PHI_NODES = np.linspace(0.0, 2.0 * math.pi, 16, endpoint=False)
_STEP_TOL = 1e-11
_HESS_STEP = 1e-6
_VALUE_SLACK = 1e-15  # rounding level of J


@dataclass
class _Objective:
    field: FieldState
    spline: CubicSpline
    slope: CubicSpline
    lo: float
    hi: float
    left: float
    right: float

    def __post_init__(self) -> None:
        x = self.field.grid
        self.weight = 1.0 / (1.0 + x**4)
        self.psi = self.field.values
        self.dpsi = d1(self.psi, self.field.dx)
        self.rho = np.abs(self.psi) ** 2

    def kink(self, z: float) -> tuple[np.ndarray, np.ndarray]:
        """(W, W') = (u₀(x − z), u₀'(x − z)), clamped to the background outside the profile."""
        t = self.field.grid - z
        W = self.spline(t)
        W1 = self.slope(t)
        out_lo, out_hi = t < self.lo, t > self.hi
        W[out_lo], W[out_hi] = self.left, self.right
        W1[out_lo | out_hi] = 0.0
        return W, W1

    def _sum(self, values: np.ndarray) -> float:
        return float(integrate.simpson(values, dx=self.field.dx))

    def value(self, z: float, phi: float) -> float:
        W, _ = self.kink(z)
        rot = np.exp(1j * phi)
        w = W * rot
        dw = d1(W, self.field.dx) * rot
        return self._sum(
            np.abs(self.dpsi - dw) ** 2 + (self.rho - W**2) ** 2 + self.weight * np.abs(self.psi - w) ** 2
        )

    def gradient(self, z: float, phi: float) -> np.ndarray:
        dx = self.field.dx
        W, W1 = self.kink(z)
        rot = np.exp(1j * phi)
        w, dw = W * rot, d1(W, dx) * rot
        dw1 = d1(W1, dx) * rot
        r_grad = np.conj(self.dpsi - dw)
        r_val = np.conj(self.psi - w)
        g1 = self._sum(
            2.0 * np.real(r_grad * dw1)
            + 4.0 * (self.rho - W**2) * W * W1
            + 2.0 * self.weight * np.real(r_val * W1 * rot)
        )
        g2 = self._sum(
            -2.0 * np.real(r_grad * 1j * dw) - 2.0 * self.weight * np.real(r_val * 1j * w)
        )
        return np.array([g1, g2])

    def hessian(self, z: float, phi: float) -> np.ndarray:
        h = _HESS_STEP
        cz = (self.gradient(z + h, phi) - self.gradient(z - h, phi)) / (2.0 * h)
        cp = (self.gradient(z, phi + h) - self.gradient(z, phi - h)) / (2.0 * h)
        H = np.column_stack([cz, cp])
        return 0.5 * (H + H.T)


def _objective(field: FieldState, kink: SolitonProfile) -> _Objective:
    if kink.kind is not ProfileKind.kink:
        raise ValidationError("modulation fits need the black soliton profile", kind=kink.kind.value)
    spline = CubicSpline(kink.grid, kink.signed)
    return _Objective(
        field=field,
        spline=spline,
        slope=spline.derivative(1),
        lo=float(kink.grid[0]),
        hi=float(kink.grid[-1]),
        left=float(kink.signed[0]),
        right=float(kink.signed[-1]),
    )


def _wrap(phi: float) -> float:
    return (phi + math.pi) % (2.0 * math.pi) - math.pi


def fit_modulation(
    field: FieldState,
    kink: SolitonProfile,
    capture_radius: float = CAPTURE_RADIUS,
    max_iters: int = NEWTON_MAX_ITERS,
    guess: tuple[float, float] | None = None,
) -> ModulationFit:
    """(z, φ) minimising d₀(field, u₀(· − z)e^{iφ}).

    Starts from `guess` when given (warm start along a trajectory), otherwise
    from the best node of a 21×16 scan over z ∈ [−5, 5] and φ; then damped Newton.
    """
    obj = _objective(field, kink)
    if guess is None:
        scan = np.array([[obj.value(z, p) for p in _PHI_NODES] for z in _Z_NODES])
        i, j = np.unravel_index(int(np.argmin(scan)), scan.shape)
        z, phi = float(_Z_NODES[i]), float(_PHI_NODES[j])
        J = float(scan[i, j])
    else:
        z, phi = float(guess[0]), float(guess[1])
        J = obj.value(z, phi)
    if math.sqrt(max(J, 0.0)) > capture_radius:
        raise CaptureError(
            "field too far from the kink orbit for modulation",
            d0=math.sqrt(J), capture_radius=capture_radius,
        )

    for iteration in range(1, max_iters + 1):
        g = obj.gradient(z, phi)
        H = obj.hessian(z, phi)
        try:
            step = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            step = -g
        if not np.all(np.isfinite(step)) or float(g @ step) >= 0:
            step = -g  # not a descent direction: fall back to the gradient
        scale = 1.0
        for _ in range(30):
            trial = obj.value(z + scale * step[0], phi + scale * step[1])
            if trial <= J + _VALUE_SLACK:
                break
            scale *= 0.5
        else:
            scale = 0.0
        z, phi = z + scale * step[0], phi + scale * step[1]
        J = obj.value(z, phi)
        if scale * float(np.max(np.abs(step))) < _STEP_TOL:
            d0 = math.sqrt(max(J, 0.0))
            if d0 > capture_radius:
                raise CaptureError("modulated distance exceeds the capture radius", d0=d0)
            return ModulationFit(z=z, phi=_wrap(phi), d0_value=d0, iterations=iteration)
    raise ConvergenceError("modulation Newton did not converge", iterations=max_iters, z=z, phi=phi)
