"""Grid calculus and quadrature shared by every service.

- fourth-order central differences with background (edge) or periodic padding
- composite Simpson integration on uniform grids
- adaptive Gauss–Kronrod (scipy QUADPACK) behind a tenacity retry ladder
  that escalates the subdivision limit on non-convergence
"""
from __future__ import annotations

import logging
import warnings
from typing import Callable, Sequence

import numpy as np
from scipy import integrate
from tenacity import (
    Retrying,
    before_sleep_log,
    retry_if_exception_type,
    stop_after_attempt,
)

from app.config import QUAD_EPSABS, QUAD_EPSREL, QUAD_LIMIT
from app.errors import QuadratureError

logger = logging.getLogger(__name__)

# Accept a QUADPACK warning when the reported error is still below this.
_ACCEPTABLE_REL_ERR = 1e-9

_RETRY = dict(
    stop=stop_after_attempt(3),
    retry=retry_if_exception_type(QuadratureError),
    before_sleep=before_sleep_log(logger, logging.WARNING),
    reraise=True,
)


# ── Finite differences ───────────────────────────────────────────────────────

def _pad(values: np.ndarray, width: int, periodic: bool) -> np.ndarray:
    return np.pad(values, width, mode="wrap" if periodic else "edge")


def d1(values: np.ndarray, dx: float, periodic: bool = False) -> np.ndarray:
    """Fourth-order centered first derivative."""
    p = _pad(values, 2, periodic)
    return (p[:-4] - 8.0 * p[1:-3] + 8.0 * p[3:-1] - p[4:]) / (12.0 * dx)


def d2(values: np.ndarray, dx: float, periodic: bool = False) -> np.ndarray:
    """Fourth-order centered second derivative."""
    p = _pad(values, 2, periodic)
    return (-p[:-4] + 16.0 * p[1:-3] - 30.0 * p[2:-2] + 16.0 * p[3:-1] - p[4:]) / (
        12.0 * dx * dx
    )


def central_diff(fn: Callable[[np.ndarray], np.ndarray], x, order: int = 1):
    """Centered difference of a scalar function, step 1e-6·(1+|x|) (1e-4 for order 2)."""
    x = np.asarray(x, dtype=float)
    if order == 1:
        h = 1e-6 * (1.0 + np.abs(x))
        return (fn(x + h) - fn(x - h)) / (2.0 * h)
    h = 1e-4 * (1.0 + np.abs(x))
    return (fn(x + h) - 2.0 * fn(x) + fn(x - h)) / (h * h)


# ── Grid quadrature ──────────────────────────────────────────────────────────

def simpson(values: np.ndarray, dx: float) -> float:
    return float(integrate.simpson(values, dx=dx))


def cumulative_simpson(values: np.ndarray, dx: float) -> np.ndarray:
    """Running integral starting at 0 on the first node."""
    return integrate.cumulative_simpson(values, dx=dx, initial=0.0)


def uniform_grid(x_max: float, n: int) -> np.ndarray:
    return np.linspace(-x_max, x_max, n)


def center_index(grid: np.ndarray) -> int:
    """Index of the grid node nearest to x = 0."""
    return int(np.argmin(np.abs(grid)))


def chebyshev_points(a: float, b: float, n: int) -> np.ndarray:
    """Chebyshev–Lobatto points on [a, b], increasing."""
    k = np.arange(n)
    return 0.5 * (a + b) - 0.5 * (b - a) * np.cos(np.pi * k / (n - 1))


# ── Adaptive quadrature ──────────────────────────────────────────────────────

def _quad_once(
    func: Callable[[float], float],
    a: float,
    b: float,
    epsabs: float,
    epsrel: float,
    limit: int,
    points: Sequence[float] | None,
) -> tuple[float, float]:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        value, abserr = integrate.quad(
            func, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, points=points
        )
    if not np.isfinite(value):
        raise QuadratureError("quadrature produced a non-finite value", a=a, b=b)
    if caught and abserr > _ACCEPTABLE_REL_ERR * max(1.0, abs(value)):
        raise QuadratureError(
            str(caught[0].message).splitlines()[0], a=a, b=b, abserr=abserr, limit=limit
        )
    return float(value), float(abserr)


def adaptive_quad(
    func: Callable[[float], float],
    a: float,
    b: float,
    *,
    epsabs: float = QUAD_EPSABS,
    epsrel: float = QUAD_EPSREL,
    limit: int = QUAD_LIMIT,
    points: Sequence[float] | None = None,
) -> tuple[float, float]:
    """Integrate func on [a, b]; returns (value, error estimate).

    Each retry quadruples the subdivision limit. The final failure re-raises
    QuadratureError.
    """
    if a == b:
        return 0.0, 0.0
    for attempt in Retrying(**_RETRY):
        with attempt:
            scale = 4 ** (attempt.retry_state.attempt_number - 1)
            return _quad_once(func, a, b, epsabs, epsrel, limit * scale, points)
    raise QuadratureError("unreachable", a=a, b=b)  # pragma: no cover
