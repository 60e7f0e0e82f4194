"""Closed-form Gross–Pitaevskii solitons (f = 1 − σ, κ = 0, r0 = 1).

Used as oracles by the test-suite. The speed of sound is √2; gray solitons
are normalised with θ(0) = 0 like the computed profiles.
"""
from __future__ import annotations

import math

import numpy as np

SPEED_OF_SOUND = math.sqrt(2.0)
KINK_ENERGY = 4.0 * math.sqrt(2.0) / 3.0
SLOPE_AT_ZERO = -2.0 * math.sqrt(2.0)  # dP/dc at c = 0


def _amplitude(c: float) -> float:
    if not 0.0 <= c < SPEED_OF_SOUND:
        raise ValueError(f"speed {c} outside [0, √2)")
    return math.sqrt(1.0 - 0.5 * c * c)


def kink(x) -> np.ndarray:
    return np.tanh(np.asarray(x, dtype=float) / math.sqrt(2.0))


def gray(x, c: float) -> np.ndarray:
    """c/√2 − iA·tanh(Ax/√2), A² = 1 − c²/2."""
    A = _amplitude(c)
    x = np.asarray(x, dtype=float)
    return c / math.sqrt(2.0) - 1j * A * np.tanh(A * x / math.sqrt(2.0))


def eta(x, c: float) -> np.ndarray:
    """|u_c|² − 1 = −((2 − c²)/2)·sech²(√(2 − c²)x/2)."""
    A = _amplitude(c)
    return -(A * A) / np.cosh(A * np.asarray(x, dtype=float) / math.sqrt(2.0)) ** 2


def xi(c: float) -> float:
    return (c * c - 2.0) / 2.0


def mu(c: float) -> float:
    return c / math.sqrt(2.0)


def momentum(c: float) -> float:
    """P(c) = 2·atan(√(2 − c²)/c) − c√(2 − c²); π at c = 0."""
    g = math.sqrt(2.0 - c * c)
    if c == 0:
        return math.pi
    return 2.0 * math.atan(g / c) - c * g


def energy(c: float) -> float:
    return (2.0 / 3.0) * (2.0 - c * c) ** 1.5


def momentum_slope(c: float) -> float:
    """dP/dc = −2√(2 − c²)."""
    return -2.0 * math.sqrt(2.0 - c * c)


def decay_rate(c: float) -> float:
    return math.sqrt(2.0 - c * c)
