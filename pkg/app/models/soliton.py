from __future__ import annotations
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from app.models.nonlinearity import ModelDescriptor, NonlinearModel


class ExistenceClass(str, Enum):
    TrivialOnly = "TrivialOnly"
    KinkExists = "KinkExists"
    GraySolitonExists = "GraySolitonExists"


class ProfileKind(str, Enum):
    kink = "kink"
    gray = "gray"


class PotentialSlice(BaseModel):
    """𝒱_c for one speed; c_s cached at construction."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    model: NonlinearModel
    c: float
    c_s: float


class BranchRoot(BaseModel):
    c: float
    xi_c: float  # simple root ξ(c) ∈ [−r0², 0)
    vc_prime_at_root: float
    valid: bool
    mu_c: float
    delta_estimate: Optional[float] = None  # largest validated speed on a scan


class PotentialCurve(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    model: ModelDescriptor
    c: float
    xi: np.ndarray
    values: np.ndarray


class SolitonProfile(BaseModel):
    """Sampled u_{c,κ} on a uniform grid; immutable after construction."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    model: ModelDescriptor
    kind: ProfileKind
    c: float
    grid: np.ndarray
    amplitude: np.ndarray  # |u|
    phase: np.ndarray  # θ, 0 at x = 0 (kink: 0 everywhere, sign carried by `signed`)
    eta: np.ndarray  # |u|² − r0²
    signed: np.ndarray  # kink: odd real profile; gray: equals amplitude
    mu_c: float
    decay_rate: float  # expected exponential rate of |η|
    x_max: float

    @property
    def dx(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def values(self) -> np.ndarray:
        """Complex samples u(x)."""
        if self.kind is ProfileKind.kink:
            return self.signed.astype(complex)
        return self.amplitude * np.exp(1j * self.phase)


class DecayFit(BaseModel):
    rate: float
    expected: float

    @property
    def relative_error(self) -> float:
        return abs(self.rate - self.expected) / self.expected
