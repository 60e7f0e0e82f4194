from __future__ import annotations
from enum import Enum
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

ScalarFn = Callable[[np.ndarray], np.ndarray]


class ModelCase(str, Enum):
    GP1 = "GP1"  # f = r0² − σ, h = σ
    GP2 = "GP2"  # f = r0² − σ, h = √(1+σ)
    SF3 = "SF3"  # f = ((1+r0²)/(1+σ))³ − 1, h = σ
    custom = "custom"


class ModelDescriptor(BaseModel):
    """JSON-serialisable identity of a model; hashable, used as cache key."""

    model_config = ConfigDict(frozen=True)

    case: ModelCase
    r0: float
    kappa: float
    f: Optional[str] = None  # expression in s (custom only)
    h: Optional[str] = None
    F: Optional[str] = None  # optional analytic antiderivative ∫_s^{r0²} f

    @property
    def label(self) -> str:
        return f"{self.case.value}(r0={self.r0:g},kappa={self.kappa:g})"


class NonlinearModel(BaseModel):
    """The tuple (f, h, r0, κ) with derivatives and F(σ) = ∫_σ^{r0²} f."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    descriptor: ModelDescriptor
    f: ScalarFn
    f_prime: ScalarFn
    h: ScalarFn
    h_prime: ScalarFn
    h_dprime: ScalarFn
    F: ScalarFn
    F_reduced: ScalarFn  # G(δ) = F(r0² − δ)/δ², finite at δ = 0
    analytic_derivatives: bool = True

    @property
    def r0(self) -> float:
        return self.descriptor.r0

    @property
    def kappa(self) -> float:
        return self.descriptor.kappa

    @property
    def case(self) -> ModelCase:
        return self.descriptor.case

    def __hash__(self) -> int:
        return hash(self.descriptor)


class Margin(BaseModel):
    ok: bool
    worst_sigma: float
    margin: float


class HypothesisReport(BaseModel):
    model: ModelDescriptor
    h1_smooth_assumed: bool = True
    h2_ellipticity: Margin
    h3_potential: Margin
    h3_convexity: Margin  # F''(r0²) > 0
    kappa_tilde: float
    kappa_tilde_vacuous: bool = False  # h' vanishes somewhere on (0, r0²]
    xi_tilde: float = Field(gt=0)
    grid_n: int

    @property
    def passed(self) -> bool:
        return self.h2_ellipticity.ok and self.h3_potential.ok and self.h3_convexity.ok


class EnergyConstants(BaseModel):
    """Constants of the pointwise bound e(v) ≥ K⁻¹(|v'|² + (|v|²−r0²)²)."""

    c_potential: float  # inf F(σ)/(σ−r0²)²
    c_ellipticity: float  # inf 1 + 2κσh'(σ)²
    K: float
