from __future__ import annotations
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from app.models.field import FieldState
from app.models.nonlinearity import ModelDescriptor


class FunctionalReport(BaseModel):
    model: ModelDescriptor
    energy: float
    momentum_renormalized: Optional[float] = None  # only when min|v| > 0
    momentum_untwisted: float  # in [0, 2π r0²)
    lyapunov: Optional[float] = None
    M: Optional[float] = None
    min_modulus: float
    quadrature_error: float


class PathologyKind(str, Enum):
    NegativeF = "NegativeF"
    NegativeEllipticity = "NegativeEllipticity"


class ConstrainedProfile(BaseModel):
    """Gray-soliton tails glued to a plateau of modulus μ on (−R, R)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    model: ModelDescriptor
    mu: float
    R: float
    c: float  # 𝐜(μ): the speed whose gray soliton has minimum modulus μ
    phase_slope: float  # C inside the plateau
    field: FieldState


class PlateauScan(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    model: ModelDescriptor
    mu: float
    M: float
    R_grid: np.ndarray
    lyapunov: np.ndarray
    R_star: float
    L_min: float
    R_predicted: float  # −μ²(P'(0) + 1/M)/r0⁴
    interior: bool  # minimiser strictly inside the scanned range


class CoercivityFit(BaseModel):
    K: float
    mus: list[float]
    excess: list[float]  # L_min(μ) − E(kink)
    ratios: list[float]  # μ² / excess
