from __future__ import annotations
from enum import Enum
from typing import Optional

from pydantic import BaseModel, Field

from app.config import (
    ELLIPTICITY_FLOOR,
    FIXED_POINT_TOL,
    MAX_INNER_ITERS,
    OUTPUT_CADENCE,
)
from app.models.field import BoundaryKind
from app.models.nonlinearity import ModelDescriptor


class Scheme(str, Enum):
    CrankNicolsonFixedPoint = "CrankNicolsonFixedPoint"
    StrangSplit = "StrangSplit"


class EvolutionConfig(BaseModel):
    dt: float = Field(gt=0)
    t_final: float = Field(ge=0)
    scheme: Scheme = Scheme.CrankNicolsonFixedPoint
    fixed_point_tol: float = Field(default=FIXED_POINT_TOL, gt=0)
    max_inner_iters: int = Field(default=MAX_INNER_ITERS, ge=1)
    ellipticity_floor: float = Field(default=ELLIPTICITY_FLOOR, gt=0)
    boundary: BoundaryKind = BoundaryKind.Background
    output_every: float = Field(default=OUTPUT_CADENCE, gt=0)


class ModulationFit(BaseModel):
    z: float
    phi: float
    d0_value: float
    iterations: int = 0


class EvolutionTrace(BaseModel):
    """Append-only during a run."""

    model: ModelDescriptor
    times: list[float] = []
    energy: list[float] = []
    momentum_untwisted: list[float] = []
    energy_drift: list[float] = []
    momentum_drift: list[float] = []
    min_nu: list[float] = []
    z: list[float] = []
    phi: list[float] = []
    dX_modulated: list[float] = []

    def append(self, **row: float) -> None:
        for key, value in row.items():
            getattr(self, key).append(float(value))


class StabilitySummary(BaseModel):
    initial_distance: float
    sup_distance: float
    growth_factor: float
    power_law_constant: Optional[float] = None  # sup d / d(0)^{1/8}
    verdict_slope: Optional[str] = None
    bounded: bool
