from __future__ import annotations
from typing import Optional

from pydantic import BaseModel, Field

from app.models.criterion import CriterionReport, SweepRow
from app.models.evolution import EvolutionTrace, StabilitySummary
from app.models.field import FieldState
from app.models.functionals import CoercivityFit, PlateauScan
from app.models.nonlinearity import ModelDescriptor


class SweepResult(BaseModel):
    case: str
    r0: float
    rows: list[SweepRow] = []
    failures: int = 0
    monotone: Optional[bool] = None  # P'_κ(0) strictly increasing over the successful rows


class KinkCurve(BaseModel):
    """One Figure-1 curve: |u₀| against x."""

    model: ModelDescriptor
    x: list[float]
    modulus: list[float]


class FigureData(BaseModel):
    kink_curves: list[KinkCurve] = []
    slope_sweeps: list[SweepResult] = []


class OrbitalResult(BaseModel):
    model: ModelDescriptor
    seed: int
    amplitude: float
    criterion: CriterionReport
    trace: EvolutionTrace
    summary: StabilitySummary
    final: Optional[FieldState] = Field(default=None, exclude=True)


class PlateauResult(BaseModel):
    model: ModelDescriptor
    scans: list[PlateauScan] = []
    kink_energy: float
    coercivity: Optional[CoercivityFit] = None
