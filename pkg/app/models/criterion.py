from __future__ import annotations
from enum import Enum
from typing import Optional

from pydantic import BaseModel

from app.models.nonlinearity import ModelDescriptor


class SlopeMethod(str, Enum):
    IntegralFormula = "IntegralFormula"
    BranchFiniteDifference = "BranchFiniteDifference"
    GPClosedForm = "GPClosedForm"


class Verdict(str, Enum):
    StableSlope = "StableSlope"
    UnstableSlope = "UnstableSlope"
    Inconclusive = "Inconclusive"


class CriterionReport(BaseModel):
    model: Optional[ModelDescriptor] = None
    kappa: float
    p_prime_0: float
    method: SlopeMethod
    tolerance: float
    verdict: Verdict
    raw_value: Optional[float] = None  # GP closed form before the factor-2 normalization
    note: str = ""


class CrossValidation(BaseModel):
    agree: bool
    spread: float
    tolerance: float
    methods: list[SlopeMethod] = []


class SweepRow(BaseModel):
    case: str
    r0: float
    kappa: float
    p_prime_0: Optional[float] = None
    verdict: Optional[Verdict] = None
    error: Optional[str] = None
