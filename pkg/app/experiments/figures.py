"""Data behind the two reference figures.

Phase 1: kink profiles |u₀| for GP1, GP2, SF3 at several κ above κ̃
Phase 2: P'_κ(0) against κ from just above κ̃ to 10
          (GP1 and GP2 at r0 = 1, SF3 at r0 ∈ {1, 2})
"""
from __future__ import annotations

import logging

import numpy as np

from app.experiments.base import Experiment
from app.experiments.sweep import KappaSweepExperiment
from app.models.experiments import FigureData, KinkCurve
from app.models.nonlinearity import ModelCase
from app.services.nonlinearity import builtin_model, kappa_tilde
from app.services.profile import kink_profile

logger = logging.getLogger(__name__)

KINK_KAPPAS = (0.0, 1.0, 5.0)
SLOPE_CASES = ((ModelCase.GP1, 1.0), (ModelCase.GP2, 1.0), (ModelCase.SF3, 1.0), (ModelCase.SF3, 2.0))
KINK_X_MAX = 10.0
KAPPA_MARGIN = 0.05


def _kappa_floor(case: ModelCase, r0: float) -> float:
    return kappa_tilde(builtin_model(case, r0, 0.0))


class FigureExportExperiment(Experiment):
    name = "figures"

    def __init__(self, threads: int | None = None):
        self.sweeper = KappaSweepExperiment() if threads is None else KappaSweepExperiment(threads)

    def kink_curves(self, n: int, x_max: float = KINK_X_MAX) -> list[KinkCurve]:
        curves: list[KinkCurve] = []
        for case in (ModelCase.GP1, ModelCase.GP2, ModelCase.SF3):
            floor = _kappa_floor(case, 1.0)
            # one κ halfway into the negative admissible range
            kappas = (0.5 * floor,) + KINK_KAPPAS if np.isfinite(floor) else KINK_KAPPAS
            for kappa in kappas:
                model = builtin_model(case, 1.0, kappa)
                profile = kink_profile(model, x_max=x_max, n=n)
                curves.append(
                    KinkCurve(
                        model=model.descriptor,
                        x=profile.grid.tolist(),
                        modulus=np.abs(profile.values).tolist(),
                    )
                )
        return curves

    def slope_sweeps(self, steps: int, kappa_max: float = 10.0):
        sweeps = []
        for case, r0 in SLOPE_CASES:
            lo = _kappa_floor(case, r0) + KAPPA_MARGIN
            sweeps.append(self.sweeper.run(case, r0, lo, kappa_max, steps))
        return sweeps

    def run(self, n: int = 1024, steps: int = 20) -> FigureData:
        data = FigureData(kink_curves=self.kink_curves(n), slope_sweeps=self.slope_sweeps(steps))
        logger.info("Figure data: %d kink curves, %d slope sweeps", len(data.kink_curves), len(data.slope_sweeps))
        return data
