"""κ sweep of the slope P'_κ(0) for one builtin case.

Rows are independent; they fan out over QLS_THREADS workers and come back
in grid order. A failing row is recorded in the result, not raised.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from app.config import QLS_THREADS
from app.experiments.base import Experiment
from app.models.experiments import SweepResult
from app.models.nonlinearity import ModelCase
from app.services.criterion import kappa_grid, sweep_row

logger = logging.getLogger(__name__)


class KappaSweepExperiment(Experiment):
    name = "sweep"

    def __init__(self, threads: int = QLS_THREADS):
        self.threads = max(int(threads), 1)

    def run(
        self,
        case: ModelCase | str,
        r0: float,
        kappa_min: float,
        kappa_max: float,
        steps: int,
    ) -> SweepResult:
        case = ModelCase(case)
        grid = kappa_grid(kappa_min, kappa_max, steps)
        if self.threads == 1:
            rows = [sweep_row(case, r0, float(k)) for k in grid]
        else:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                rows = list(pool.map(lambda k: sweep_row(case, r0, float(k)), grid))

        failures = sum(1 for r in rows if r.error)
        for row in rows:
            if row.error:
                logger.warning("κ=%g: %s", row.kappa, row.error)
        slopes = np.array([r.p_prime_0 for r in rows if r.p_prime_0 is not None])
        monotone = bool(np.all(np.diff(slopes) > 0)) if slopes.size >= 2 else None
        logger.info(
            "Sweep %s r0=%g over %d κ values: %d failed, monotone=%s",
            case.value, r0, len(rows), failures, monotone,
        )
        return SweepResult(case=case.value, r0=r0, rows=rows, failures=failures, monotone=monotone)
