"""Lyapunov functional on the constrained-profile family over (μ, R)."""
from __future__ import annotations

import logging
from typing import Sequence

from app.errors import ResolutionError
from app.experiments.base import Experiment
from app.models.experiments import PlateauResult
from app.models.nonlinearity import NonlinearModel
from app.services.comparison import fit_coercivity_constant, lyapunov_plateau_scan
from app.services.profile import kink_energy_closed_form

logger = logging.getLogger(__name__)

DEFAULT_MUS = (0.02, 0.05, 0.1)


class PlateauScanExperiment(Experiment):
    name = "plateau"

    def run(
        self,
        model: NonlinearModel,
        mus: Sequence[float] = DEFAULT_MUS,
        M: float | None = None,
    ) -> PlateauResult:
        scans = [lyapunov_plateau_scan(model, mu, M=M) for mu in mus]
        e_kink = kink_energy_closed_form(model)
        try:
            fit = fit_coercivity_constant(mus, [s.L_min for s in scans], e_kink)
        except ResolutionError as exc:
            logger.warning("No coercivity constant for %s: %s", model.descriptor.label, exc.message)
            fit = None
        for scan in scans:
            if not scan.interior:
                logger.warning("μ=%g: minimiser on the R-grid boundary", scan.mu)
        return PlateauResult(model=model.descriptor, scans=scans, kink_energy=e_kink, coercivity=fit)
