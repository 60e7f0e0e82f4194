"""Perturbed-kink evolution with the slope verdict alongside.

Phase 1: slope P'_κ(0) from the integral formula (verdict recorded, not required)
Phase 2: evolve u₀ + seeded bump, fitting (z, φ) at every output time
Phase 3: summary: sup_t d_X / d_X(0) and the constant of the 1/8 power law
"""
from __future__ import annotations

import logging

from app.experiments.base import Experiment
from app.models.evolution import EvolutionConfig, Scheme
from app.models.experiments import OrbitalResult
from app.models.nonlinearity import NonlinearModel
from app.services.criterion import vk_slope_integral
from app.services.evolution import perturbed_kink, perturbed_kink_run, stability_summary
from app.services.functionals import distance_dX
from app.services.profile import kink_profile, sample_field

logger = logging.getLogger(__name__)


class OrbitalStabilityExperiment(Experiment):
    name = "orbital"

    def run(
        self,
        model: NonlinearModel,
        amplitude: float = 1e-2,
        t_final: float = 20.0,
        dt: float = 1e-2,
        scheme: Scheme | str = Scheme.CrankNicolsonFixedPoint,
        seed: int = 0,
        x_max: float = 40.0,
        n: int = 2048,
    ) -> OrbitalResult:
        criterion = vk_slope_integral(model)
        kink = kink_profile(model, x_max=x_max, n=n)
        config = EvolutionConfig(dt=dt, t_final=t_final, scheme=Scheme(scheme))
        initial_distance = distance_dX(perturbed_kink(kink, amplitude, seed), sample_field(kink))
        final, trace = perturbed_kink_run(model, amplitude, config, kink, seed=seed)
        summary = stability_summary(trace, initial_distance).model_copy(
            update={"verdict_slope": criterion.verdict.value}
        )
        if not summary.bounded:
            logger.warning(
                "%s: modulated distance grew %.3gx (slope verdict %s)",
                model.descriptor.label, summary.growth_factor, criterion.verdict.value,
            )
        return OrbitalResult(
            model=model.descriptor,
            seed=seed,
            amplitude=amplitude,
            criterion=criterion,
            trace=trace,
            summary=summary,
            final=final,
        )
