"""Sweep, plateau, orbital and figure experiments end to end on small grids.

Run:
    python -m pytest app/tests/test_experiments.py -v
"""
from __future__ import annotations

import numpy as np
import pytest

from app.data import gp_reference
from app.experiments.figures import FigureExportExperiment
from app.experiments.orbital import OrbitalStabilityExperiment
from app.experiments.plateau import PlateauScanExperiment
from app.experiments.sweep import KappaSweepExperiment
from app.models.criterion import Verdict
from app.models.nonlinearity import ModelCase
from app.services.nonlinearity import builtin_model, kappa_tilde


# ── Fixtures ──────────────────────────────────────────────────────────────────

@pytest.fixture(scope="module")
def gp():
    return builtin_model(ModelCase.GP1, 1.0, 0.0)


# ── Tests ─────────────────────────────────────────────────────────────────────

class TestKappaSweep:
    @pytest.mark.parametrize("threads", [1, 3])
    def test_rows_in_grid_order(self, threads):
        result = KappaSweepExperiment(threads).run("GP1", 1.0, 0.0, 6.0, 4)
        assert [r.kappa for r in result.rows] == pytest.approx([0.0, 2.0, 4.0, 6.0])
        assert result.failures == 0
        assert result.monotone is True
        assert result.rows[0].p_prime_0 == pytest.approx(gp_reference.SLOPE_AT_ZERO, abs=1e-8)
        assert result.rows[-1].verdict is Verdict.UnstableSlope

    @pytest.mark.slow
    @pytest.mark.parametrize("case,r0", [("GP1", 1.0), ("GP2", 1.0), ("SF3", 1.0), ("SF3", 2.0)])
    def test_monotone_from_kappa_tilde(self, case, r0):
        floor = kappa_tilde(builtin_model(case, r0, 0.0))
        result = KappaSweepExperiment(4).run(case, r0, floor + 0.05, 10.0, 20)
        assert result.failures == 0, [r.error for r in result.rows if r.error]
        assert result.monotone, f"{case} r0={r0}: slopes not increasing"

    def test_failures_recorded(self):
        result = KappaSweepExperiment().run(ModelCase.GP1, 1.0, -2.0, 0.0, 3)
        assert result.failures == 2
        assert result.monotone is None
        assert all(r.error.startswith("hypothesis_violated") for r in result.rows[:2])


class TestPlateau:
    def test_coercivity_constant(self, gp):
        result = PlateauScanExperiment().run(gp)
        assert len(result.scans) == 3
        assert result.kink_energy == pytest.approx(gp_reference.KINK_ENERGY, rel=1e-10)
        assert result.coercivity is not None
        assert 0.2 < result.coercivity.K < 1.0, f"K = {result.coercivity.K}"
        assert result.coercivity.K == max(result.coercivity.ratios)
        assert min(result.coercivity.ratios) >= result.coercivity.K / 3.0, "K unstable across μ"


class TestOrbital:
    def test_short_run(self, gp):
        result = OrbitalStabilityExperiment().run(gp, amplitude=1e-2, t_final=0.2, dt=1e-2, x_max=20.0, n=512, seed=2)
        assert result.criterion.p_prime_0 == pytest.approx(gp_reference.SLOPE_AT_ZERO, abs=1e-8)
        assert result.summary.verdict_slope == Verdict.StableSlope.value
        assert len(result.trace.times) == 3
        assert result.summary.initial_distance > 0
        assert result.summary.bounded

    def test_unperturbed_kink_stays_put(self, gp):
        result = OrbitalStabilityExperiment().run(gp, amplitude=0.0, t_final=0.1, x_max=20.0, n=512)
        assert result.summary.initial_distance == 0.0
        assert max(abs(z) for z in result.trace.z) <= 1e-6
        assert result.summary.sup_distance <= 1e-6


class TestFigures:
    def test_kink_curves(self):
        curves = FigureExportExperiment().kink_curves(n=129)
        # h' never vanishes for the builtin cases, so κ̃ is finite and each gets four curves
        assert len(curves) == 12
        for curve in curves:
            modulus = np.asarray(curve.modulus)
            assert modulus.min() < 1e-6
            assert modulus[0] > 0.9

    def test_slope_sweeps_start_above_kappa_tilde(self):
        sweeps = FigureExportExperiment(threads=2).slope_sweeps(steps=3, kappa_max=2.0)
        assert [(s.case, s.r0) for s in sweeps] == [("GP1", 1.0), ("GP2", 1.0), ("SF3", 1.0), ("SF3", 2.0)]
        assert sweeps[0].rows[0].kappa == pytest.approx(-0.45)
        assert sweeps[0].failures == 0
