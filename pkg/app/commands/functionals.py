"""`functionals` on a field file and the `plateau` Lyapunov scan."""
from __future__ import annotations

import logging

import click
import pandas as pd

from app.commands.common import console, emit_csv, emit_json, handle_errors, model_options, resolve_model
from app.experiments.plateau import DEFAULT_MUS, PlateauScanExperiment
from app.services.functionals import functional_report
from app.utils.io import read_field_csv

logger = logging.getLogger(__name__)


@click.command("functionals")
@model_options
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--M-lyap", "m_lyap", type=float, default=None, help="Lyapunov weight M")
@click.option("--out", default=None, help="JSON path (stdout when omitted)")
@handle_errors
def functionals_cmd(case, r0, kappa, model_json, in_path, m_lyap, out):
    """Energy, both momenta and (with --M-lyap) the Lyapunov functional of a field CSV."""
    model = resolve_model(case, r0, kappa, model_json)
    field = read_field_csv(in_path, model.r0)
    emit_json(functional_report(field, model, m_lyap), out)


@click.command("plateau")
@model_options
@click.option("--mu", "mus", type=float, multiple=True, help="plateau modulus (repeatable)")
@click.option("--M-lyap", "m_lyap", type=float, default=None)
@click.option("--out", default=None, help="CSV of (mu, R, L)")
@handle_errors
def plateau_cmd(case, r0, kappa, model_json, mus, m_lyap, out):
    """Lyapunov functional along the constrained-profile family and the coercivity constant."""
    model = resolve_model(case, r0, kappa, model_json)
    result = PlateauScanExperiment().run(model, mus or DEFAULT_MUS, m_lyap)
    frame = pd.concat(
        [pd.DataFrame({"mu": s.mu, "R": s.R_grid, "L": s.lyapunov}) for s in result.scans],
        ignore_index=True,
    )
    emit_csv(frame, out)
    for scan in result.scans:
        console.print(
            f"μ={scan.mu:g}: R*={scan.R_star:.5g} (predicted {scan.R_predicted:.5g}) "
            f"L_min−E(kink)={scan.L_min - result.kink_energy:.4g}"
        )
    if result.coercivity is not None:
        console.print(f"K = {result.coercivity.K:.4g}")
