"""`criterion`, `sweep` and `figures`: the slope P'_κ(0) and its κ dependence."""
from __future__ import annotations

import logging
from pathlib import Path

import click
import pandas as pd
from rich.table import Table

from app.commands.common import (
    console,
    emit_csv,
    emit_json,
    handle_errors,
    parse_case,
    record_output,
    resolve_model,
)
from app.errors import ValidationError
from app.experiments.figures import FigureExportExperiment
from app.experiments.sweep import KappaSweepExperiment
from app.models.criterion import SlopeMethod
from app.services.criterion import cross_validate, find_kappa0, gp_closed_form_report, slope_report
from app.utils.io import rows_frame, write_csv

logger = logging.getLogger(__name__)

_METHODS = {
    "integral": SlopeMethod.IntegralFormula,
    "branch": SlopeMethod.BranchFiniteDifference,
    "gp": SlopeMethod.GPClosedForm,
}


def _table(reports) -> Table:
    table = Table(title="P'_κ(0)")
    for column in ("method", "κ", "P'_κ(0)", "tolerance", "verdict"):
        table.add_column(column)
    for r in reports:
        table.add_row(r.method.value, f"{r.kappa:g}", f"{r.p_prime_0:.10g}", f"{r.tolerance:.1e}", r.verdict.value)
    return table


@click.command("criterion")
@click.option("--case", "case", default="GP1", show_default=True, help="GP1|GP2|SF3|1|2|3 or gp-closed-form")
@click.option("--r0", type=float, default=1.0, show_default=True)
@click.option("--kappa", type=float, default=0.0, show_default=True)
@click.option("--model", "model_json", default=None)
@click.option("--method", type=click.Choice(["integral", "branch", "gp", "all"]), default="integral", show_default=True)
@click.option("--c-step", type=float, default=0.05, show_default=True)
@click.option("--kappa0", "want_kappa0", is_flag=True, help="print κ₀, the sign change of the GP closed form")
@click.option("--json", "as_json", is_flag=True)
@handle_errors
def criterion_cmd(case, r0, kappa, model_json, method, c_step, want_kappa0, as_json):
    """Slope of the momentum along the dark-soliton branch at c = 0."""
    if case == "gp-closed-form":
        if want_kappa0:
            value = find_kappa0()
            if as_json:
                emit_json({"kappa0": value})
            else:
                click.echo(f"{value:.10g}")
            return
        reports = [gp_closed_form_report(kappa)]
    else:
        if want_kappa0:
            raise ValidationError("--kappa0 applies to --case gp-closed-form")
        model = resolve_model(case, r0, kappa, model_json)
        names = ["integral", "branch"] if method == "all" else [method]
        reports = [slope_report(model, _METHODS[m], c_step) for m in names]

    if as_json:
        if len(reports) == 1:
            emit_json(reports[0])
        else:
            emit_json({"reports": [r.model_dump(mode="json") for r in reports],
                       "cross_validation": cross_validate(reports).model_dump(mode="json")})
    else:
        console.print(_table(reports))
        if len(reports) > 1:
            check = cross_validate(reports)
            console.print(f"spread {check.spread:.2e} (tolerance {check.tolerance:.1e}): agree={check.agree}")


@click.command("sweep")
@click.option("--case", "case", required=True, help="GP1|GP2|SF3 or 1|2|3")
@click.option("--r0", type=float, default=1.0, show_default=True)
@click.option("--kappa-min", type=float, required=True)
@click.option("--kappa-max", type=float, required=True)
@click.option("--steps", type=int, default=20, show_default=True)
@click.option("--threads", type=int, default=None, help="worker count (default QLS_THREADS)")
@click.option("--out", default=None, help="CSV path (stdout when omitted)")
@handle_errors
def sweep_cmd(case, r0, kappa_min, kappa_max, steps, threads, out):
    """P'_κ(0) over a κ grid: columns case, r0, kappa, p_prime_0, verdict, error."""
    runner = KappaSweepExperiment() if threads is None else KappaSweepExperiment(threads)
    result = runner.run(parse_case(case), r0, kappa_min, kappa_max, steps)
    emit_csv(rows_frame(result.rows), out)
    console.print(f"{result.case} r0={r0:g}: {len(result.rows)} rows, {result.failures} failed, monotone={result.monotone}")


@click.command("figures")
@click.option("--out-dir", type=click.Path(file_okay=False), default="figures", show_default=True)
@click.option("--n", type=int, default=1024, show_default=True, help="kink grid size")
@click.option("--steps", type=int, default=20, show_default=True, help="κ values per slope curve")
@handle_errors
def figures_cmd(out_dir, n, steps):
    """Data behind the kink-profile figure and the P'_κ(0)-versus-κ figure."""
    data = FigureExportExperiment().run(n=n, steps=steps)
    kink = pd.concat(
        [
            pd.DataFrame(
                {"case": c.model.case.value, "r0": c.model.r0, "kappa": c.model.kappa, "x": c.x, "abs_u": c.modulus}
            )
            for c in data.kink_curves
        ],
        ignore_index=True,
    )
    slopes = rows_frame([row for sweep in data.slope_sweeps for row in sweep.rows])
    out = Path(out_dir)
    record_output(write_csv(kink, out / "fig1_kink_profiles.csv"))
    record_output(write_csv(slopes, out / "fig2_slope_vs_kappa.csv"))
    console.print(f"Wrote {len(kink)} profile rows and {len(slopes)} slope rows to {out}")
