"""`profile` and `potential`: traveling-wave profiles and the effective potential."""
from __future__ import annotations

import logging
from typing import Optional

import click

from app.commands.common import console, emit_csv, handle_errors, model_options, resolve_model
from app.errors import ResolutionError
from app.services.potential import classify_existence, potential_curve
from app.services.profile import decay_rate_fit, soliton_profile
from app.utils.io import potential_frame, profile_frame

logger = logging.getLogger(__name__)


@click.command("profile")
@model_options
@click.option("--c", "speed", type=float, default=0.0, show_default=True, help="speed; 0 for the kink")
@click.option("--xmax", type=float, default=None, help="half-width of the grid")
@click.option("--n", type=int, default=4096, show_default=True)
@click.option("--out", default=None, help="CSV path (stdout when omitted)")
@handle_errors
def profile_cmd(case, r0, kappa, model_json, speed, xmax, n, out: Optional[str]):
    """Soliton profile u_c: columns x, re(u), im(u), |u|, eta, phase."""
    model = resolve_model(case, r0, kappa, model_json)
    profile = soliton_profile(model, abs(speed), xmax, n)
    emit_csv(profile_frame(profile), out)
    try:
        fit = decay_rate_fit(profile)
        console.print(
            f"[bold]{model.descriptor.label}[/] c={speed:g} μ_c={profile.mu_c:.6g} "
            f"decay {fit.rate:.6g} (expected {fit.expected:.6g}, rel. err {fit.relative_error:.2e})"
        )
    except ResolutionError as exc:
        logger.warning("Decay rate not fitted: %s", exc.message)


@click.command("potential")
@model_options
@click.option("--c", "speed", type=float, default=0.0, show_default=True)
@click.option("--xi-grid", "xi_grid", type=int, default=512, show_default=True)
@click.option("--out", default=None, help="CSV path (stdout when omitted)")
@handle_errors
def potential_cmd(case, r0, kappa, model_json, speed, xi_grid, out):
    """Samples of 𝒱_c on [−r0², ξ̃]: columns xi, V_c(xi)."""
    model = resolve_model(case, r0, kappa, model_json)
    emit_csv(potential_frame(potential_curve(model, abs(speed), xi_grid)), out)
    console.print(f"{model.descriptor.label} c={speed:g}: {classify_existence(model, speed).value}")
