"""Command-line entry point: the `qls` click group."""
from __future__ import annotations

import logging
import sys

import click
from rich.logging import RichHandler

from app import __version__
from app.commands import criterion, evolve, functionals, manifest, profile
from app.commands.common import console
from app.config import QLS_LOG_LEVEL

logger = logging.getLogger(__name__)


def configure_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else QLS_LOG_LEVEL
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, rich_tracebacks=True, show_path=False)],
        force=True,
    )


@click.group()
@click.version_option(__version__, prog_name="qls")
@click.option("--verbose", is_flag=True, help="DEBUG logging")
@click.option("--manifest", "manifest_path", default=None, help="write a run manifest (JSON) here")
@click.pass_context
def cli(ctx: click.Context, verbose: bool, manifest_path: str | None):
    """Dark and black solitons of quasilinear Schrödinger equations."""
    configure_logging(verbose)
    ctx.obj = {"argv": ["qls", *sys.argv[1:]], "started_at": manifest.now(), "manifest": manifest_path}


@cli.result_callback()
@click.pass_context
def finish(ctx: click.Context, *_args, **_kwargs):
    state = ctx.obj or {}
    if state.get("manifest"):
        manifest.write_manifest(state["manifest"], state)


cli.add_command(profile.profile_cmd)
cli.add_command(profile.potential_cmd)
cli.add_command(functionals.functionals_cmd)
cli.add_command(functionals.plateau_cmd)
cli.add_command(criterion.criterion_cmd)
cli.add_command(criterion.sweep_cmd)
cli.add_command(criterion.figures_cmd)
cli.add_command(evolve.evolve_cmd)
cli.add_command(manifest.manifest_cmd)
