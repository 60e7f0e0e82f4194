"""Run manifests: written after any command with --manifest, verified by `manifest`."""
from __future__ import annotations

import hashlib
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

import click
from rich.table import Table

from app import __version__
from app.commands.common import console, handle_errors
from app.errors import ValidationError
from app.models.manifest import RunManifest
from app.utils.io import write_json

logger = logging.getLogger(__name__)


def now() -> datetime:
    return datetime.now(timezone.utc)


def write_manifest(path: str, state: dict) -> RunManifest:
    manifest = RunManifest(
        command=list(state.get("argv", [])),
        model=state.get("model"),
        seed=state.get("seed"),
        version=__version__,
        started_at=state["started_at"],
        finished_at=now(),
        outputs=state.get("outputs", []),
    )
    write_json(manifest, path)
    logger.info("Manifest with %d outputs written to %s", len(manifest.outputs), path)
    return manifest


def verify_manifest(path: str | Path) -> list[tuple[str, bool]]:
    try:
        manifest = RunManifest.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ValidationError(f"cannot read manifest: {exc}", path=str(path))
    results = []
    for output in manifest.outputs:
        target = Path(output.path)
        ok = target.is_file() and hashlib.sha256(target.read_bytes()).hexdigest() == output.sha256
        results.append((output.path, ok))
    return results


@click.command("manifest")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@handle_errors
def manifest_cmd(path):
    """Check every output digest listed in a manifest; exit 1 on any mismatch."""
    results = verify_manifest(path)
    table = Table(title=str(path))
    table.add_column("output")
    table.add_column("sha256")
    for name, ok in results:
        table.add_row(name, "[green]match[/]" if ok else "[red]MISMATCH[/]")
    console.print(table)
    if not all(ok for _, ok in results):
        sys.exit(1)
