"""Shared click options, model resolution, error mapping and output recording."""
from __future__ import annotations

import functools
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Optional

import click
from rich.console import Console

from app.errors import QLSError, ValidationError
from app.models.nonlinearity import ModelCase, NonlinearModel
from app.services.nonlinearity import builtin_model, model_from_descriptor
from app.utils.io import file_digest, to_json, write_csv, write_json

logger = logging.getLogger(__name__)

# Human-readable summaries go to stderr; stdout stays machine-readable.
console = Console(stderr=True)

_CASE_ALIASES = {"1": "GP1", "2": "GP2", "3": "SF3"}


# ── Model resolution ─────────────────────────────────────────────────────────

def parse_case(value: str) -> ModelCase:
    name = _CASE_ALIASES.get(value, value)
    try:
        return ModelCase(name)
    except ValueError:
        raise ValidationError(f"unknown case id {value!r}", case=value)


def resolve_model(case: str, r0: float, kappa: float, model: Optional[str]) -> NonlinearModel:
    """--model (JSON text or path to a JSON file) wins over --case/--r0/--kappa."""
    if model:
        path = Path(model)
        text = path.read_text(encoding="utf-8") if path.is_file() else model
        try:
            descriptor = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"model descriptor is not JSON: {exc.msg}", model=model)
        if isinstance(descriptor, dict) and "case" in descriptor:
            descriptor["case"] = _CASE_ALIASES.get(str(descriptor["case"]), descriptor["case"])
        resolved = model_from_descriptor(descriptor)
    else:
        resolved = builtin_model(parse_case(case), r0, kappa)
    record_model(resolved)
    return resolved


def model_options(fn: Callable) -> Callable:
    options = [
        click.option("--case", "case", default="GP1", show_default=True, help="GP1|GP2|SF3 or 1|2|3"),
        click.option("--r0", type=float, default=1.0, show_default=True),
        click.option("--kappa", type=float, default=0.0, show_default=True),
        click.option("--model", "model_json", default=None, help="JSON descriptor (text or file path)"),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


# ── Errors ───────────────────────────────────────────────────────────────────

def handle_errors(fn: Callable) -> Callable:
    """Map QLSError to one JSON line on stderr and the family exit code."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except QLSError as exc:
            logger.debug("Command failed", exc_info=True)
            click.echo(exc.to_json(), err=True)
            sys.exit(exc.exit_code)

    return wrapper


# ── Run bookkeeping ──────────────────────────────────────────────────────────

def _run_state() -> Optional[dict]:
    ctx = click.get_current_context(silent=True)
    if ctx is None:
        return None
    root = ctx.find_root()
    return root.obj if isinstance(root.obj, dict) else None


def record_model(model: NonlinearModel) -> None:
    state = _run_state()
    if state is not None:
        state["model"] = model.descriptor.model_dump(mode="json")


def record_seed(seed: int) -> None:
    state = _run_state()
    if state is not None:
        state["seed"] = seed


def record_output(path: Path) -> None:
    state = _run_state()
    if state is not None:
        state.setdefault("outputs", []).append(file_digest(path))


def emit_csv(frame, out: Optional[str]) -> None:
    """CSV to the named file (recorded for the manifest) or to stdout."""
    if out:
        record_output(write_csv(frame, out))
    else:
        frame.to_csv(sys.stdout, index=False, float_format="%.17g", lineterminator="\n")


def emit_json(payload, out: Optional[str] = None) -> None:
    if out:
        record_output(write_json(payload, out))
    else:
        click.echo(to_json(payload))
