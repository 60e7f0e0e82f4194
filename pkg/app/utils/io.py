"""CSV / JSON output and the field CSV reader.

CSV files carry a header row and 17 significant digits so that reruns
reproduce them byte for byte.
"""
from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Iterable

import numpy as np
import pandas as pd
from pydantic import BaseModel

from app.errors import ValidationError
from app.models.evolution import EvolutionTrace
from app.models.field import BoundaryKind, FieldState
from app.models.manifest import OutputDigest
from app.models.soliton import PotentialCurve, SolitonProfile

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
TRACE_COLUMNS = ["t", "E", "P_untwisted", "min_nu", "z", "phi", "dX_modulated"]


# ── Frames ───────────────────────────────────────────────────────────────────

def profile_frame(profile: SolitonProfile) -> pd.DataFrame:
    u = profile.values
    return pd.DataFrame(
        {
            "x": profile.grid,
            "re(u)": u.real,
            "im(u)": u.imag,
            "|u|": np.abs(u),
            "eta": profile.eta,
            "phase": profile.phase,
        }
    )


def potential_frame(curve: PotentialCurve) -> pd.DataFrame:
    return pd.DataFrame({"xi": curve.xi, "V_c(xi)": curve.values})


def field_frame(field: FieldState) -> pd.DataFrame:
    return pd.DataFrame({"x": field.grid, "re": field.values.real, "im": field.values.imag})


def trace_frame(trace: EvolutionTrace) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "t": trace.times,
            "E": trace.energy,
            "P_untwisted": trace.momentum_untwisted,
            "min_nu": trace.min_nu,
            "z": trace.z,
            "phi": trace.phi,
            "dX_modulated": trace.dX_modulated,
        },
        columns=TRACE_COLUMNS,
    )


def rows_frame(rows: Iterable[BaseModel | dict]) -> pd.DataFrame:
    return pd.DataFrame([r.model_dump(mode="json") if isinstance(r, BaseModel) else r for r in rows])


# ── Writers ──────────────────────────────────────────────────────────────────

def _prepare(path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_csv(frame: pd.DataFrame, path: str | Path) -> Path:
    path = _prepare(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug("Wrote %d rows to %s", len(frame), path)
    return path


def to_json(payload: BaseModel | dict | list) -> str:
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    return json.dumps(payload, indent=2, sort_keys=True, default=_default)


def _default(value: Any):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"not JSON serialisable: {type(value).__name__}")


def write_json(payload: BaseModel | dict | list, path: str | Path) -> Path:
    path = _prepare(path)
    path.write_text(to_json(payload) + "\n", encoding="utf-8")
    return path


def file_digest(path: str | Path) -> OutputDigest:
    data = Path(path).read_bytes()
    return OutputDigest(path=str(path), sha256=hashlib.sha256(data).hexdigest(), bytes=len(data))


# ── Readers ──────────────────────────────────────────────────────────────────

def read_field_csv(
    path: str | Path, r0: float, boundary_kind: BoundaryKind = BoundaryKind.Background
) -> FieldState:
    """Field from a CSV with columns x, re, im."""
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError) as exc:
        raise ValidationError(f"cannot read field file: {exc}", path=str(path))
    missing = {"x", "re", "im"} - set(frame.columns)
    if missing:
        raise ValidationError("field file lacks columns", missing=sorted(missing), path=str(path))
    values = frame["re"].to_numpy(float) + 1j * frame["im"].to_numpy(float)
    try:
        return FieldState(grid=frame["x"].to_numpy(float), values=values, r0=r0, boundary_kind=boundary_kind)
    except ValueError as exc:  # pydantic validation
        raise ValidationError(f"invalid field file: {exc}", path=str(path))
