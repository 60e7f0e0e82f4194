"""Exception hierarchy shared by services, experiments and the CLI.

Two families, mapped to process exit codes by the CLI:
  ValidationError  → exit 2 (bad input, violated hypotheses)
  NumericalFailure → exit 3 (quadrature, root finding, time stepping)
"""
from __future__ import annotations

import json
from typing import Any


class QLSError(Exception):
    code = "qls_error"
    exit_code = 1

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_json(self) -> str:
        return json.dumps(
            {"error": self.code, "message": self.message, "details": self.details},
            default=str,
        )


# ── Validation (exit 2) ──────────────────────────────────────────────────────

class ValidationError(QLSError):
    code = "validation_error"
    exit_code = 2


class HypothesisError(ValidationError):
    code = "hypothesis_violated"


class UnsupportedStructure(ValidationError):
    code = "unsupported_structure"


# ── Numerical failures (exit 3) ──────────────────────────────────────────────

class NumericalFailure(QLSError):
    code = "numerical_failure"
    exit_code = 3


class QuadratureError(NumericalFailure):
    code = "quadrature_nonconvergence"


class RootNotFound(NumericalFailure):
    code = "root_not_found"


class ResolutionError(NumericalFailure):
    code = "resolution_error"


class DegenerateDispersion(NumericalFailure):
    code = "degenerate_dispersion"


class ConvergenceError(NumericalFailure):
    code = "convergence_error"


class CaptureError(NumericalFailure):
    code = "capture_radius_exceeded"
