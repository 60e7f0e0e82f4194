from __future__ import annotations
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.config import BACKGROUND_TOL


class BoundaryKind(str, Enum):
    Background = "Background"
    Periodic = "Periodic"


class FieldState(BaseModel):
    """Complex field on a uniform grid with background modulus r0."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: np.ndarray
    values: np.ndarray
    r0: float
    boundary_kind: BoundaryKind = BoundaryKind.Background

    @field_validator("grid")
    @classmethod
    def _uniform(cls, grid: np.ndarray) -> np.ndarray:
        grid = np.asarray(grid, dtype=float)
        if grid.ndim != 1 or grid.size < 16:
            raise ValueError("grid needs at least 16 samples")
        steps = np.diff(grid)
        if steps[0] <= 0 or np.max(np.abs(steps - steps[0])) > 1e-9 * max(1.0, abs(grid).max()):
            raise ValueError("grid must be uniform and increasing")
        return grid

    @field_validator("values")
    @classmethod
    def _complex(cls, values: np.ndarray) -> np.ndarray:
        return np.asarray(values, dtype=complex)

    @model_validator(mode="after")
    def _shapes(self) -> "FieldState":
        if self.values.shape != self.grid.shape:
            raise ValueError("values and grid differ in length")
        if self.r0 <= 0:
            raise ValueError("r0 must be positive")
        if self.boundary_kind is BoundaryKind.Background:
            gap = np.abs(np.abs(self.values[[0, -1]]) - self.r0)
            if gap.max() > BACKGROUND_TOL * self.r0:
                raise ValueError(
                    f"|v| at the grid ends differs from r0={self.r0} by {gap.max():.3g}; "
                    "use a wider grid or boundary_kind=Periodic"
                )
        return self

    @property
    def dx(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def periodic(self) -> bool:
        return self.boundary_kind is BoundaryKind.Periodic

    @property
    def modulus(self) -> np.ndarray:
        return np.abs(self.values)

    def with_values(self, values: np.ndarray) -> "FieldState":
        return FieldState(
            grid=self.grid, values=values, r0=self.r0, boundary_kind=self.boundary_kind
        )
