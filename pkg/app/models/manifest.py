from __future__ import annotations
from datetime import datetime
from typing import Any, Optional

from pydantic import BaseModel


class OutputDigest(BaseModel):
    path: str
    sha256: str
    bytes: int


class RunManifest(BaseModel):
    command: list[str]
    model: Optional[dict[str, Any]] = None
    seed: Optional[int] = None
    version: str
    started_at: datetime
    finished_at: Optional[datetime] = None
    outputs: list[OutputDigest] = []
