"""Base experiment interface. Each experiment implements run()."""
from __future__ import annotations
from abc import ABC, abstractmethod
from typing import Any

from pydantic import BaseModel


class Experiment(ABC):
    name: str = "experiment"

    @abstractmethod
    def run(self, **params: Any) -> BaseModel:
        ...
