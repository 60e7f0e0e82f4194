"""In-memory store for computed soliton profiles.

Profiles are immutable, so one LRU cache is shared by every caller
(sweep workers included); a lock guards the cache bookkeeping.
"""
from __future__ import annotations

import logging
import threading
from typing import Callable, Hashable

from cachetools import LRUCache

from app.config import PROFILE_CACHE_SIZE
from app.models.soliton import SolitonProfile

logger = logging.getLogger(__name__)

PROFILES: LRUCache = LRUCache(maxsize=PROFILE_CACHE_SIZE)
_LOCK = threading.Lock()


def get_or_build(key: Hashable, build: Callable[[], SolitonProfile]) -> SolitonProfile:
    with _LOCK:
        cached = PROFILES.get(key)
    if cached is not None:
        logger.debug("Profile cache hit: %s", key)
        return cached
    profile = build()
    with _LOCK:
        PROFILES[key] = profile
    return profile


def clear() -> None:
    with _LOCK:
        PROFILES.clear()
