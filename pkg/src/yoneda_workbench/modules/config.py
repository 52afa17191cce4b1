"""
Runtime configuration read from the environment
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, replace
from functools import lru_cache

from dotenv import load_dotenv

from .errors import WorkbenchError

logger = logging.getLogger(__name__)


def _env_bool(name: str, default: bool) -> bool:
    value = os.getenv(name)
    if value is None:
        return default
    return value.strip().lower() in ("1", "true", "yes", "on")


@dataclass(frozen=True)
class Settings:
    """Tunables for windows, stabilization and debugging.

    Every field has an environment variable with the `YW_` prefix; see `.env.example`.
    """

    window_lo: int = -4
    window_hi: int = 4
    stabilization_count: int = 3
    max_stage: int = 10
    gorenstein_tail: int = 3
    sparse_density: float = 0.15
    debug_checks: bool = False
    random_samples: int = 100
    log_level: str = "INFO"

    @classmethod
    def from_env(cls) -> Settings:
        """Build settings from `YW_*` variables, falling back to defaults"""
        load_dotenv()
        try:
            return cls(
                window_lo=int(os.getenv("YW_WINDOW_LO", "-4")),
                window_hi=int(os.getenv("YW_WINDOW_HI", "4")),
                stabilization_count=int(os.getenv("YW_STABILIZATION_COUNT", "3")),
                max_stage=int(os.getenv("YW_MAX_STAGE", "10")),
                gorenstein_tail=int(os.getenv("YW_GORENSTEIN_TAIL", "3")),
                sparse_density=float(os.getenv("YW_SPARSE_DENSITY", "0.15")),
                debug_checks=_env_bool("YW_DEBUG_CHECKS", False),
                random_samples=int(os.getenv("YW_RANDOM_SAMPLES", "100")),
                log_level=os.getenv("YW_LOG_LEVEL", "INFO").upper(),
            )
        except ValueError as e:
            raise WorkbenchError(f"Invalid workbench setting: {e}") from e


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Process-wide settings, read once"""
    settings = Settings.from_env()
    logger.debug(f"Loaded settings: {settings}")
    return settings


@dataclass(frozen=True)
class Window:
    """Truncation parameters of a windowed computation.

    Attributes:
        lo: Lowest cohomological degree reported.
        hi: Highest cohomological degree reported.
        stabilization_count: Consecutive isomorphic stages required before a colimit is declared stable.
        max_stage: Last stage tried before giving up on stabilization.
        bar_cap: Explicit bar filtration cap; derived from the window when None.
    """

    lo: int = -4
    hi: int = 4
    stabilization_count: int = 3
    max_stage: int = 10
    bar_cap: int | None = None

    def __post_init__(self):
        if self.lo > self.hi:
            raise WorkbenchError(f"Empty window {self.lo}..{self.hi}", (self.lo, self.hi))
        if self.stabilization_count < 1:
            raise WorkbenchError("Stabilization count must be at least 1", self.stabilization_count)
        if self.max_stage < 0:
            raise WorkbenchError("Maximum stage must be non-negative", self.max_stage)
        if self.bar_cap is not None and self.bar_cap < 0:
            raise WorkbenchError("Bar cap must be non-negative", self.bar_cap)

    @classmethod
    def from_settings(cls, settings: Settings | None = None) -> Window:
        settings = settings or get_settings()
        return cls(
            lo=settings.window_lo,
            hi=settings.window_hi,
            stabilization_count=settings.stabilization_count,
            max_stage=settings.max_stage,
        )

    @property
    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    def with_range(self, lo: int, hi: int) -> Window:
        return replace(self, lo=lo, hi=hi)


def parse_range(text: str) -> tuple[int, int]:
    """Parse `lo..hi` (either bound may be negative)"""
    try:
        lo_text, hi_text = text.split("..")
        lo, hi = int(lo_text), int(hi_text)
    except ValueError as e:
        raise WorkbenchError(f"Expected a range of the form lo..hi, got '{text}'") from e
    if lo > hi:
        raise WorkbenchError(f"Empty range {text}", text)
    return lo, hi
