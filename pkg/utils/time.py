from __future__ import annotations

import time
from typing import Sequence

from dateutil.relativedelta import relativedelta

# relativedelta attribute, long name, short suffix
UNITS = (
    ("days", "day", "d"),
    ("hours", "hour", "h"),
    ("minutes", "minute", "m"),
    ("seconds", "second", "s"),
)


def _count(value: int, unit: str) -> str:
    return f"{value} {unit}" if abs(value) == 1 else f"{value} {unit}s"


def human_join(parts: Sequence[str], final: str = "and") -> str:
    if len(parts) <= 2:
        return f" {final} ".join(parts)
    return ", ".join(parts[:-1]) + f" {final} {parts[-1]}"


def human_duration(seconds: float, *, accuracy: None | int = 2, brief: bool = False) -> str:
    """Wall clock duration, e.g. `1 minute and 5 seconds` or `1m 5s`."""
    if seconds < 1:
        milliseconds = round(seconds * 1000)
        return f"{milliseconds}ms" if brief else _count(milliseconds, "millisecond")

    delta = relativedelta(seconds=round(seconds)).normalized()
    parts = []
    for attr, unit, short in UNITS:
        value = getattr(delta, attr)
        if value > 0:
            parts.append(f"{value}{short}" if brief else _count(value, unit))
    parts = parts[:accuracy]
    return " ".join(parts) if brief else human_join(parts)


class Stopwatch:
    """Measures the wall clock time of a `with` block."""

    __slots__ = ("started", "stopped")

    def __init__(self) -> None:
        self.started: float = time.perf_counter()
        self.stopped: None | float = None

    def __enter__(self) -> Stopwatch:
        self.started = time.perf_counter()
        self.stopped = None
        return self

    def __exit__(self, *exc: object) -> None:
        self.stopped = time.perf_counter()

    @property
    def elapsed(self) -> float:
        end = time.perf_counter() if self.stopped is None else self.stopped
        return end - self.started

    def __str__(self) -> str:
        return human_duration(self.elapsed)
