from __future__ import annotations

import math

from classes.exceptions import InvalidParameter


def positive(name: str, value: float) -> float:
    """Check for a finite, strictly positive value."""
    if not math.isfinite(value) or value <= 0:
        raise InvalidParameter(name, value, "> 0")
    return float(value)


def non_negative(name: str, value: float) -> float:
    if not math.isfinite(value) or value < 0:
        raise InvalidParameter(name, value, ">= 0")
    return float(value)


def greater_than(name: str, value: float, bound: float) -> float:
    if not math.isfinite(value) or value <= bound:
        raise InvalidParameter(name, value, f"> {bound:g}")
    return float(value)


def at_least(name: str, value: float, bound: float) -> float:
    if not math.isfinite(value) or value < bound:
        raise InvalidParameter(name, value, f">= {bound:g}")
    return float(value)


def in_unit_interval(name: str, value: float) -> float:
    """Check for a value in the half open interval (0, 1]."""
    if not math.isfinite(value) or not 0 < value <= 1:
        raise InvalidParameter(name, value, "in (0, 1]")
    return float(value)


def power_of_two(name: str, value: int, *, minimum: int = 8) -> int:
    if value < minimum or value & (value - 1):
        raise InvalidParameter(name, value, f"a power of two >= {minimum}")
    return int(value)


def one_of(name: str, value: str, choices: tuple[str, ...]) -> str:
    if value not in choices:
        raise InvalidParameter(name, value, "one of " + ", ".join(choices))
    return value
