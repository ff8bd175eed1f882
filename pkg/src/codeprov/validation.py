"""Input validation helpers shared across estimators and pipeline functions."""

from __future__ import annotations

from decimal import Decimal
from typing import Iterable, Sequence

from .records import DataError


def check_unit_interval(name: str, value: float | Decimal, *, low_open: bool = False) -> None:
    """Require 0 <= value <= 1 (0 < value when ``low_open``)."""
    if low_open and not 0 < value <= 1:
        raise DataError(f"{name} must be in (0, 1], got {value}")
    if not low_open and not 0 <= value <= 1:
        raise DataError(f"{name} must be in [0, 1], got {value}")


def check_positive(name: str, value) -> None:
    if not value > 0:
        raise DataError(f"{name} must be positive, got {value}")


def check_non_empty(name: str, seq: Sequence | Iterable) -> list:
    items = list(seq)
    if not items:
        raise DataError(f"{name} must be non-empty")
    return items


def to_decimal(value: float | int | str | Decimal) -> Decimal:
    """Convert a score or weight to Decimal.

    Floats go through their shortest round-trip representation, so 0.6
    becomes Decimal("0.6") rather than the raw binary expansion.
    """
    if isinstance(value, Decimal):
        return value
    if isinstance(value, float):
        return Decimal(repr(value))
    return Decimal(value)
