"""Symbolic cardinals with a three-valued comparison.

Cardinals are finite numbers, alephs or the continuum. The continuum is kept
apart from the alephs: its position relative to ``Aleph(k)`` for ``k >= 1``
is independent of ZFC, so those comparisons answer ``UNKNOWN`` instead of
assuming the continuum hypothesis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Annotated, Any, Union

from pydantic import PlainSerializer, PlainValidator

from errors import IncomparableCardinals, InputError
from log_utils import LogCategory, log_debug

FINITE = "finite"
ALEPH = "aleph"
CONTINUUM_KIND = "continuum"


class Order(Enum):
    """Outcome of comparing two cardinals."""
    LESS = "Less"
    EQUAL = "Equal"
    GREATER = "Greater"
    UNKNOWN = "Unknown"

    def flipped(self) -> "Order":
        if self is Order.LESS:
            return Order.GREATER
        if self is Order.GREATER:
            return Order.LESS
        return self


@dataclass(frozen=True)
class Cardinal:
    kind: str
    index: int = 0

    def __post_init__(self) -> None:
        if self.kind not in (FINITE, ALEPH, CONTINUUM_KIND):
            raise InputError(f"Unknown cardinal kind: {self.kind!r}")
        if self.index < 0:
            raise InputError(f"Cardinal index must be nonnegative, got {self.index}")

    @property
    def is_finite(self) -> bool:
        return self.kind == FINITE

    @property
    def is_infinite(self) -> bool:
        return not self.is_finite

    @property
    def is_countable(self) -> bool:
        """Finite or aleph-null."""
        return self.is_finite or (self.kind == ALEPH and self.index == 0)

    def to_json(self) -> Union[str, dict]:
        if self.kind == CONTINUUM_KIND:
            return CONTINUUM_KIND
        return {self.kind: self.index}

    @classmethod
    def from_json(cls, payload: Any) -> "Cardinal":
        if isinstance(payload, Cardinal):
            return payload
        if payload == CONTINUUM_KIND:
            return CONTINUUM
        if isinstance(payload, dict) and len(payload) == 1:
            (kind, index), = payload.items()
            if kind in (FINITE, ALEPH) and isinstance(index, int) and not isinstance(index, bool):
                return cls(kind, index)
        raise InputError(f"Not a cardinal document: {payload!r}")

    def __str__(self) -> str:
        if self.kind == FINITE:
            return str(self.index)
        if self.kind == ALEPH:
            return f"aleph_{self.index}"
        return "continuum"


def Finite(n: int) -> Cardinal:
    return Cardinal(FINITE, n)


def Aleph(k: int) -> Cardinal:
    return Cardinal(ALEPH, k)


CONTINUUM = Cardinal(CONTINUUM_KIND)
ALEPH_0 = Aleph(0)


def parse_cardinal(value: Any) -> Cardinal:
    """Cardinal from command-line text (``7``, ``aleph_1``, ``continuum``) or a JSON document."""
    if isinstance(value, Cardinal):
        return value
    if isinstance(value, int) and not isinstance(value, bool) and value >= 0:
        return Finite(value)
    if isinstance(value, str):
        text = value.strip().lower()
        if text.isdigit():
            return Finite(int(text))
        if text in (CONTINUUM_KIND, "c", "2^aleph_0"):
            return CONTINUUM
        suffix = text.removeprefix("aleph").lstrip("_")
        if text.startswith("aleph") and suffix.isdigit():
            return Aleph(int(suffix))
        if text.startswith("{"):
            try:
                value = json.loads(text)
            except ValueError as exc:
                raise InputError(f"Not a cardinal document: {value!r}") from exc
    return Cardinal.from_json(value)


def compare(a: Cardinal, b: Cardinal) -> Order:
    """Compare two cardinals; only continuum versus ``Aleph(k>=1)`` is undecided."""
    if a.kind == b.kind:
        if a.index < b.index:
            return Order.LESS
        if a.index > b.index:
            return Order.GREATER
        return Order.EQUAL
    if a.kind == FINITE or b.kind == FINITE:
        return Order.LESS if a.kind == FINITE else Order.GREATER
    # one aleph, one continuum
    aleph = a if a.kind == ALEPH else b
    if aleph.index == 0:
        return Order.LESS if a is aleph else Order.GREATER
    return Order.UNKNOWN


def max_cardinal(a: Cardinal, b: Cardinal) -> Cardinal:
    """The larger of two cardinals; raises when their order is undecided."""
    order = compare(a, b)
    if order is Order.UNKNOWN:
        log_debug(f"max({a}, {b}) is undecided", LogCategory.CARDINAL)
        raise IncomparableCardinals(f"Cannot order {a} and {b} without the continuum hypothesis")
    return a if order in (Order.GREATER, Order.EQUAL) else b


def leq(a: Cardinal, b: Cardinal) -> bool:
    """True only when ``a <= b`` is decided."""
    return compare(a, b) in (Order.LESS, Order.EQUAL)


CardinalField = Annotated[
    Cardinal,
    PlainValidator(Cardinal.from_json),
    PlainSerializer(lambda c: c.to_json()),
]
