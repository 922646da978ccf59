"""
Exact half-integers, stored as doubled integers.

Gromov products and delta estimates live in (1/2)Z; keeping them as
`twice` avoids any floating point in geometric comparisons.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering
from typing import Union

Number = Union["HalfInt", int]


@total_ordering
@dataclass(frozen=True, slots=True)
class HalfInt:
    twice: int

    @classmethod
    def of(cls, value: Union[HalfInt, int, float, str]) -> HalfInt:
        """Coerce ints, halves given as floats (2.5) or strings ("5/2", "2.5")"""
        if isinstance(value, HalfInt):
            return value
        if isinstance(value, int):
            return cls(2 * value)
        if isinstance(value, str):
            if "/" in value:
                num, den = value.split("/")
                if int(den) != 2:
                    raise ValueError(f"Not a half-integer: {value}")
                return cls(int(num))
            value = float(value)
        doubled = value * 2
        if doubled != math.floor(doubled):
            raise ValueError(f"Not a half-integer: {value}")
        return cls(int(doubled))

    @staticmethod
    def _twice(other: Number) -> int:
        if isinstance(other, HalfInt):
            return other.twice
        if isinstance(other, int):
            return 2 * other
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other: Number) -> HalfInt:
        return HalfInt(self.twice + self._twice(other))

    __radd__ = __add__

    def __sub__(self, other: Number) -> HalfInt:
        return HalfInt(self.twice - self._twice(other))

    def __rsub__(self, other: Number) -> HalfInt:
        return HalfInt(self._twice(other) - self.twice)

    def __neg__(self) -> HalfInt:
        return HalfInt(-self.twice)

    def __mul__(self, k: int) -> HalfInt:
        return HalfInt(self.twice * k)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (HalfInt, int)):
            return self.twice == self._twice(other)
        if isinstance(other, float):
            return self.twice == other * 2
        return NotImplemented

    def __hash__(self) -> int:
        # equal ints and floats must land in the same bucket
        return hash(self.twice / 2)

    def __lt__(self, other: Number) -> bool:
        if isinstance(other, float):
            return self.twice < other * 2
        return self.twice < self._twice(other)

    def __float__(self) -> float:
        return self.twice / 2

    def ceil(self) -> int:
        return -((-self.twice) // 2)

    def floor(self) -> int:
        return self.twice // 2

    def __str__(self) -> str:
        if self.twice % 2 == 0:
            return str(self.twice // 2)
        return f"{self.twice / 2:.1f}"

    def __repr__(self) -> str:
        return f"HalfInt({self})"


ZERO = HalfInt(0)
