"""Exact arithmetic in the quadratic field Q(sqrt 2).

Numbers are stored as ``a + b*sqrt(2)`` with exact rational ``a, b``
(arbitrary-precision), which is closed under the ring operations and under
division.  Ordering is decided exactly by sign analysis of ``a`` and
``2 b^2 - a^2`` — no floating point is involved until an explicit
``float()`` conversion.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from math import sqrt

__all__ = ["Sqrt2Number", "ZERO", "ONE", "SQRT2", "INV_SQRT2"]

_Scalar = int | Fraction


@total_ordering
@dataclass(frozen=True)
class Sqrt2Number:
    """An exact element ``a + b*sqrt(2)`` of Q(sqrt 2)."""

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    # -- ring operations -----------------------------------------------------

    @staticmethod
    def _coerce(other: "Sqrt2Number | _Scalar") -> "Sqrt2Number | None":
        if isinstance(other, Sqrt2Number):
            return other
        if isinstance(other, (int, Fraction)):
            return Sqrt2Number(Fraction(other))
        return None

    def __add__(self, other: "Sqrt2Number | _Scalar") -> "Sqrt2Number":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Sqrt2Number(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self) -> "Sqrt2Number":
        return Sqrt2Number(-self.a, -self.b)

    def __sub__(self, other: "Sqrt2Number | _Scalar") -> "Sqrt2Number":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Sqrt2Number(self.a - o.a, self.b - o.b)

    def __rsub__(self, other: "Sqrt2Number | _Scalar") -> "Sqrt2Number":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other: "Sqrt2Number | _Scalar") -> "Sqrt2Number":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Sqrt2Number(
            self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a
        )

    __rmul__ = __mul__

    def inverse(self) -> "Sqrt2Number":
        norm = self.a * self.a - 2 * self.b * self.b
        if norm == 0:
            raise ZeroDivisionError("inverse of zero in Q(sqrt 2)")
        return Sqrt2Number(self.a / norm, -self.b / norm)

    def __truediv__(self, other: "Sqrt2Number | _Scalar") -> "Sqrt2Number":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other: "Sqrt2Number | _Scalar") -> "Sqrt2Number":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    # -- order and conversion --------------------------------------------------

    def sign(self) -> int:
        """Exact sign (-1, 0, +1) of ``a + b*sqrt(2)``."""
        if self.a == 0 and self.b == 0:
            return 0
        if self.a >= 0 and self.b >= 0:
            return 1
        if self.a <= 0 and self.b <= 0:
            return -1
        # Mixed signs: compare a^2 with 2 b^2 (equality impossible since
        # sqrt(2) is irrational and (a, b) != (0, 0)).
        if self.a > 0:  # b < 0
            return 1 if self.a * self.a > 2 * self.b * self.b else -1
        return 1 if 2 * self.b * self.b > self.a * self.a else -1

    def __eq__(self, other: object) -> bool:
        o = self._coerce(other) if isinstance(other, (Sqrt2Number, int, Fraction)) else None
        if o is None:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __lt__(self, other: "Sqrt2Number | _Scalar") -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() < 0

    def __hash__(self) -> int:
        return hash((self.a, self.b))

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * sqrt(2.0)

    def __repr__(self) -> str:
        return f"({self.a} + {self.b}*sqrt2)"


ZERO = Sqrt2Number()
ONE = Sqrt2Number(Fraction(1))
SQRT2 = Sqrt2Number(Fraction(0), Fraction(1))
INV_SQRT2 = Sqrt2Number(Fraction(0), Fraction(1, 2))
