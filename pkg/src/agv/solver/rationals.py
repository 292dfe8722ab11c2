"""Exact rational arithmetic with infinitesimals.

Uses gmpy2.mpq when available (noticeably faster), falling back to
fractions.Fraction.  DeltaRat is the standard q + k*eps extension used by
the simplex core to represent strict bounds exactly.
"""

from __future__ import annotations

try:
    from gmpy2 import mpq as Q  # type: ignore
except ImportError:  # pragma: no cover - gmpy2 is normally present
    from fractions import Fraction as Q

ZERO = Q(0)
ONE = Q(1)


def qfloor(x) -> int:
    return int(x.numerator // x.denominator)


def qceil(x) -> int:
    return -int((-x).numerator // (-x).denominator)


def is_int(x) -> bool:
    return x.denominator == 1


def qgcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def qlcm(a: int, b: int) -> int:
    return abs(a * b) // qgcd(a, b) if a and b else 0


class DeltaRat:
    """Rational plus a symbolic infinitesimal: value = num + eps * delta."""

    __slots__ = ("num", "delta")

    def __init__(self, num, delta=ZERO):
        self.num = Q(num)
        self.delta = Q(delta)

    def __add__(self, other: "DeltaRat") -> "DeltaRat":
        return DeltaRat(self.num + other.num, self.delta + other.delta)

    def __sub__(self, other: "DeltaRat") -> "DeltaRat":
        return DeltaRat(self.num - other.num, self.delta - other.delta)

    def scale(self, k) -> "DeltaRat":
        return DeltaRat(self.num * k, self.delta * k)

    def __eq__(self, other) -> bool:
        return self.num == other.num and self.delta == other.delta

    def __lt__(self, other) -> bool:
        return (self.num, self.delta) < (other.num, other.delta)

    def __le__(self, other) -> bool:
        return (self.num, self.delta) <= (other.num, other.delta)

    def __gt__(self, other) -> bool:
        return (self.num, self.delta) > (other.num, other.delta)

    def __ge__(self, other) -> bool:
        return (self.num, self.delta) >= (other.num, other.delta)

    def __hash__(self):
        return hash((self.num, self.delta))

    def concretize(self, eps):
        return self.num + self.delta * eps

    def __repr__(self):
        if self.delta == 0:
            return f"{self.num}"
        return f"{self.num}{'+' if self.delta > 0 else ''}{self.delta}e"


DR_ZERO = DeltaRat(ZERO)
