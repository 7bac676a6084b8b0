"""Exact arithmetic in Q(ζ₃), with ζ₃² + ζ₃ + 1 = 0."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to Q")


@dataclass(frozen=True)
class CyclotomicNumber:
    """``x + y·ζ₃`` with rational ``x, y``."""

    x: Fraction
    y: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "x", _as_fraction(self.x))
        object.__setattr__(self, "y", _as_fraction(self.y))

    @classmethod
    def coerce(cls, v) -> "CyclotomicNumber":
        return v if isinstance(v, CyclotomicNumber) else cls(_as_fraction(v))

    def __add__(self, other):
        try:
            o = CyclotomicNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return CyclotomicNumber(self.x + o.x, self.y + o.y)

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicNumber(-self.x, -self.y)

    def __sub__(self, other):
        try:
            o = CyclotomicNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return CyclotomicNumber(self.x - o.x, self.y - o.y)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = CyclotomicNumber.coerce(other)
        except TypeError:
            return NotImplemented
        a, b, c, d = self.x, self.y, o.x, o.y
        # ζ² = −1 − ζ
        return CyclotomicNumber(a * c - b * d, a * d + b * c - b * d)

    __rmul__ = __mul__

    def conjugate(self) -> "CyclotomicNumber":
        """Galois conjugate ζ ↦ ζ² (complex conjugation)."""
        return CyclotomicNumber(self.x - self.y, -self.y)

    def norm(self) -> Fraction:
        return self.x * self.x - self.x * self.y + self.y * self.y

    def inverse(self) -> "CyclotomicNumber":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(ζ3)")
        c = self.conjugate()
        return CyclotomicNumber(c.x / n, c.y / n)

    def __truediv__(self, other):
        try:
            o = CyclotomicNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return CyclotomicNumber.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        try:
            o = CyclotomicNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return self.x == o.x and self.y == o.y

    def __hash__(self):
        return hash((self.x, self.y)) if self.y else hash(self.x)

    def __bool__(self):
        return bool(self.x or self.y)

    def __complex__(self):
        # ζ₃ = −1/2 + i·√3/2
        return complex(float(self.x) - float(self.y) / 2, float(self.y) * 3 ** 0.5 / 2)

    def __abs__(self) -> float:
        return abs(complex(self))

    def __repr__(self):
        if not self.y:
            return f"{self.x}"
        return f"({self.x} + {self.y}·ζ3)"


ONE = CyclotomicNumber(Fraction(1))
ZETA3 = CyclotomicNumber(Fraction(0), Fraction(1))
