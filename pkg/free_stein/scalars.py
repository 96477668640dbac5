"""Exact complex coefficients with rational real and imaginary parts."""
from fractions import Fraction
from numbers import Rational
from typing import Union

Scalar = Union["QQi", int, Fraction, float, complex, str]


class QQi:
    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, value: Scalar) -> "QQi":
        if isinstance(value, QQi):
            return value
        if isinstance(value, (int, Rational)):
            return cls(value)
        if isinstance(value, float):
            return cls(Fraction(value))
        if isinstance(value, complex):
            return cls.from_complex(value)
        if isinstance(value, str):
            return cls(Fraction(value))
        raise TypeError(f"cannot use {type(value).__name__} as a coefficient")

    @classmethod
    def from_complex(cls, z: complex) -> "QQi":
        # Fraction(float) is exact, so floats round-trip bit for bit
        return cls(Fraction(float(z.real)), Fraction(float(z.imag)))

    def conjugate(self) -> "QQi":
        return QQi(self.re, -self.im)

    def __add__(self, other):
        other = _lift(other)
        if other is NotImplemented:
            return other
        return QQi(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return QQi(-self.re, -self.im)

    def __sub__(self, other):
        other = _lift(other)
        if other is NotImplemented:
            return other
        return QQi(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _lift(other)
        if other is NotImplemented:
            return other
        return QQi(self.re * other.re - self.im * other.im,
                   self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _lift(other)
        if other is NotImplemented:
            return other
        norm = other.re * other.re + other.im * other.im
        if norm == 0:
            raise ZeroDivisionError("division by an exact zero coefficient")
        num = self * other.conjugate()
        return QQi(num.re / norm, num.im / norm)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        other = _lift(other)
        if other is NotImplemented:
            return False
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def to_pair(self) -> list[str]:
        return [str(self.re), str(self.im)]

    @classmethod
    def from_pair(cls, pair) -> "QQi":
        re, im = pair
        return cls(Fraction(re), Fraction(im))

    def __repr__(self):
        if not self.im:
            return f"QQi({self.re})"
        return f"QQi({self.re}, {self.im})"


ZERO = QQi(0)
ONE = QQi(1)
HALF = QQi(Fraction(1, 2))


def _lift(value):
    if isinstance(value, QQi):
        return value
    try:
        return QQi.coerce(value)
    except TypeError:
        return NotImplemented
