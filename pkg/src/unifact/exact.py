"""Exact Gaussian-rational scalars.

Coefficients of the symbolic kernels and the exact matrix backend live in
Q(i).  Purely real values are kept as ``int``/``Fraction`` wherever
possible; :func:`normalize` collapses an :class:`ExactComplex` with zero
imaginary part back to a rational so the common integer case stays fast.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Union

Scalar = Union[int, Fraction, "ExactComplex"]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        # floats are only accepted when they are exactly representable values
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class ExactComplex:
    """re + i*im with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _frac(re)
        self.im = _frac(im)

    @classmethod
    def coerce(cls, x) -> "ExactComplex":
        if isinstance(x, ExactComplex):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        return cls(x, 0)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            return ExactComplex(self.re + other, self.im)
        o = ExactComplex.coerce(other)
        return ExactComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return ExactComplex(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-ExactComplex.coerce(other))

    def __rsub__(self, other):
        return ExactComplex.coerce(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return ExactComplex(self.re * other, self.im * other)
        o = ExactComplex.coerce(other)
        return ExactComplex(self.re * o.re - self.im * o.im,
                            self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def conjugate(self) -> "ExactComplex":
        return ExactComplex(self.re, -self.im)

    def __truediv__(self, other):
        o = ExactComplex.coerce(other)
        n = o.abs2()
        if n == 0:
            raise ZeroDivisionError("division by exact zero")
        num = self * o.conjugate()
        return ExactComplex(num.re / n, num.im / n)

    def __rtruediv__(self, other):
        return ExactComplex.coerce(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("integer powers only")
        if k < 0:
            return ExactComplex(1) / (self ** (-k))
        out, base = ExactComplex(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # comparison / conversion ---------------------------------------------
    def __eq__(self, other):
        try:
            o = ExactComplex.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if self.im == 0:
            return f"{self.re}"
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"

    def to_json(self) -> list[int]:
        return [self.re.numerator, self.re.denominator,
                self.im.numerator, self.im.denominator]

    @classmethod
    def from_json(cls, data) -> "ExactComplex":
        if len(data) == 2:
            return cls(Fraction(data[0], data[1]), 0)
        if len(data) != 4:
            raise ValueError("exact coefficient must be [num, den] or [num, den, num, den]")
        return cls(Fraction(data[0], data[1]), Fraction(data[2], data[3]))


def normalize(x):
    """Collapse to the cheapest exact representation (int < Fraction < ExactComplex)."""
    if isinstance(x, ExactComplex):
        if x.im != 0:
            return x
        x = x.re
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x.numerator)
    return x


def exact(x):
    """Convert ints, Fractions, exactly-representable floats and complex numbers."""
    if isinstance(x, (int, Fraction)):
        return normalize(x)
    if isinstance(x, (float, complex, ExactComplex)):
        return normalize(ExactComplex.coerce(x))
    raise TypeError(f"cannot make {type(x).__name__} exact")


def to_json_coef(x) -> list[int]:
    return ExactComplex.coerce(x).to_json()


def _isqrt_exact(n: int) -> int | None:
    if n < 0:
        return None
    from math import isqrt
    r = isqrt(n)
    return r if r * r == n else None


def exact_sqrt_abs(x) -> Fraction:
    """Return sqrt(|x|) exactly, i.e. (re^2 + im^2)^(1/4).

    Raises ValueError when the result is irrational.
    """
    n2 = ExactComplex.coerce(x).abs2()
    num = _isqrt_exact(n2.numerator)
    den = _isqrt_exact(n2.denominator)
    if num is None or den is None:
        raise ValueError(f"|{x}| is not a rational square")
    num2 = _isqrt_exact(num)
    den2 = _isqrt_exact(den)
    if num2 is None or den2 is None:
        raise ValueError(f"sqrt|{x}| is irrational")
    return Fraction(num2, den2)
