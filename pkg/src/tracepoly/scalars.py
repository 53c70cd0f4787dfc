"""Exact scalar arithmetic: rationals and Gaussian (complex) rationals.

All arithmetic in this package runs over gmpy2.mpq, which keeps every
value in lowest terms with a positive denominator.  Floats never enter
exact code paths; the only float conversions live in floatdiag.
"""
from __future__ import annotations

import decimal
import re

from gmpy2 import mpq

Rational = mpq

_RATIONAL_RE = re.compile(r"^[+-]?\d+(?:/\d+)?$")

ZERO = mpq(0)
ONE = mpq(1)


def rational(value) -> mpq:
    """Coerce an int, mpq, or 'num/den' string to mpq.

    Floats are rejected: a float argument is almost always an accident
    that silently injects a binary approximation into an exact pipeline.
    """
    if isinstance(value, mpq):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational value")
    if isinstance(value, int):
        return mpq(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot coerce {type(value).__name__} to a rational")


def parse_rational(text: str) -> mpq:
    """Parse 'num' or 'num/den' with validation.

    Stricter than mpq's own parser: decimal forms like '1.5' are
    rejected so serialized data stays in one canonical shape.
    """
    s = text.strip()
    if not _RATIONAL_RE.match(s):
        raise ValueError(f"malformed rational {text!r}; expected 'num' or 'num/den'")
    if "/" in s:
        num, den = s.split("/")
        if int(den) == 0:
            raise ValueError(f"zero denominator in rational {text!r}")
        return mpq(int(num), int(den))
    return mpq(int(s))


def format_rational(value) -> str:
    """Render an mpq as 'num/den', always including the denominator."""
    q = rational(value)
    return f"{q.numerator}/{q.denominator}"


def approx_decimal(value, digits: int = 12) -> str:
    """Decimal approximation with `digits` significant digits, half-even.

    For display only; callers must label the result as approximate.
    """
    q = rational(value)
    with decimal.localcontext() as ctx:
        ctx.prec = digits
        ctx.rounding = decimal.ROUND_HALF_EVEN
        d = decimal.Decimal(int(q.numerator)) / decimal.Decimal(int(q.denominator))
    return str(d)


class GaussianScalar:
    """Complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", rational(re))
        object.__setattr__(self, "im", rational(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianScalar is immutable")

    @property
    def is_real(self) -> bool:
        return not self.im

    def conjugate(self) -> "GaussianScalar":
        return GaussianScalar(self.re, -self.im)

    def abs2(self) -> mpq:
        """Squared modulus, an exact rational."""
        return self.re * self.re + self.im * self.im

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __eq__(self, other) -> bool:
        if isinstance(other, GaussianScalar):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, mpq)):
            return not self.im and self.re == other
        return NotImplemented

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __add__(self, other) -> "GaussianScalar":
        other = gaussian(other)
        return GaussianScalar(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other) -> "GaussianScalar":
        other = gaussian(other)
        return GaussianScalar(self.re - other.re, self.im - other.im)

    def __rsub__(self, other) -> "GaussianScalar":
        return gaussian(other).__sub__(self)

    def __neg__(self) -> "GaussianScalar":
        return GaussianScalar(-self.re, -self.im)

    def __mul__(self, other) -> "GaussianScalar":
        other = gaussian(other)
        return GaussianScalar(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "GaussianScalar":
        other = gaussian(other)
        d = other.abs2()
        if not d:
            raise ZeroDivisionError("division by zero GaussianScalar")
        return GaussianScalar(
            (self.re * other.re + self.im * other.im) / d,
            (self.im * other.re - self.re * other.im) / d,
        )

    def __rtruediv__(self, other) -> "GaussianScalar":
        return gaussian(other).__truediv__(self)

    def __pow__(self, exponent: int) -> "GaussianScalar":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("exponent must be a nonnegative int")
        result = G_ONE
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __str__(self) -> str:
        if not self.im:
            return format_rational(self.re)
        return f"{format_rational(self.re)}{'+' if self.im >= 0 else '-'}{format_rational(abs(self.im))}i"

    def __repr__(self) -> str:
        return f"GaussianScalar({self.re!r}, {self.im!r})"


def gaussian(value) -> GaussianScalar:
    """Coerce an int, mpq, string, or GaussianScalar to GaussianScalar."""
    if isinstance(value, GaussianScalar):
        return value
    return GaussianScalar(rational(value), ZERO)


G_ZERO = GaussianScalar(0, 0)
G_ONE = GaussianScalar(1, 0)
G_I = GaussianScalar(0, 1)
