"""Exact complex numbers with rational real and imaginary parts."""

from __future__ import annotations

import numbers
from fractions import Fraction

__all__ = ["CRational", "as_crational", "is_exact"]


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, float):
        return Fraction(value)
    raise TypeError(f"cannot convert {value!r} to an exact rational")


class CRational:
    """Gaussian rational ``re + i*im`` with :class:`fractions.Fraction` parts.

    Instances are immutable and hashable; arithmetic with ints, Fractions and
    other CRationals stays exact. Mixing with ``complex``/``float`` falls back to
    Python complex numbers.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _frac(re))
        object.__setattr__(self, "im", _frac(im))

    def __setattr__(self, name, value):
        raise AttributeError("CRational is immutable")

    # -- construction helpers -------------------------------------------------
    @classmethod
    def parse(cls, text: str) -> "CRational":
        """Parse ``"p/q"`` style rationals; ``re``/``im`` JSON fields use this."""
        return cls(Fraction(text))

    # -- predicates -------------------------------------------------------------
    def __bool__(self):
        return bool(self.re) or bool(self.im)

    @property
    def is_real(self) -> bool:
        return self.im == 0

    # -- arithmetic -------------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, CRational):
            return other
        if isinstance(other, (numbers.Rational,)):
            return CRational(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) + other
        return CRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return CRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) - other
        return CRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return other - complex(self)
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) * other
        return CRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) / other
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("CRational division by zero")
        num = self * o.conjugate()
        return CRational(num.re / den, num.im / den)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return other / complex(self)
        return o / self

    def __pow__(self, k):
        if not isinstance(k, numbers.Integral):
            return complex(self) ** k
        if k < 0:
            return CRational(1) / (self ** (-k))
        result, base = CRational(1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate(self) -> "CRational":
        return CRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    # -- comparison / conversion -----------------------------------------------
    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (complex, float)):
                return complex(self) == other
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"CRational({str(self.re)!r}, {str(self.im)!r})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        im = "" if abs(self.im) == 1 else str(abs(self.im))
        if self.re == 0:
            return f"{'-' if self.im < 0 else ''}{im}i"
        return f"{self.re}{'-' if self.im < 0 else '+'}{im}i"


I = CRational(0, 1)


def as_crational(value) -> CRational:
    """Convert an exact number (int, Fraction, rational string, CRational) to CRational."""
    if isinstance(value, CRational):
        return value
    if isinstance(value, complex):
        return CRational(Fraction(value.real), Fraction(value.imag))
    return CRational(_frac(value))


def is_exact(value) -> bool:
    return isinstance(value, (CRational, numbers.Rational))
