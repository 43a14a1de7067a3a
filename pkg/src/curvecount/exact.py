"""Exact rational arithmetic for very large numerators.

Truncated Euler products over the closed points of P^1 produce rationals
whose numerators and denominators run to millions of bits once the
point-degree cutoff passes ~16.  ``BigRat`` wraps gmpy2 integers so that
products, powers and comparisons at that size stay fast; ``fractions.Fraction``
remains the type of choice for small exact values elsewhere in the package.

No value in this module is ever rounded.  Decimal renderings are a
presentation convenience and always accompany the exact rational.
"""

from __future__ import annotations

from fractions import Fraction

import gmpy2
from gmpy2 import mpz

__all__ = ["BigRat", "decimal_string", "rational_string"]


class BigRat:
    """An exact rational num/den held as gmpy2 integers, always reduced."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=1):
        num = mpz(num)
        den = mpz(den)
        if den == 0:
            raise ZeroDivisionError("BigRat with zero denominator")
        if den < 0:
            num, den = -num, -den
        g = gmpy2.gcd(num, den)
        if g > 1:
            num //= g
            den //= g
        self.num = num
        self.den = den

    @classmethod
    def from_fraction(cls, f: Fraction) -> "BigRat":
        return cls(f.numerator, f.denominator)

    def to_fraction(self) -> Fraction:
        """Convert to Fraction.  Only sensible for values of modest size."""
        return Fraction(int(self.num), int(self.den))

    @staticmethod
    def _coerce(other):
        if isinstance(other, BigRat):
            return other
        if isinstance(other, Fraction):
            return BigRat(other.numerator, other.denominator)
        if isinstance(other, (int, type(mpz(0)))):
            return BigRat(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return BigRat(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return BigRat(self.num * o.den - o.num * self.den, self.den * o.den)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return BigRat(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return BigRat(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k: int):
        if k < 0:
            return BigRat(self.den ** (-k), self.num ** (-k))
        return BigRat(self.num**k, self.den**k)

    def __neg__(self):
        return BigRat(-self.num, self.den)

    def __abs__(self):
        return BigRat(abs(self.num), self.den)

    def _cmp(self, other) -> int:
        o = self._coerce(other)
        if o is None:
            raise TypeError(f"cannot compare BigRat with {type(other)!r}")
        lhs = self.num * o.den
        rhs = o.num * self.den
        return (lhs > rhs) - (lhs < rhs)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __hash__(self):
        return hash((int(self.num), int(self.den)))

    def __bool__(self):
        return self.num != 0

    def __repr__(self):
        return f"BigRat({self.num}, {self.den})"

    def __str__(self):
        return rational_string(self)


def _num_digits10(x) -> int:
    """Exact number of decimal digits of |x| (0 has one digit)."""
    x = abs(mpz(x))
    if x == 0:
        return 1
    k = x.num_digits(10)  # may overestimate by one
    if x < mpz(10) ** (k - 1):
        k -= 1
    return k


def rational_string(x) -> str:
    """Serialize an exact rational as ``num/den`` (``num`` when den == 1)."""
    if isinstance(x, Fraction):
        num, den = x.numerator, x.denominator
    elif isinstance(x, BigRat):
        num, den = x.num, x.den
    elif isinstance(x, int):
        num, den = x, 1
    else:
        raise TypeError(f"not an exact rational: {type(x)!r}")
    if den == 1:
        return str(num)
    return f"{num}/{den}"


def decimal_string(x, sig: int = 12) -> str:
    """Render an exact rational to ``sig`` significant decimal digits.

    Rounding is half-away-from-zero on the last kept digit, so the output is
    a pure function of the exact value.  Uses positional notation for
    exponents in [-4, 15] and scientific notation otherwise.
    """
    if isinstance(x, Fraction):
        num, den = mpz(x.numerator), mpz(x.denominator)
    elif isinstance(x, BigRat):
        num, den = x.num, x.den
    elif isinstance(x, int):
        num, den = mpz(x), mpz(1)
    else:
        raise TypeError(f"not an exact rational: {type(x)!r}")
    if sig < 1:
        raise ValueError("need at least one significant digit")
    if num == 0:
        return "0"
    sign = "-" if num < 0 else ""
    num = abs(num)
    # exponent e with 10^e <= num/den < 10^(e+1)
    e = _num_digits10(num) - _num_digits10(den)
    if num * mpz(10) ** max(0, -e) < den * mpz(10) ** max(0, e):
        e -= 1
    # scaled integer with sig digits, rounded half away from zero
    shift = sig - 1 - e
    if shift >= 0:
        q, r = divmod(num * mpz(10) ** shift, den)
    else:
        q, r = divmod(num, den * mpz(10) ** (-shift))
    if 2 * r >= den * (mpz(10) ** max(0, -shift) if shift < 0 else 1):
        q += 1
    digits = q.digits(10)
    if len(digits) > sig:  # rounding carried over, e.g. 999.96 -> 1000.0
        e += 1
        digits = digits[:sig]
    digits = digits.ljust(sig, "0")
    # significant trailing zeros are kept: the rendering is a fixed-width
    # function of the exact value
    if -4 <= e <= 15:
        if e >= 0:
            intpart = digits[: e + 1].ljust(e + 1, "0")
            fracpart = digits[e + 1 :]
            return sign + intpart + ("." + fracpart if fracpart else "")
        return sign + "0." + "0" * (-e - 1) + digits
    mantissa = digits[0] + ("." + digits[1:] if digits[1:] else "")
    return f"{sign}{mantissa}e{e:+d}"
