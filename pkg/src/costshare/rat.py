"""Exact extended rationals: ``fractions.Fraction`` plus a +inf sentinel."""

from __future__ import annotations

import math
from decimal import Decimal, localcontext
from fractions import Fraction
from numbers import Rational


class _Infinity:
    """Positive infinity that only combines with rationals in well-defined ways."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())

    def __hash__(self):
        return hash("costshare.INF")

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __add__(self, other):
        if other is self or isinstance(other, Rational):
            return self
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if other is self:
            raise ArithmeticError("inf - inf is undefined")
        if isinstance(other, Rational):
            return self
        return NotImplemented

    def __rsub__(self, other):
        raise ArithmeticError("finite - inf is not representable")

    def __mul__(self, other):
        if other is self:
            return self
        if isinstance(other, Rational):
            if other > 0:
                return self
            raise ArithmeticError(f"inf * {other} is undefined")
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if other is self:
            raise ArithmeticError("inf / inf is undefined")
        if isinstance(other, Rational) and other > 0:
            return self
        raise ArithmeticError(f"inf / {other} is undefined")

    def __rtruediv__(self, other):
        if isinstance(other, Rational):
            return Fraction(0)
        return NotImplemented


INF = _Infinity()


def is_inf(x) -> bool:
    return x is INF


def as_rat(x):
    """Coerce int/str/Fraction (or INF) to an exact value. Floats are rejected."""
    if x is INF:
        return x
    if isinstance(x, float):
        raise TypeError("floats are not exact; pass a Fraction or a 'p/q' string")
    if isinstance(x, str):
        return parse_rat(x)
    return Fraction(x)


def parse_rat(s: str):
    s = s.strip()
    if s in ("inf", "+inf"):
        return INF
    return Fraction(s)


def format_rat(x, always_ratio: bool = False) -> str:
    if x is INF:
        return "inf"
    x = Fraction(x)
    if x.denominator == 1 and not always_ratio:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def to_decimal_str(x, places: int = 12) -> str:
    """Decimal rendering rounded half-even to ``places`` fractional digits."""
    if x is INF:
        return "inf"
    x = Fraction(x)
    with localcontext() as ctx:
        ctx.prec = places + len(str(abs(x.numerator) // x.denominator)) + 10
        d = Decimal(x.numerator) / Decimal(x.denominator)
        return str(d.quantize(Decimal(1).scaleb(-places)))


def ceil_to_grid(x: Fraction, unit: Fraction) -> Fraction:
    """Smallest multiple of ``unit`` that is >= x."""
    return math.ceil(Fraction(x) / unit) * unit


def rational_sqrt(n, digits: int) -> Fraction:
    """Rational q with |q - sqrt(n)| < 10**-digits (exact when n is a perfect square)."""
    n = Fraction(n)
    if n < 0:
        raise ValueError("negative radicand")
    num, den = n.numerator, n.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    scale = 10 ** (digits + 1)
    # floor(sqrt(n) * scale) computed in integers
    root = math.isqrt(num * scale * scale // den)
    return Fraction(root, scale)
