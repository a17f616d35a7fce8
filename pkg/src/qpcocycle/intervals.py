"""Certified comparisons between big integers and real powers.

Quantities such as ``q**zeta`` or ``exp(c/10 * q**gamma)`` are bracketed with
outward-rounded interval arithmetic (``mpmath.iv``).  A comparison is decided
only when the brackets separate; otherwise the working precision is doubled.
Algebraic ties (``32**(6/5) == 64``) never separate, so monomials with
rational exponents fall back to exact integer arithmetic when that is cheap.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from mpmath import iv
from mpmath.libmp import from_int, mpf_lt

from .errors import QPCocycleError

DEFAULT_PREC = 128
MAX_PREC = 1 << 16
EXACT_BIT_LIMIT = 200_000

_iv_lock = threading.RLock()


class IndeterminateComparison(QPCocycleError):
    """Interval brackets never separated up to the maximum precision."""


def as_fraction(x) -> Fraction:
    """Exact rational value of an int, Fraction, or float.

    Floats are read through their shortest repr, so ``1.2`` becomes ``6/5``.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Rational):
        return Fraction(int(x.numerator), int(x.denominator))
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def _iv_rational(x: Fraction):
    if x.denominator == 1:
        return iv.mpf(x.numerator)
    return iv.mpf(x.numerator) / iv.mpf(x.denominator)


@dataclass(frozen=True)
class Monomial:
    """The positive real ``coef * base**exponent``."""

    coef: Fraction
    base: Fraction
    exponent: Fraction

    def __post_init__(self):
        object.__setattr__(self, "coef", as_fraction(self.coef))
        object.__setattr__(self, "base", as_fraction(self.base))
        object.__setattr__(self, "exponent", as_fraction(self.exponent))
        if self.base <= 0 or self.coef < 0:
            raise ValueError("Monomial needs base > 0 and coef >= 0")

    def interval(self):
        b = _iv_rational(self.base)
        e = _iv_rational(self.exponent)
        return _iv_rational(self.coef) * iv.exp(iv.log(b) * e)

    def exact_cost_bits(self) -> int:
        e = self.exponent
        num, den = abs(e.numerator), e.denominator
        b = self.base
        size = max(b.numerator.bit_length(), b.denominator.bit_length(), 1)
        return num * size + den * 64

    def exact_power_parts(self):
        """Return (A, d) with ``self == A**(1/d)`` for rational A, or None."""
        e = self.exponent
        num, den = e.numerator, e.denominator
        if self.exact_cost_bits() > EXACT_BIT_LIMIT:
            return None
        return (self.coef ** den) * (self.base ** num), den


@dataclass(frozen=True)
class ExpOf:
    """The real ``exp(inner)`` for a nonnegative monomial ``inner``."""

    inner: Monomial

    def interval(self):
        return iv.exp(self.inner.interval())


def _interval(x):
    if isinstance(x, (Monomial, ExpOf)):
        return x.interval()
    return _iv_rational(as_fraction(x))


def _exact_lt(a, b):
    """Exact ``a < b`` when both sides are rationals or rational-exponent monomials."""
    parts = []
    for x in (a, b):
        if isinstance(x, ExpOf):
            return None
        if isinstance(x, Monomial):
            got = x.exact_power_parts()
            if got is None:
                return None
            parts.append(got)
        else:
            parts.append((as_fraction(x), 1))
    (ra, da), (rb, db) = parts
    # a = ra**(1/da), b = rb**(1/db); both nonnegative
    return ra ** db < rb ** da


def certified_lt(a, b, prec: int = DEFAULT_PREC) -> bool:
    """Decide ``a < b`` exactly.

    ``a`` and ``b`` may be ints, Fractions, floats (read as exact decimals),
    :class:`Monomial` or :class:`ExpOf` objects.
    """
    with _iv_lock:
        saved = iv.prec
        try:
            p = prec
            while p <= MAX_PREC:
                iv.prec = p
                ia, ib = _interval(a), _interval(b)
                a_lo, a_hi = ia._mpi_
                b_lo, b_hi = ib._mpi_
                if mpf_lt(a_hi, b_lo):
                    return True
                if not mpf_lt(a_lo, b_hi):
                    return False
                if p == prec:
                    exact = _exact_lt(a, b)
                    if exact is not None:
                        return exact
                p *= 2
        finally:
            iv.prec = saved
    raise IndeterminateComparison(f"could not separate {a!r} and {b!r}")


def certified_floor(x, prec: int = DEFAULT_PREC) -> int:
    """Exact floor of a positive Monomial / rational quotient bracketed by intervals."""
    with _iv_lock:
        saved = iv.prec
        try:
            p = prec
            while p <= MAX_PREC:
                iv.prec = p
                ix = _interval(x)
                lo, hi = ix._mpi_
                n = _floor_raw(lo)
                if mpf_lt(hi, from_int(n + 1)):
                    return n
                if isinstance(x, Monomial):
                    parts = x.exact_power_parts()
                    if parts is not None:
                        return _exact_root_floor(*parts)
                p *= 2
        finally:
            iv.prec = saved
    raise IndeterminateComparison(f"could not bracket floor of {x!r}")


def _floor_raw(raw) -> int:
    from mpmath.libmp import mpf_floor, to_int

    return int(to_int(mpf_floor(raw)))


def _exact_root_floor(value: Fraction, d: int) -> int:
    """floor(value**(1/d)) for rational value >= 0, by integer bisection."""
    lo, hi = 0, 1
    while Fraction(hi) ** d <= value:
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if Fraction(mid) ** d <= value:
            lo = mid
        else:
            hi = mid
    return lo


def to_float(x) -> float:
    """Best-effort float of a Monomial/ExpOf/rational (may overflow to inf)."""
    if isinstance(x, (Monomial, ExpOf)):
        with _iv_lock:
            saved = iv.prec
            try:
                iv.prec = 64
                mid = x.interval().mid
            finally:
                iv.prec = saved
        try:
            return float(mid)
        except OverflowError:
            return float("inf")
    return float(as_fraction(x))


def fpow(q, exponent) -> float:
    """Float ``q**exponent`` for a possibly huge positive int ``q`` (inf on overflow)."""
    import math

    try:
        return math.exp(float(exponent) * math.log(q))
    except OverflowError:
        return math.inf
