"""Continued fractions, frequency classes and exact orbit angles.

A frequency ``alpha in (0, 1)`` is carried by its partial quotients
``a_1, a_2, ...``.  Convergents follow ``q_0 = 1, q_1 = a_1`` and
``q_{n+1} = a_{n+1} q_n + q_{n-1}`` (``p_0 = 0, p_1 = 1``), in Python ints.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from mpmath import mp, mpf

from .errors import InputError, PrecisionError
from .intervals import ExpOf, Monomial, certified_lt

DEFAULT_PRECISION_BITS = 192
CLASS_NAMES = ("bounded", "SDC", "DC", "Omega", "Brjuno")


@dataclass(frozen=True)
class Frequency:
    """Partial quotients of ``alpha``: an explicit prefix followed by an
    optional periodic tail.

    An empty ``period`` makes the stream finite (``alpha`` rational).
    ``marked`` holds indices that a generator designated as near-extremal.
    """

    prefix: tuple = ()
    period: tuple = ()
    label: str = ""
    marked: tuple = ()

    def __post_init__(self):
        prefix = tuple(int(a) for a in self.prefix)
        period = tuple(int(a) for a in self.period)
        if not prefix and not period:
            raise InputError("a Frequency needs at least one partial quotient")
        for a in prefix + period:
            if a < 1:
                raise InputError(f"partial quotients must be >= 1, got {a}")
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "period", period)
        object.__setattr__(self, "marked", tuple(int(i) for i in self.marked))

    @classmethod
    def golden(cls) -> "Frequency":
        return cls(period=(1,), label="golden")

    @classmethod
    def silver(cls) -> "Frequency":
        return cls(period=(2,), label="silver")

    @classmethod
    def from_coeffs(cls, coeffs: Iterable[int], label: str = "", period: Sequence[int] = ()) -> "Frequency":
        return cls(prefix=tuple(coeffs), period=tuple(period), label=label)

    @property
    def is_finite(self) -> bool:
        return not self.period

    def available(self) -> float:
        """Number of partial quotients (``inf`` for periodic tails)."""
        return math.inf if self.period else len(self.prefix)

    def coeff(self, n: int) -> int:
        """The partial quotient ``a_n`` (1-based)."""
        if n < 1:
            raise IndexError("partial quotients are indexed from 1")
        if n <= len(self.prefix):
            return self.prefix[n - 1]
        if not self.period:
            raise IndexError(f"stream has only {len(self.prefix)} partial quotients")
        return self.period[(n - 1 - len(self.prefix)) % len(self.period)]

    def coeffs(self, n: int) -> list:
        return [self.coeff(i) for i in range(1, n + 1)]

    def value(self, digits: int = 30) -> mpf:
        """Numerical value of alpha from a deep convergent (diagnostics only)."""
        with mp.workdps(digits + 10):
            n = len(self.prefix) if self.is_finite else len(self.prefix) + 4 * digits
            c = cf_convergents(self, max(n, 1))[-1]
            return mpf(c.p) / c.q


@dataclass(frozen=True)
class Convergent:
    n: int
    p: int
    q: int

    def as_fraction(self) -> Fraction:
        return Fraction(self.p, self.q)


def _recurrence(f: Frequency):
    p_prev, q_prev = 1, 0
    p, q = 0, 1
    n = 0
    yield Convergent(0, p, q)
    while True:
        n += 1
        try:
            a = f.coeff(n)
        except IndexError:
            return
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        yield Convergent(n, p, q)


def cf_convergents(f: Frequency, n: int, include_zeroth: bool = False) -> list:
    """The convergents ``p_1/q_1, ..., p_n/q_n`` of ``f``.

    With ``include_zeroth`` the list starts at ``p_0/q_0 = 0/1`` instead and
    still has ``n`` entries.
    """
    if n < 1:
        raise InputError(f"need n >= 1 convergents, got {n}")
    need = n - 1 if include_zeroth else n
    if f.available() < need:
        raise InputError(
            f"frequency {f.label or '<unnamed>'} has {f.available()} partial quotients; "
            f"{need} required (short by {need - f.available()})"
        )
    out = []
    start = 0 if include_zeroth else 1
    for c in _recurrence(f):
        if c.n >= start:
            out.append(c)
        if len(out) == n:
            break
    return out


def convergents_until(f: Frequency, q_min: int, limit: int = 1_000_000) -> list:
    """Convergents from index 1 up to the first with ``q > q_min``."""
    out = []
    for c in _recurrence(f):
        if c.n == 0:
            continue
        out.append(c)
        if c.q > q_min:
            return out
        if c.n >= limit:
            break
    raise InputError(f"stream exhausted before a convergent with q > {q_min}")


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class ClassEntry:
    """Minimal constant making one class inequality hold on the available pairs."""

    name: str
    n_max: int
    witness: float
    worst_index: int
    worst_ratio: float
    ratios: tuple = field(repr=False, default=())
    indices: tuple = field(repr=False, default=())

    def holds(self, C: float) -> bool:
        return self.witness <= C

    def first_violation(self, C: float):
        """Index of the first pair breaking the inequality with constant C."""
        for i, r in zip(self.indices, self.ratios):
            if r > C:
                return i
        return None


@dataclass(frozen=True)
class FrequencyClassReport:
    eta: float
    tau: float
    n_max: int
    entries: dict

    def __getitem__(self, name: str) -> ClassEntry:
        return self.entries[name]

    def to_dict(self) -> dict:
        out = {"eta": self.eta, "tau": self.tau, "n_max": self.n_max, "classes": {}}
        for name, e in self.entries.items():
            out["classes"][name] = {
                "holds_up_to": e.n_max,
                "witness": e.witness,
                "worst_index": e.worst_index,
                "worst_ratio": e.worst_ratio,
            }
        return out


def _log(q: int) -> float:
    # math.log accepts arbitrarily large ints
    return math.log(q)


def _entry(name, indices, ratios, n_max) -> ClassEntry:
    if not ratios:
        return ClassEntry(name, n_max, 0.0, -1, 0.0, (), ())
    k = max(range(len(ratios)), key=lambda i: ratios[i])
    return ClassEntry(name, n_max, ratios[k], indices[k], ratios[k], tuple(ratios), tuple(indices))


def classify_frequency(convs: Sequence[Convergent], eta: float, tau: float) -> FrequencyClassReport:
    """Witness constants for bounded type, SDC(tau), DC(tau), Omega(eta) and
    the Brjuno partial sum over consecutive pairs of ``convs``.

    For SDC the factor ``(ln q_n)**tau`` is floored at 1 so that ``q_n = 1``
    does not force an infinite constant.
    """
    if len(convs) < 3:
        raise InputError(f"classification needs at least 3 convergents, got {len(convs)}")
    if not 0 < eta < 1:
        raise InputError(f"eta must lie in (0, 1), got {eta}")
    if not tau > 1:
        raise InputError(f"tau must exceed 1, got {tau}")
    idx, bounded, sdc, dc, omega, brjuno = [], [], [], [], [], []
    total = 0.0
    for a, b in zip(convs, convs[1:]):
        lq, lq1 = _log(a.q), _log(b.q)
        idx.append(a.n)
        bounded.append(math.exp(lq1 - lq))
        sdc.append(math.exp(lq1 - lq - tau * math.log(max(lq, 1.0))))
        dc.append(math.exp(min(lq1 - tau * lq, 700.0)))
        omega.append(lq1 / math.exp(eta * lq))
        total += lq1 / math.exp(lq)
    n_max = convs[-2].n
    entries = {
        "bounded": _entry("bounded", idx, bounded, n_max),
        "SDC": _entry("SDC", idx, sdc, n_max),
        "DC": _entry("DC", idx, dc, n_max),
        "Omega": _entry("Omega", idx, omega, n_max),
        "Brjuno": ClassEntry("Brjuno", n_max, total, n_max, total, (), ()),
    }
    return FrequencyClassReport(eta, tau, n_max, entries)


# ---------------------------------------------------------------------------
# near-extremal members of Omega(eta)


def _max_admissible(q: int, q_prev: int, eta: Fraction, C: Fraction) -> int:
    """Largest a with ``a*q + q_prev <= exp(C * q**eta)``, certified."""
    bound = ExpOf(Monomial(C, q, eta))
    x = float(C) * q ** float(eta)
    bits = int(x / math.log(2)) + 64
    with mp.workprec(max(bits, 64) + 64):
        guess = int(mp.floor((mp.exp(mpf(C.numerator) / C.denominator * mpf(q) ** (mpf(eta.numerator) / eta.denominator)) - q_prev) / q))
    a = max(guess + 1, 0)
    # walk down until certified admissible (at most a couple of steps)
    while a > 0 and not certified_lt(a * q + q_prev, bound):
        a -= 1
    return a


def construct_omega_eta(eta: float, C: float, depth: int, seed: int = 0,
                        max_bits: int = 4096, tail: Sequence[int] = (1,)) -> Frequency:
    """A frequency in Omega(eta) with constant ``C`` that saturates the bound
    wherever the resulting denominator fits in ``max_bits`` bits.

    Indices where the extremal choice would exceed the bit budget receive a
    seeded small quotient in {1, 2, 3} (still admissible).  After ``depth``
    quotients the stream continues with the periodic ``tail``.
    """
    if not 0 < eta < 1:
        raise InputError(f"eta must lie in (0, 1), got {eta}")
    if not C > 0:
        raise InputError(f"C must be positive, got {C}")
    if depth < 1:
        raise InputError(f"depth must be >= 1, got {depth}")
    from .intervals import as_fraction

    eta_q, C_q = as_fraction(eta), as_fraction(C)
    rng = random.Random(seed)
    coeffs, marked = [], []
    q_prev, q = 0, 1
    for n in range(depth):
        x = float(C_q) * q ** float(eta_q) if q.bit_length() < 1000 else math.inf
        if x / math.log(2) <= max_bits:
            a = _max_admissible(q, q_prev, eta_q, C_q)
            if a < 1:
                if n == 0:
                    raise InputError(f"C={C}, eta={eta} give a_1 < 1")
                a = 1
            else:
                marked.append(n)
        else:
            a = rng.randint(1, 3)
        coeffs.append(a)
        q_prev, q = q, a * q + q_prev
    label = f"omega_eta(eta={eta}, C={C}, depth={depth}, seed={seed})"
    return Frequency(prefix=tuple(coeffs), period=tuple(tail), label=label, marked=tuple(marked))


# ---------------------------------------------------------------------------
# fixed point angles


@dataclass(frozen=True)
class FixedPointAngle:
    """The dyadic angle ``numerator / 2**precision_bits`` in [0, 1)."""

    numerator: int
    precision_bits: int = DEFAULT_PRECISION_BITS

    def __post_init__(self):
        if not 0 <= self.numerator < (1 << self.precision_bits):
            raise InputError("FixedPointAngle numerator out of range")

    @classmethod
    def from_fraction(cls, x, precision_bits: int = DEFAULT_PRECISION_BITS) -> "FixedPointAngle":
        """Round ``x mod 1`` to the nearest representable angle."""
        x = Fraction(x) % 1
        num = round(x * (1 << precision_bits)) % (1 << precision_bits)
        return cls(num, precision_bits)

    @classmethod
    def grid_point(cls, i: int, K: int, precision_bits: int = DEFAULT_PRECISION_BITS) -> "FixedPointAngle":
        return cls.from_fraction(Fraction(i, K), precision_bits)

    def rescale(self, precision_bits: int) -> "FixedPointAngle":
        if precision_bits >= self.precision_bits:
            return FixedPointAngle(self.numerator << (precision_bits - self.precision_bits), precision_bits)
        shift = self.precision_bits - precision_bits
        return FixedPointAngle(self.numerator >> shift, precision_bits)

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.precision_bits)

    def __float__(self) -> float:
        return float(self.as_fraction())


def required_bits(N: int) -> int:
    return max(N - 1, 1).bit_length() + 64


def alpha_fixed_point(f: Frequency, precision_bits: int) -> int:
    """Round-to-nearest fixed-point numerator of alpha with error < 2**-precision_bits.

    Uses the first convergent with ``q > 2**precision_bits``, whose distance to
    alpha is below ``1/q**2``.
    """
    target = 1 << precision_bits
    c = None
    for c in _recurrence(f):
        if c.q > target:
            break
    else:
        raise PrecisionError(
            f"frequency {f.label or '<unnamed>'} has no convergent with q > 2**{precision_bits} "
            f"(deepest q = {c.q if c else 1}); cannot represent alpha to {precision_bits} bits",
            required_bits=precision_bits,
        )
    return (2 * c.p * target + c.q) // (2 * c.q)


def orbit_angles(f: Frequency, theta0: FixedPointAngle, N: int,
                 precision_bits: int = DEFAULT_PRECISION_BITS) -> list:
    """``theta0 + j*alpha mod 1`` for ``j = 0..N-1`` by exact integer addition."""
    if N < 1:
        raise InputError(f"N must be >= 1, got {N}")
    need = required_bits(N)
    if precision_bits < need:
        raise PrecisionError(
            f"orbit of length {N} needs at least {need} bits, got {precision_bits}",
            required_bits=need,
        )
    mask = (1 << precision_bits) - 1
    theta = theta0.rescale(precision_bits).numerator
    if N == 1:
        return [FixedPointAngle(theta, precision_bits)]
    a = alpha_fixed_point(f, precision_bits)
    out = []
    for _ in range(N):
        out.append(FixedPointAngle(theta, precision_bits))
        theta = (theta + a) & mask
    return out
