"""Scale windows and the multi-scale schedule ``(q~_s, N_s, m_s)``.

All inequalities involving real powers of big integers are decided with
:func:`qpcocycle.intervals.certified_lt`, never with floats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..errors import InputError, WindowError
from ..freqlib import Convergent, Frequency, _recurrence, cf_convergents
from ..intervals import ExpOf, Monomial, certified_floor, certified_lt, to_float
from .parameters import ParameterBundle


# ---------------------------------------------------------------------------
# windows


def ldt_window_holds(q: int, N: int, b: ParameterBundle) -> bool:
    """``C1 q**sigma < N < C2 q**sigma1``."""
    return certified_lt(Monomial(b.C1, q, b.sigma), N) and certified_lt(N, Monomial(b.C2, q, b.sigma1))


def ns_holds(q: int, N: int, b: ParameterBundle) -> bool:
    """``C1 q**sigma < N < 2N < C2 q**sigma1``."""
    return certified_lt(Monomial(b.C1, q, b.sigma), N) and certified_lt(2 * N, Monomial(b.C2, q, b.sigma1))


def ns_range(q: int, b: ParameterBundle) -> tuple:
    """Smallest and largest integer N satisfying ``ns_holds`` (lo > hi if empty)."""
    lo = certified_floor(Monomial(b.C1, q, b.sigma)) + 1
    hi = certified_floor(Monomial(b.C2 / 2, q, b.sigma1))
    while hi >= lo and not certified_lt(2 * hi, Monomial(b.C2, q, b.sigma1)):
        hi -= 1
    return lo, hi


def ldt_range(q: int, b: ParameterBundle) -> tuple:
    lo = certified_floor(Monomial(b.C1, q, b.sigma)) + 1
    hi = certified_floor(Monomial(b.C2, q, b.sigma1))
    while hi >= lo and not certified_lt(hi, Monomial(b.C2, q, b.sigma1)):
        hi -= 1
    return lo, hi


def window_for(f: Frequency, N: int, b: ParameterBundle, max_index: int = 10_000) -> Convergent:
    """Largest convergent q whose LDT window contains N.

    Raises :class:`WindowError` listing the nearest admissible ranges.
    """
    best, near = None, []
    for c in _recurrence(f):
        if c.n == 0:
            continue
        lo, hi = ldt_range(c.q, b)
        if lo <= hi:
            near.append((c.q, lo, hi))
        if lo <= N <= hi:
            best = c
        if lo > N or c.n >= max_index:
            break
    if best is None:
        near.sort(key=lambda t: min(abs(t[1] - N), abs(t[2] - N)))
        ranges = ", ".join(f"q={q}: ({lo}..{hi})" for q, lo, hi in near[:3]) or "none"
        raise WindowError(f"no convergent window contains N={N}; nearest admissible ranges: {ranges}",
                          admissible=near[:3])
    return best


# ---------------------------------------------------------------------------
# schedule


@dataclass(frozen=True)
class ScheduleEntry:
    s: int
    q_index: int
    qtilde: int
    N: int
    m: int | None
    cert_qs: bool | None
    cert_Ns: bool
    cert_ms: bool | None

    @property
    def ok(self) -> bool:
        return all(c is not False for c in (self.cert_qs, self.cert_Ns, self.cert_ms))


@dataclass(frozen=True)
class ScaleSchedule:
    entries: tuple
    bundle: ParameterBundle
    frequency: str = ""
    failure: str | None = None
    complete: bool = True

    @property
    def ok(self) -> bool:
        return self.failure is None and self.complete

    @property
    def depth(self) -> int:
        return len(self.entries) - 1

    @property
    def qtildes(self) -> list:
        return [e.qtilde for e in self.entries]

    @property
    def Ns(self) -> list:
        return [e.N for e in self.entries]

    def to_dict(self) -> dict:
        return {
            "frequency": self.frequency,
            "ok": self.ok,
            "failure": self.failure,
            "bundle": self.bundle.to_dict(),
            "entries": [
                {
                    "s": e.s,
                    "q_index": e.q_index,
                    "qtilde": str(e.qtilde),
                    "N": str(e.N),
                    "m": None if e.m is None else str(e.m),
                    "cert_qs": e.cert_qs,
                    "cert_Ns": e.cert_Ns,
                    "cert_ms": e.cert_ms,
                }
                for e in self.entries
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def next_qtilde(f: Frequency, current: Convergent, zeta, max_index: int = 1_000_000):
    """Smallest convergent ``q_j > current.q ** zeta`` and its predecessor."""
    target = Monomial(1, current.q, zeta)
    prev = None
    for c in _recurrence(f):
        if c.n <= current.n:
            prev = c
            continue
        if certified_lt(target, c.q):
            return c, prev
        prev = c
        if c.n >= max_index:
            break
    raise InputError(f"convergent stream exhausted looking for q > {current.q}**{zeta}")


def select_qtildes(f: Frequency, start_index: int, depth: int, zeta) -> list:
    """``[q~_0, ..., q~_depth]`` with ``q~_0 = q_{start_index}``."""
    cur = cf_convergents(f, start_index)[-1]
    out = [cur]
    for _ in range(depth):
        cur, _ = next_qtilde(f, cur, zeta)
        out.append(cur)
    return out


def ms_holds(q: int, m: int, b: ParameterBundle) -> bool:
    """``q**(zeta sigma - sigma1) < m < 2m < exp(c/10 q**gamma)``."""
    lower = certified_lt(Monomial(1, q, b.zeta * b.sigma - b.sigma1), m)
    upper = certified_lt(2 * m, ExpOf(Monomial(b.c / 10, q, b.gamma)))
    return lower and upper


def build_schedule(f: Frequency, bundle: ParameterBundle, q0_index: int, depth: int, N0: int,
                   stop_on_failure: bool = True) -> ScaleSchedule:
    """Run the inductive construction from ``(q~_0, N_0)``.

    ``m_{s+1} = floor((C1 + C2) q~_{s+1}**sigma / N_s) + 1``.  Each entry
    carries its certificates.  On the first false certificate the schedule
    records the violated inequality; with ``stop_on_failure`` it also stops
    there (the failing entry is kept as the counterexample).
    """
    if depth < 0:
        raise InputError("depth must be >= 0")
    b = bundle
    cur = cf_convergents(f, q0_index)[-1]
    N = int(N0)
    entries = [ScheduleEntry(0, cur.n, cur.q, N, None, None, ns_holds(cur.q, N, b), None)]
    failure = None
    if not entries[0].cert_Ns:
        failure = f"(Ns) violated at s=0: need C1 q^sigma < N0 < 2 N0 < C2 q^sigma1 for q={cur.q}, N0={N}"
        if stop_on_failure:
            return ScaleSchedule(tuple(entries), b, f.label, failure, complete=depth == 0)
    for s in range(depth):
        nxt, prev = next_qtilde(f, cur, b.zeta)
        # smallest: the predecessor must not exceed q~_s**zeta
        qs_ok = certified_lt(Monomial(1, cur.q, b.zeta), nxt.q) and (
            prev is None or prev.n <= cur.n or not certified_lt(Monomial(1, cur.q, b.zeta), prev.q))
        m = certified_floor(Monomial((b.C1 + b.C2) / N, nxt.q, b.sigma)) + 1
        N_next = m * N
        e = ScheduleEntry(s + 1, nxt.n, nxt.q, N_next, m, qs_ok, ns_holds(nxt.q, N_next, b), ms_holds(cur.q, m, b))
        entries.append(e)
        if failure is None and not e.ok:
            which = [name for name, v in (("(qs)", e.cert_qs), ("(Ns)", e.cert_Ns), ("(ms)", e.cert_ms)) if v is False]
            failure = f"{', '.join(which)} violated at s={s + 1} (q~={nxt.q}, N={N_next}, m={m})"
            if stop_on_failure:
                return ScaleSchedule(tuple(entries), b, f.label, failure, complete=s + 1 == depth)
        cur, N = nxt, N_next
    return ScaleSchedule(tuple(entries), b, f.label, failure)


def smallest_certified_start(f: Frequency, bundle: ParameterBundle, depth: int,
                             max_index: int = 2000) -> ScaleSchedule:
    """First convergent index whose schedule (with the smallest admissible N_0)
    certifies every inequality up to ``depth``."""
    for j in range(1, max_index + 1):
        try:
            q = cf_convergents(f, j)[-1].q
        except InputError:
            break
        if q < bundle.q0_min:
            continue
        lo, hi = ns_range(q, bundle)
        if lo > hi:
            continue
        sched = build_schedule(f, bundle, j, depth, lo)
        if sched.ok:
            return sched
    raise InputError(f"no convergent index <= {max_index} yields a certified depth-{depth} schedule")


def float_power(q: int, exponent) -> float:
    return to_float(Monomial(1, q, exponent))
