"""Initial-scale search and verification of the extrapolation error.

The limit ``L`` is never available, so ``L_{N_deep}`` at the deepest
affordable schedule scale stands in for it.  Every output carries the label
:data:`PROXY_LABEL` so the substitution is never silent.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..cocycle import QuadratureSpec, le_values
from ..errors import BudgetError, InputError, SearchError, WindowError
from ..freqlib import Convergent, Frequency
from ..gevrey import MatrixFunction
from ..intervals import fpow
from .parameters import ParameterBundle
from .schedule import ScaleSchedule, ns_range

PROXY_LABEL = "L approximated by L_{N_deep}"
FIRST_RATIO = 0.99
DEFAULT_MAX_N = 1 << 17


@dataclass(frozen=True)
class InitialScale:
    q: int
    N0: int
    L_N0: float
    L_2N0: float
    window: tuple
    evaluated: int

    @property
    def ratio(self) -> float:
        return self.L_2N0 / self.L_N0

    def to_dict(self) -> dict:
        return {"q": str(self.q), "N0": self.N0, "L_N0": self.L_N0, "L_2N0": self.L_2N0,
                "ratio": self.ratio, "window": [self.window[0], self.window[1]],
                "evaluated": self.evaluated}


def _q_of(q) -> int:
    return q.q if isinstance(q, Convergent) else int(q)


def _mesh(lo: int, hi: int, ratio: float) -> list:
    pts = [lo]
    while pts[-1] < hi:
        pts.append(min(hi, max(pts[-1] + 1, math.ceil(pts[-1] * ratio))))
    return pts


def find_initial_scale(A: MatrixFunction, f: Frequency, qtilde0, bundle: ParameterBundle,
                       spec: QuadratureSpec = QuadratureSpec(), mesh_ratio: float = 1.1) -> InitialScale:
    """Smallest ``N0`` in the (Ns) window at ``qtilde0`` with ``L_{2N0} > 0.99 L_{N0}``.

    A geometric mesh (ratio ``mesh_ratio``) locates the first passing mesh
    point; the integers between it and the previous mesh point are then
    scanned so the returned ``N0`` is the smallest passing integer there.
    """
    q = _q_of(qtilde0)
    lo, hi = ns_range(q, bundle)
    if lo > hi:
        raise WindowError(f"(Ns) window at q={q} is empty: need C1 q^sigma < N < 2N < C2 q^sigma1",
                          admissible=[])
    kappa = float(bundle.kappa)
    L_lo = le_values(A, f, [lo], spec)[lo]
    if not L_lo > 100 * kappa:
        raise InputError(f"precondition L_N > 100 kappa fails at the window's left edge N={lo}: "
                         f"L_N = {L_lo:.6g}, 100 kappa = {100 * kappa:.6g}")
    mesh = _mesh(lo, hi, mesh_ratio)
    L = le_values(A, f, mesh + [2 * n for n in mesh], spec)
    evaluated = len(mesh)

    def passes(n, vals):
        return vals[2 * n] > FIRST_RATIO * vals[n]

    best = max(L[2 * n] / L[n] for n in mesh)
    hit = next((i for i, n in enumerate(mesh) if passes(n, L)), None)
    if hit is None:
        raise SearchError(f"no mesh point in window ({lo}..{hi}) at q={q} passes "
                          f"L_2N > {FIRST_RATIO} L_N; best ratio {best:.6f}", best=best)
    n_hit = mesh[hit]
    if hit > 0:
        between = list(range(mesh[hit - 1] + 1, n_hit))
        if between:
            Lb = le_values(A, f, between + [2 * n for n in between], spec)
            evaluated += len(between)
            first = next((n for n in between if passes(n, Lb)), None)
            if first is not None:
                return InitialScale(q, first, Lb[first], Lb[2 * first], (lo, hi), evaluated)
    return InitialScale(q, n_hit, L[n_hit], L[2 * n_hit], (lo, hi), evaluated)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QRow:
    s: int
    qtilde: int
    lhs_Q1: float
    bound_Q1: float
    lhs_Q2: float
    bound_Q2: float
    lhs_Q3: float
    bound_Q3: float

    @property
    def holds(self) -> tuple:
        return (self.lhs_Q1 < self.bound_Q1, self.lhs_Q2 < self.bound_Q2, self.lhs_Q3 < self.bound_Q3)


@dataclass(frozen=True)
class ExtrapolationResult:
    value: float
    deep_index: int
    N_deep: int
    qtilde0: int
    L_N0: float
    L_2N0: float
    L_deep: float
    tail: float
    c_prime: Fraction
    rows: tuple
    proxy: str = PROXY_LABEL

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "deep_index": self.deep_index,
            "N_deep": str(self.N_deep),
            "qtilde0": str(self.qtilde0),
            "L_N0": self.L_N0,
            "L_2N0": self.L_2N0,
            "L_deep": self.L_deep,
            "tail_qtilde0_pow_minus_cprime": self.tail,
            "c_prime": {"exact": str(self.c_prime), "value": float(self.c_prime)},
            "proxy": self.proxy,
            "table": [dict(zip(Q_COLUMNS, _row_values(r))) | {"holds": list(r.holds)} for r in self.rows],
        }


Q_COLUMNS = ("s", "qtilde_s", "lhs_Q1", "bound_Q1", "lhs_Q2", "bound_Q2", "lhs_Q3", "bound_Q3")


def _row_values(r: QRow) -> list:
    return [r.s, str(r.qtilde), r.lhs_Q1, r.bound_Q1, r.lhs_Q2, r.bound_Q2, r.lhs_Q3, r.bound_Q3]


def largest_feasible_depth(schedule: ScaleSchedule, max_N: int = DEFAULT_MAX_N) -> int:
    """Deepest index whose ``2 N_s`` fits the scale budget (-1 if none)."""
    d = -1
    for i, n in enumerate(schedule.Ns):
        if 2 * n > max_N:
            break
        d = i
    return d


def extrapolation_error(A: MatrixFunction, f: Frequency, schedule: ScaleSchedule, deep_index: int,
                        spec: QuadratureSpec = QuadratureSpec(), max_N: int = DEFAULT_MAX_N,
                        C0=None) -> ExtrapolationResult:
    """``|L_{N_deep} + L_{N0} - 2 L_{2N0}|`` and the per-step (Q1)-(Q3) table.

    ``C0`` defaults to the bundle's value, or ``10 (||A||_C0 + 1)`` if unset.
    """
    if not 0 <= deep_index <= schedule.depth:
        raise InputError(f"deep_index {deep_index} outside schedule depth {schedule.depth}")
    Ns = schedule.Ns[:deep_index + 1]
    if 2 * Ns[-1] > max_N:
        raise BudgetError(f"N_deep = {Ns[-1]} needs scale {2 * Ns[-1]} > budget {max_N}; "
                          f"largest feasible depth is {largest_feasible_depth(schedule, max_N)}",
                          largest_feasible=largest_feasible_depth(schedule, max_N))
    b = schedule.bundle
    if C0 is None:
        C0 = float(b.C0) if b.C0 is not None else 10 * (A.sup_norm() + 1.0)
    L = le_values(A, f, list(Ns) + [2 * n for n in Ns], spec)
    qs = schedule.qtildes
    e = b.step_exponent
    rows = []
    for s in range(deep_index):
        n0, n1 = Ns[s], Ns[s + 1]
        step = C0 * fpow(qs[s], e)
        prev = C0 * (fpow(qs[s - 1], e) if s > 0 else 1.0)
        rows.append(QRow(s, qs[s],
                         abs(L[n1] + L[n0] - 2 * L[2 * n0]), step,
                         abs(L[2 * n1] - L[n1]), 2 * step,
                         abs(L[n1] - L[n0]), 10 * prev))
    N0, Nd = Ns[0], Ns[-1]
    value = abs(L[Nd] + L[N0] - 2 * L[2 * N0])
    tail = fpow(qs[0], -b.c_prime)
    return ExtrapolationResult(value, deep_index, Nd, qs[0], L[N0], L[2 * N0], L[Nd], tail, b.c_prime, tuple(rows))


def write_q_table(path, result: ExtrapolationResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(Q_COLUMNS)
        for r in result.rows:
            w.writerow([_fmt(v) for v in _row_values(r)])


def _fmt(v):
    return f"{v:.17g}" if isinstance(v, float) else v


def fit_decay_exponent(qtildes: Sequence[int], errors: Sequence[float]) -> float | None:
    """Least-squares slope ``r`` in ``ln err = a - r ln q~0``; None if under-determined."""
    pts = [(math.log(q), math.log(e)) for q, e in zip(qtildes, errors) if e > 0]
    if len(pts) < 2:
        return None
    x, y = np.array(pts).T
    slope = np.polyfit(x, y, 1)[0]
    return float(-slope)
