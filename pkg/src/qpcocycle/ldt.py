"""Large-deviation sets: grid measurement and calibration of ``c``.

The deviation set at scale N is ``{theta : |u_N(theta) - L_N| > kappa}`` with
``u_N = (1/N) ln ||A_N||``.  Its measure is estimated by the fraction of grid
points it contains; ``L_N`` comes from the same grid, so one product pass
serves both.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cocycle import QuadratureSpec, grid_log_norms, le_from_log_norms
from .errors import InputError, WindowError
from .freqlib import Convergent, Frequency
from .gevrey import MatrixFunction
from .intervals import fpow
from .scheme.parameters import ParameterBundle
from .scheme.schedule import ldt_range, ldt_window_holds, window_for

METHODS = ("grid", "monte_carlo")


@dataclass(frozen=True)
class DeviationReport:
    N: int
    q: int | None
    kappa: float
    measured_fraction: float
    bound: float | None
    K: int
    L_N: float
    count: int
    samples: int
    boundary_cells: int
    method: str = "grid"
    window_waived: bool = False
    below_q0: bool = False
    c: float = 0.1
    gamma: float = 0.0

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "q": None if self.q is None else str(self.q),
            "kappa": self.kappa,
            "measured_fraction": self.measured_fraction,
            "bound": self.bound,
            "K": self.K,
            "L_N": self.L_N,
            "count": self.count,
            "samples": self.samples,
            "boundary_cells": self.boundary_cells,
            "method": self.method,
            "window_waived": self.window_waived,
            "below_q0": self.below_q0,
            "c": self.c,
            "gamma": self.gamma,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _resolve_q(f: Frequency, N: int, bundle: ParameterBundle, q, waive: bool):
    if q is not None:
        qv = q.q if isinstance(q, Convergent) else int(q)
        if waive or ldt_window_holds(qv, N, bundle):
            return qv
        lo, hi = ldt_range(qv, bundle)
        raise WindowError(f"N={N} is outside the window of q={qv}: admissible N in ({lo}..{hi})",
                          admissible=[(qv, lo, hi)])
    try:
        return window_for(f, N, bundle).q
    except WindowError:
        if waive:
            return None
        raise


def _monte_carlo_starts(n: int, bits: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    words = (bits + 63) // 64
    raw = rng.integers(0, 1 << 63, size=(n, words), dtype=np.int64, endpoint=False)
    out = []
    mask = (1 << bits) - 1
    for row in raw:
        v = 0
        for w in row:
            v = (v << 63) | int(w)
        out.append(v & mask)
    return out


def deviation_measure(A: MatrixFunction, f: Frequency, N: int, kappa: float, bundle: ParameterBundle,
                      spec: QuadratureSpec = QuadratureSpec(), q=None, waive_window: bool = False,
                      method: str = "grid", samples: int = 4096, seed: int = 0) -> DeviationReport:
    """Fraction of angles where ``|u_N - L_N| > kappa``.

    With ``method="monte_carlo"`` the fraction is taken over ``samples``
    seeded random angles instead of the grid; ``L_N`` always comes from the grid.
    """
    if not kappa > 0:
        raise InputError(f"kappa must be positive, got {kappa}")
    if N < 1:
        raise InputError(f"N must be >= 1, got {N}")
    if method not in METHODS:
        raise InputError(f"method must be one of {METHODS}, got {method!r}")
    qv = _resolve_q(f, N, bundle, q, waive_window)
    logs = grid_log_norms(A, f, [N], spec)[N]
    L_N = le_from_log_norms(logs, N)
    u = logs / N
    if method == "monte_carlo":
        starts = _monte_carlo_starts(samples, spec.precision_bits, seed)
        u = grid_log_norms(A, f, [N], spec, starts=starts)[N] / N
    dev = np.abs(u - L_N) > kappa
    count = int(dev.sum())
    total = dev.size
    boundary = int(np.count_nonzero(dev != np.roll(dev, -1))) if method == "grid" else 0
    c, gamma = float(bundle.c), float(bundle.gamma)
    bound = None if qv is None else math.exp(-c * fpow(qv, gamma))
    below = qv is not None and qv < bundle.q0_min
    return DeviationReport(int(N), qv, float(kappa), count / total, bound, spec.K, L_N, count, total,
                           boundary, method, bool(waive_window), below, c, gamma)


# ---------------------------------------------------------------------------
# calibration


@dataclass(frozen=True)
class LdtPoint:
    q: int
    N: int
    fraction: float
    K: int


@dataclass(frozen=True)
class LdtCalibration:
    c: float | None
    gamma: float
    residuals: tuple
    q_range: tuple
    fitted: tuple
    floor_constraints: tuple
    c_ceiling: float | None
    floor_consistent: bool
    residual_norm: float
    reports: tuple = field(default=(), repr=False)

    @property
    def degenerate(self) -> bool:
        return self.c is None

    @property
    def ok(self) -> bool:
        return self.c is not None and self.c > 0

    def fitted_bound(self, q: int) -> float | None:
        return None if self.c is None else math.exp(-self.c * fpow(q, self.gamma))

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "gamma": self.gamma,
            "degenerate": self.degenerate,
            "ok": self.ok,
            "q_range": [str(self.q_range[0]), str(self.q_range[1])],
            "residual_norm": self.residual_norm,
            "residuals": [{"q": str(p.q), "N": p.N, "residual": r} for p, r in zip(self.fitted, self.residuals)],
            "floor_constraints": [{"q": str(p.q), "N": p.N, "c_max": fc} for p, fc in self.floor_constraints],
            "c_ceiling": self.c_ceiling,
            "floor_consistent": self.floor_consistent,
            "reports": [r.to_dict() for r in self.reports],
        }

    def points(self) -> list:
        pts = list(self.fitted) + [p for p, _ in self.floor_constraints]
        return sorted(pts, key=lambda p: (p.q, p.N))


def fit_ldt_constant(points: Sequence[LdtPoint], gamma: float, reports: Sequence[DeviationReport] = ()) -> LdtCalibration:
    """Least squares for ``-ln(fraction) = c q**gamma`` through the origin.

    Zero fractions enter only as ``c q**gamma <= ln K``.
    """
    if len(points) < 3:
        raise InputError(f"calibration needs >= 3 points, got {len(points)}")
    gamma = float(gamma)
    pos = [p for p in points if p.fraction > 0]
    zero = [p for p in points if p.fraction <= 0]
    floors = tuple((p, math.log(p.K) / fpow(p.q, gamma)) for p in zero)
    ceiling = min((fc for _, fc in floors), default=None)
    qs = [p.q for p in points]
    if not pos:
        return LdtCalibration(None, gamma, (), (min(qs), max(qs)), (), floors, ceiling, True, 0.0, tuple(reports))
    x = [fpow(p.q, gamma) for p in pos]
    y = [-math.log(p.fraction) for p in pos]
    c = math.fsum(a * b for a, b in zip(x, y)) / math.fsum(a * a for a in x)
    res = tuple(b - c * a for a, b in zip(x, y))
    norm = math.sqrt(math.fsum(r * r for r in res))
    consistent = ceiling is None or c <= ceiling
    return LdtCalibration(c, gamma, res, (min(qs), max(qs)), tuple(pos), floors, ceiling, consistent, norm,
                          tuple(reports))


def window_midpoint(q: int, bundle: ParameterBundle) -> int:
    lo, hi = ldt_range(q, bundle)
    if lo > hi:
        raise WindowError(f"LDT window at q={q} is empty", admissible=[])
    return (lo + hi + 1) // 2


def calibrate_ldt(A: MatrixFunction, f: Frequency, q_list: Sequence, kappa: float, bundle: ParameterBundle,
                  spec: QuadratureSpec = QuadratureSpec()) -> LdtCalibration:
    """Measure at the window midpoint of each q, then fit c with gamma from the bundle."""
    if len(q_list) < 3:
        raise InputError(f"calibration needs >= 3 q values, got {len(q_list)}")
    reports = []
    for q in q_list:
        qv = q.q if isinstance(q, Convergent) else int(q)
        reports.append(deviation_measure(A, f, window_midpoint(qv, bundle), kappa, bundle, spec, q=qv))
    pts = [LdtPoint(r.q, r.N, r.measured_fraction, r.K) for r in reports]
    return fit_ldt_constant(pts, float(bundle.gamma), reports)


def write_residual_csv(path, cal: LdtCalibration) -> None:
    """Columns ``q, N, fraction, neg_log_fraction, fitted_bound``; zero rows leave the log blank."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["q", "N", "fraction", "neg_log_fraction", "fitted_bound"])
        for p in cal.points():
            nl = "" if p.fraction <= 0 else f"{-math.log(p.fraction):.17g}"
            fb = cal.fitted_bound(p.q)
            w.writerow([p.q, p.N, f"{p.fraction:.17g}", nl, "" if fb is None else f"{fb:.17g}"])
