"""Energy sweep of the extrapolant ``2 L_{2N0} - L_{N0}`` for Schrodinger cocycles."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

from ..cocycle import QuadratureSpec, le_values
from ..errors import InputError
from ..freqlib import Frequency
from ..gevrey import GevreyFunction, MatrixFunction
from ..intervals import fpow
from .induction import InitialScale, find_initial_scale
from .parameters import ParameterBundle

DEFAULT_HS = (0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0)
# float energy grids (linspace, arange) put nominally equal gaps a few ulps apart
GAP_TOL = 1e-9


@dataclass(frozen=True)
class ContinuityProbeResult:
    E: tuple
    L_N0: tuple
    L_2N0: tuple
    extrapolant: tuple
    hs: tuple
    modulus: tuple
    N0: int
    qtilde0: int
    reference_E: float
    initial: InitialScale
    C_N0: float
    tail: float

    def jump_bound(self, h: float) -> float:
        """``C(N0) h + 2 q~0^{-c'}``."""
        return self.C_N0 * h + self.tail

    def rows(self) -> list:
        return list(zip(self.E, self.L_N0, self.L_2N0, self.extrapolant))

    def to_dict(self) -> dict:
        return {
            "N0": self.N0,
            "qtilde0": str(self.qtilde0),
            "reference_E": self.reference_E,
            "initial_scale": self.initial.to_dict(),
            "C_N0": self.C_N0,
            "tail_2_qtilde0_pow_minus_cprime": self.tail,
            "perturbation_sizes": list(self.hs),
            "modulus": [{"h": h, "modulus": m, "jump_bound": self.jump_bound(h)}
                        for h, m in zip(self.hs, self.modulus)],
            "sweep": [{"E": e, "L_N0": a, "L_2N0": b, "extrapolant": x} for e, a, b, x in self.rows()],
        }


def modulus_table(E: Sequence[float], values: Sequence[float], hs: Sequence[float]) -> list:
    """``max |v(E) - v(E')|`` over pairs with ``|E - E'| <= h``, for each h."""
    out = []
    n = len(E)
    for h in hs:
        lim = h * (1 + GAP_TOL) + GAP_TOL
        best = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                if abs(E[j] - E[i]) > lim:
                    break
                best = max(best, abs(values[j] - values[i]))
        out.append(best)
    return out


def continuity_probe(V: GevreyFunction, f: Frequency, E_grid: Sequence[float], bundle: ParameterBundle,
                     qtilde0, spec: QuadratureSpec = QuadratureSpec(),
                     hs: Sequence[float] = DEFAULT_HS) -> ContinuityProbeResult:
    """Sweep ``E`` with ``N0`` fixed by the initial-scale search at the middle energy.

    ``C(N0) = N0 (1 + max ||A_E||)`` over the two grid endpoints, which bound
    the sup norm for every E in between.
    """
    E = [float(e) for e in E_grid]
    if len(E) < 2:
        raise InputError("E_grid needs at least 2 energies")
    if any(b < a for a, b in zip(E, E[1:])):
        raise InputError("E_grid must be sorted")
    if sorted(hs) != list(hs) or any(h <= 0 for h in hs):
        raise InputError("hs must be positive and increasing")
    ref = E[len(E) // 2]
    initial = find_initial_scale(MatrixFunction.schrodinger(ref, V), f, qtilde0, bundle, spec)
    N0 = initial.N0
    LN, L2N = [], []
    for e in E:
        L = le_values(MatrixFunction.schrodinger(e, V), f, [N0, 2 * N0], spec)
        LN.append(L[N0])
        L2N.append(L[2 * N0])
    ext = [2 * b - a for a, b in zip(LN, L2N)]
    sup = max(MatrixFunction.schrodinger(e, V).sup_norm() for e in (E[0], E[-1]))
    tail = 2 * fpow(initial.q, -bundle.c_prime)
    return ContinuityProbeResult(tuple(E), tuple(LN), tuple(L2N), tuple(ext), tuple(hs),
                                 tuple(modulus_table(E, ext, hs)), N0, initial.q, ref, initial,
                                 N0 * (1 + sup), tail)


def write_probe_csv(path, result: ContinuityProbeResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["E", "L_N0", "L_2N0", "extrapolant"])
        for row in result.rows():
            w.writerow([f"{v:.17g}" for v in row])
