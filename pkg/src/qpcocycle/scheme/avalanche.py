"""Avalanche-principle bookkeeping and the two-scale defect estimate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from ..cocycle import LN2, RENORM_BITS, Mat2, QuadratureSpec, le_values
from ..errors import InputError
from ..freqlib import Convergent, Frequency
from ..gevrey import MatrixFunction
from ..intervals import ExpOf, Monomial, certified_lt, fpow
from .parameters import ParameterBundle
from .schedule import ns_holds

DEFAULT_C_AP = 10.0


@dataclass(frozen=True)
class ApReport:
    n: int
    mu: float
    C_AP: float
    violations: tuple
    lhs: float
    ratio: float
    log_norm_product: float = field(repr=False, default=0.0)

    @property
    def hypotheses_hold(self) -> bool:
        return not self.violations

    @property
    def conclusion_holds(self) -> bool | None:
        """``lhs < C_AP n / mu`` when the hypotheses hold, else None."""
        if not self.hypotheses_hold:
            return None
        return self.lhs < self.C_AP * self.n / self.mu


def _split_log_norm(mats: Sequence[Mat2]) -> tuple:
    """``ln||M_k ... M_1|| = e ln 2 + r`` with integer ``e`` and ``r = ln(mantissa)``.

    Only power-of-two rescaling is used, so dyadic inputs stay exact.
    """
    P, shift = Mat2.identity(), 0
    for M in mats:
        P = M @ P
        e = math.frexp(max(abs(P.a), abs(P.b), abs(P.c), abs(P.d)))[1]
        if e > RENORM_BITS:
            P = P.scaled(2.0 ** -e)
            shift += e
    mant, e = math.frexp(P.op_norm())
    return shift + e, math.log(mant)


def avalanche_check(M: Sequence[Mat2], mu: float, C_AP: float = DEFAULT_C_AP) -> ApReport:
    """Evaluate both hypotheses and the additivity defect for ``M_1, ..., M_n``.

    ``lhs = |ln||M_n...M_1|| + sum_{j=2}^{n-1} ln||M_j|| - sum_{j=1}^{n-1} ln||M_{j+1} M_j|||``.
    Nothing is asserted; violations are listed as ``(kind, j)`` with 1-based j.
    """
    n = len(M)
    if n < 3:
        raise InputError(f"avalanche check needs n >= 3 matrices, got {n}")
    violations = []
    if not mu > n:
        violations.append(("mu_gt_n", 0))
    split_norms = [_split_log_norm([m]) for m in M]
    split_pairs = [_split_log_norm([M[j], M[j + 1]]) for j in range(n - 1)]
    norms = [e * LN2 + r for e, r in split_norms]
    pairs = [e * LN2 + r for e, r in split_pairs]
    ln_mu = math.log(mu)
    for j, ln in enumerate(norms):
        if ln < ln_mu:
            violations.append(("norm", j + 1))
    for j in range(n - 1):
        if not abs(norms[j] + norms[j + 1] - pairs[j]) < ln_mu / 2:
            violations.append(("pair", j + 1))
    # integer binary exponents are summed exactly, mantissa logs with fsum
    et, rt = _split_log_norm(M)
    total = et * LN2 + rt
    e_sum = et + sum(e for e, _ in split_norms[1:-1]) - sum(e for e, _ in split_pairs)
    r_sum = math.fsum([rt] + [r for _, r in split_norms[1:-1]] + [-r for _, r in split_pairs])
    lhs = abs(e_sum * LN2 + r_sum)
    return ApReport(n, mu, C_AP, tuple(violations), lhs, lhs * mu / n, total)


def aligned_hyperbolic_sequence(seed: int, n: int, mu: float, spread: float = 0.1) -> list:
    """``R(a_j) diag(l_j, 1/l_j) R(b_j)`` with ``l_j`` in [mu, 2 mu] and small angles."""
    import numpy as np

    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        lam = float(rng.uniform(mu, 2 * mu))
        a, b = (float(x) for x in rng.uniform(-spread, spread, 2))
        out.append(Mat2.rotation(a) @ Mat2.diag(lam, 1 / lam) @ Mat2.rotation(b))
    return out


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TwoScaleEstimate:
    N: int
    N_prime: int
    m: int
    q: int
    L_N: float
    L_2N: float
    L_Nprime: float
    defect: float
    bound: float
    flags: dict

    @property
    def within_bound(self) -> bool:
        return self.defect < self.bound

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("N", "N_prime", "m", "L_N", "L_2N", "L_Nprime", "defect", "bound")}
        d["q"] = str(self.q)
        d["within_bound"] = self.within_bound
        d["flags"] = dict(self.flags)
        return d


def two_scale_defect(A: MatrixFunction, f: Frequency, N: int, m: int, q, bundle: ParameterBundle,
                     spec: QuadratureSpec = QuadratureSpec()) -> TwoScaleEstimate:
    """``|L_{mN} + L_N - 2 L_{2N}|`` against ``exp(-(c/2) q**gamma) + 2 L_N / m``.

    Window and hypothesis flags are recorded, never enforced.
    """
    if N < 1 or m < 1:
        raise InputError("N and m must be positive")
    qv = q.q if isinstance(q, Convergent) else int(q)
    Np = m * N
    L = le_values(A, f, [N, 2 * N, Np], spec)
    LN, L2N, LNp = L[N], L[2 * N], L[Np]
    defect = abs(LNp + LN - 2 * L2N)
    c, gamma = float(bundle.c), float(bundle.gamma)
    bound = math.exp(-(c / 2) * fpow(qv, gamma)) + 2 * LN / m
    kappa = float(bundle.kappa)
    flags = {
        "window": ns_holds(qv, N, bundle),
        "L_N_gt_90kappa": LN > 90 * kappa,
        "L_2N_gt_0.9L_N": L2N > 0.9 * LN,
        "m_lt_exp": certified_lt(m, ExpOf(Monomial(bundle.c / 10, qv, bundle.gamma))),
        "q_ge_q0": qv >= bundle.q0_min,
    }
    return TwoScaleEstimate(N, Np, m, qv, LN, L2N, LNp, defect, bound, flags)
