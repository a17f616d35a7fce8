"""Constant selection for the large-deviation windows.

Every bundle constant is an exact :class:`fractions.Fraction`; floats given
by callers are read as the decimals they print as (``1.4 -> 7/5``), so all
invariant checks are exact rational comparisons.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from fractions import Fraction

from ..errors import InfeasibleInput, InputError, SearchError
from ..intervals import as_fraction

HYPOTHESIS = "0 < η < 2 − s"

INVARIANT_FAMILIES = ("ranges", "p1", "p2", "gap", "zeta", "c_prime")


@dataclass(frozen=True)
class ParameterBundle:
    s: Fraction
    eta: Fraction
    kappa: Fraction
    delta: Fraction
    sigma: Fraction
    p: int
    gamma: Fraction
    sigma1: Fraction
    zeta: Fraction
    c: Fraction = Fraction(1, 10)
    C1: Fraction = Fraction(1)
    C2: Fraction = Fraction(1)
    C0: Fraction | None = None
    eps: Fraction = Fraction(1, 1000)
    q0_min: int = 1

    @property
    def c_prime(self) -> Fraction:
        return (self.zeta * self.sigma - self.sigma1) / 2

    @property
    def zeta_interval(self) -> tuple:
        return self.sigma1 / self.sigma, self.gamma / self.eta

    @property
    def step_exponent(self) -> Fraction:
        """``sigma1 - zeta*sigma`` (negative), the exponent in the per-step bounds."""
        return self.sigma1 - self.zeta * self.sigma

    def replace(self, **kw) -> "ParameterBundle":
        for k, v in list(kw.items()):
            if k in ("p", "q0_min"):
                kw[k] = int(v)
            elif v is not None:
                kw[k] = as_fraction(v)
        return dataclasses.replace(self, **kw)

    def with_cocycle(self, A, grid: int = 4096) -> "ParameterBundle":
        """Fill ``C0 = 10 (||A||_C0 + 1)`` from the grid sup of the operator norm."""
        return self.replace(C0=as_fraction(10 * (A.sup_norm(grid) + 1.0)))

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            out[f.name] = _num(v)
        out["c_prime"] = _num(self.c_prime)
        return out


def _num(v):
    if isinstance(v, Fraction):
        return {"exact": str(v), "value": float(v)}
    return v


def check_bundle(b: ParameterBundle) -> dict:
    """Exact truth value of each invariant family."""
    one = Fraction(1)
    return {
        "ranges": (1 < b.s < 2 and 0 < b.eta < 2 - b.s and b.s - 1 < b.delta < 1 - b.eta),
        "p1": (1 < b.sigma < one / b.delta
               and b.delta * b.sigma / (b.sigma - 1) < b.p < one / (b.sigma - 1)),
        "p2": (b.gamma == 1 + b.p * (1 - b.sigma) and b.sigma1 == b.p * (b.sigma - 1) / b.delta),
        "gap": b.eta * b.sigma1 < b.gamma * b.sigma,
        "zeta": b.sigma1 / b.sigma < b.zeta < b.gamma / b.eta,
        "c_prime": b.c_prime > 0,
    }


def violated(b: ParameterBundle) -> list:
    return [k for k, ok in check_bundle(b).items() if not ok]


def _derived(delta: Fraction, sigma: Fraction):
    p = math.floor(delta * sigma / (sigma - 1)) + 1
    gamma = 1 + p * (1 - sigma)
    sigma1 = p * (sigma - 1) / delta
    return p, gamma, sigma1


def select_parameters(s, eta, kappa, sigma_start=Fraction(3, 2), shrink=Fraction(1, 2),
                      max_iter: int = 64, zeta=None, **constants) -> ParameterBundle:
    """Search ``sigma -> 1`` geometrically until every bundle invariant holds.

    ``delta`` and (unless given) ``zeta`` are interval midpoints.  Extra keyword
    arguments (``c``, ``C1``, ``C2``, ``C0``, ``eps``, ``q0_min``) are stored
    on the bundle unchanged.
    """
    s, eta, kappa = as_fraction(s), as_fraction(eta), as_fraction(kappa)
    if not 1 < s < 2:
        raise InfeasibleInput(f"s = {float(s)} violates 1 < s < 2")
    if not 0 < eta < 2 - s:
        raise InfeasibleInput(
            f"s = {float(s)}, η = {float(eta)} violate the hypothesis {HYPOTHESIS} (s + η must be < 2)"
        )
    if not kappa > 0:
        raise InputError(f"kappa must be positive, got {float(kappa)}")
    sigma_start, shrink = as_fraction(sigma_start), as_fraction(shrink)
    if not sigma_start > 1 or not 0 < shrink < 1:
        raise InputError("need sigma_start > 1 and 0 < shrink < 1")
    delta = ((s - 1) + (1 - eta)) / 2
    extra = {k: (int(v) if k == "q0_min" else (None if v is None else as_fraction(v)))
             for k, v in constants.items()}
    sigma = sigma_start
    last = None
    for _ in range(max_iter):
        p, gamma, sigma1 = _derived(delta, sigma)
        z = as_fraction(zeta) if zeta is not None else (sigma1 / sigma + gamma / eta) / 2
        b = ParameterBundle(s, eta, kappa, delta, sigma, p, gamma, sigma1, z, **extra)
        bad = violated(b)
        if not bad:
            return b
        last = bad[-1]
        sigma = 1 + (sigma - 1) * shrink
    raise SearchError(f"sigma search exhausted after {max_iter} iterations; last violated family: {last}",
                      best=last)
