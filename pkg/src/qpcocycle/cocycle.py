"""Transfer matrices and finite-scale Lyapunov exponents.

The product ``A_N(theta) = A(theta + (N-1) alpha) ... A(theta)`` is formed
for every grid angle at once.  Orbit phases ``k * j * alpha mod 1`` are
reduced in exact integer arithmetic; only the final reduced phase is rounded
to a float.  Growth is controlled by rescaling with exact powers of two, so
where (and how often) the rescaling happens never changes the mantissas of
the running product.

All per-angle arithmetic inside the step loop is plain IEEE +, -, *, and
ldexp, which are exactly rounded elementwise; the grid can therefore be cut
into chunks for threads without changing a single bit of the result.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InputError, NumericError
from .freqlib import (DEFAULT_PRECISION_BITS, FixedPointAngle, Frequency,
                      alpha_fixed_point, required_bits)
from .gevrey import MatrixFunction, op_norm

THREADS_ENV = "QPCOCYCLE_THREADS"
RENORM_BITS = 64
LN2 = math.log(2.0)


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class Mat2:
    a: float
    b: float
    c: float
    d: float

    def __matmul__(self, o: "Mat2") -> "Mat2":
        return Mat2(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                    self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def frobenius(self) -> float:
        return math.sqrt(self.a ** 2 + self.b ** 2 + self.c ** 2 + self.d ** 2)

    def op_norm(self) -> float:
        return float(op_norm(self.a, self.b, self.c, self.d))

    def scaled(self, t: float) -> "Mat2":
        return Mat2(self.a * t, self.b * t, self.c * t, self.d * t)

    @classmethod
    def identity(cls) -> "Mat2":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def diag(cls, x: float, y: float) -> "Mat2":
        return cls(x, 0.0, 0.0, y)

    @classmethod
    def rotation(cls, phi: float) -> "Mat2":
        c, s = math.cos(phi), math.sin(phi)
        return cls(c, -s, s, c)


@dataclass(frozen=True)
class LogNormProduct:
    """``product = exp(log_scale) * normalized`` with unit-Frobenius ``normalized``."""

    normalized: Mat2
    log_scale: float

    def log_norm(self) -> float:
        return self.log_scale + math.log(self.normalized.op_norm())

    @classmethod
    def from_matrices(cls, mats: Sequence[Mat2]) -> "LogNormProduct":
        """Left-to-right accumulation ``M_n ... M_1`` of an explicit list."""
        P, shift = Mat2.identity(), 0
        for M in mats:
            P = M @ P
            e = math.frexp(P.frobenius())[1]
            if e > RENORM_BITS:
                P = P.scaled(2.0 ** -e)
                shift += e
        F = P.frobenius()
        return cls(P.scaled(1.0 / F), shift * LN2 + math.log(F))


@dataclass(frozen=True)
class QuadratureSpec:
    """Uniform grid of ``K`` dyadic angles ``i/K`` and the angle precision."""

    K: int = 4096
    precision_bits: int = DEFAULT_PRECISION_BITS
    threads: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.K < 256:
            raise InputError(f"quadrature grid K must be >= 256, got {self.K}")
        if self.K & (self.K - 1):
            raise InputError(f"quadrature grid K must be a power of two, got {self.K}")
        if (1 << self.precision_bits) < self.K:
            raise InputError("precision_bits too small for the grid")

    def grid(self) -> list:
        shift = self.precision_bits - (self.K.bit_length() - 1)
        return [i << shift for i in range(self.K)]


@dataclass(frozen=True)
class FiniteScaleLE:
    N: int
    value: float
    quadrature: QuadratureSpec
    cocycle_id: str = ""
    frequency_id: str = ""
    runtime_ms: float = field(default=0.0, compare=False)


# ---------------------------------------------------------------------------
# kernel


class _Entry:
    """One matrix entry as ``c0 + sum_k (alpha_k(j) cos g_k + beta_k(j) sin g_k)``."""

    def __init__(self, fn):
        K = fn.K_max
        self.c0 = float(fn.coeffs[K].real)
        self.modes = [(k, complex(fn.coeffs[K + k])) for k in range(1, K + 1) if fn.coeffs[K + k] != 0]


def _reduced_phase(num: int, P: int) -> float:
    # exact truncation of the P-bit fraction to 53 bits
    if P > 53:
        return (num >> (P - 53)) * 2.0 ** -53
    return num * 2.0 ** -P


class _Kernel:
    def __init__(self, A: MatrixFunction, f: Frequency, N: int, P: int):
        self.entries = [_Entry(e) for e in A.entries]
        self.ks = sorted({k for e in self.entries for k, _ in e.modes})
        self.P = P
        self.N = N
        mask = (1 << P) - 1
        # per-step scalar tables cos/sin(2 pi k x_j)
        cx = np.empty((N, len(self.ks)))
        sx = np.empty((N, len(self.ks)))
        if self.ks and N > 0:
            a = alpha_fixed_point(f, P) if N > 1 else 0
            x = 0
            for j in range(N):
                for t, k in enumerate(self.ks):
                    ph = 2 * math.pi * _reduced_phase((k * x) & mask, P)
                    cx[j, t] = math.cos(ph)
                    sx[j, t] = math.sin(ph)
                x = (x + a) & mask
        col = {k: t for t, k in enumerate(self.ks)}
        self.coef = []
        for e in self.entries:
            per = []
            for k, c in e.modes:
                t = col[k]
                al = 2 * (c.real * cx[:, t] - c.imag * sx[:, t])
                be = 2 * (-c.real * sx[:, t] - c.imag * cx[:, t])
                per.append((t, al, be))
            self.coef.append(per)

    def base_tables(self, starts: Sequence[int]):
        mask = (1 << self.P) - 1
        cg = np.empty((len(self.ks), len(starts)))
        sg = np.empty((len(self.ks), len(starts)))
        for t, k in enumerate(self.ks):
            ph = np.array([_reduced_phase((k * s) & mask, self.P) for s in starts]) * (2 * math.pi)
            cg[t] = np.cos(ph)
            sg[t] = np.sin(ph)
        return cg, sg

    def run(self, starts: Sequence[int], checkpoints: Sequence[int], renorm_bits: int = RENORM_BITS):
        """Log-norms ``ln ||A_n(theta)||`` at each checkpoint n, for each start."""
        cg, sg = self.base_tables(starts)
        n_pts = len(starts)
        p11 = np.ones(n_pts)
        p12 = np.zeros(n_pts)
        p21 = np.zeros(n_pts)
        p22 = np.ones(n_pts)
        shift = np.zeros(n_pts, dtype=np.int64)
        thr = 2.0 ** (2 * renorm_bits)
        out = {}
        want = set(checkpoints)
        consts = [e.c0 if not e.modes else None for e in self.entries]
        for j in range(self.N):
            vals = []
            for e, per, c in zip(self.entries, self.coef, consts):
                if c is not None:
                    vals.append(c)
                    continue
                v = e.c0
                for t, al, be in per:
                    v = v + al[j] * cg[t] + be[j] * sg[t]
                vals.append(v)
            e11, e12, e21, e22 = vals
            p11, p12, p21, p22 = (_lin(e11, p11, e12, p21), _lin(e11, p12, e12, p22),
                                  _lin(e21, p11, e22, p21), _lin(e21, p12, e22, p22))
            f2 = p11 * p11 + p12 * p12 + p21 * p21 + p22 * p22
            top = f2.max()
            if not top < math.inf:
                bad = int(np.argmax(~np.isfinite(f2)))
                raise NumericError(f"non-finite transfer matrix entry at step {j} (point {bad})", step=j)
            if top > thr:
                idx = np.nonzero(f2 > thr)[0]
                e = np.frexp(f2[idx])[1] // 2
                p11[idx] = np.ldexp(p11[idx], -e)
                p12[idx] = np.ldexp(p12[idx], -e)
                p21[idx] = np.ldexp(p21[idx], -e)
                p22[idx] = np.ldexp(p22[idx], -e)
                shift[idx] += e
            if j + 1 in want:
                out[j + 1] = (p11.copy(), p12.copy(), p21.copy(), p22.copy(), shift.copy())
        return out


def _lin(e1, x, e2, y):
    """``e1*x + e2*y`` skipping multiplications by scalar 0 and +-1."""
    u = _scale(e1, x)
    v = _scale(e2, y)
    if u is None:
        return v if v is not None else np.zeros_like(x)
    if v is None:
        return u
    return u + v


def _scale(e, x):
    if isinstance(e, float):
        if e == 0.0:
            return None
        if e == 1.0:
            return x
        if e == -1.0:
            return -x
    return e * x


def _finish(state) -> np.ndarray:
    p11, p12, p21, p22, shift = state
    return shift * LN2 + np.log(op_norm(p11, p12, p21, p22))


def _chunks(n: int, parts: int):
    parts = max(1, min(parts, n))
    bounds = [n * i // parts for i in range(parts + 1)]
    return [(bounds[i], bounds[i + 1]) for i in range(parts)]


def grid_log_norms(A: MatrixFunction, f: Frequency, Ns: Sequence[int], spec: QuadratureSpec,
                   starts: Sequence[int] | None = None, renorm_bits: int = RENORM_BITS) -> dict:
    """``{N: array of ln ||A_N(theta_i)||}`` for all grid angles, one shared pass."""
    Ns = sorted(set(int(n) for n in Ns))
    if not Ns or Ns[0] < 1:
        raise InputError("scales must be positive")
    need = required_bits(Ns[-1])
    if spec.precision_bits < need:
        from .errors import PrecisionError

        raise PrecisionError(f"N={Ns[-1]} needs {need} angle bits, spec has {spec.precision_bits}", need)
    if starts is None:
        starts = spec.grid()
    kern = _Kernel(A, f, Ns[-1], spec.precision_bits)
    threads = spec.threads or default_threads()
    pieces = _chunks(len(starts), threads)

    def work(lo_hi):
        lo, hi = lo_hi
        raw = kern.run(starts[lo:hi], Ns, renorm_bits)
        return {n: raw[n] for n in Ns}

    if len(pieces) == 1:
        parts = [work(pieces[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(pieces)) as ex:
            parts = list(ex.map(work, pieces))
    out = {}
    for n in Ns:
        # gather first, then one elementwise log over the whole grid
        states = [p[n] for p in parts]
        merged = tuple(np.concatenate([s[i] for s in states]) for i in range(5))
        out[n] = _finish(merged)
    return out


def pairwise_sum(x: np.ndarray) -> float:
    """Fixed-shape pairwise tree sum (zero-padded to a power of two)."""
    x = np.asarray(x, dtype=float)
    n = 1
    while n < x.size:
        n *= 2
    buf = np.zeros(n)
    buf[:x.size] = x
    while buf.size > 1:
        buf = buf[0::2] + buf[1::2]
    return float(buf[0])


# ---------------------------------------------------------------------------
# public operations


def transfer_product(A: MatrixFunction, f: Frequency, theta: FixedPointAngle, N: int,
                     spec: QuadratureSpec = QuadratureSpec(), renorm_bits: int = RENORM_BITS) -> LogNormProduct:
    """``A_N(theta)`` as a normalized matrix plus its log scale."""
    if N < 1:
        raise InputError(f"N must be >= 1, got {N}")
    start = theta.rescale(spec.precision_bits).numerator
    kern = _Kernel(A, f, N, spec.precision_bits)
    p11, p12, p21, p22, shift = kern.run([start], [N], renorm_bits)[N]
    M = Mat2(float(p11[0]), float(p12[0]), float(p21[0]), float(p22[0]))
    F = M.frobenius()
    return LogNormProduct(M.scaled(1.0 / F), int(shift[0]) * LN2 + math.log(F))


def pointwise_exponent(A: MatrixFunction, f: Frequency, theta: FixedPointAngle, N: int,
                       spec: QuadratureSpec = QuadratureSpec()) -> float:
    """``u_N(theta) = (1/N) ln ||A_N(theta)||``."""
    return transfer_product(A, f, theta, N, spec).log_norm() / N


def finite_scale_le(A: MatrixFunction, f: Frequency, N: int,
                    spec: QuadratureSpec = QuadratureSpec()) -> FiniteScaleLE:
    """Rectangle-rule ``L_N`` on the grid ``i/K``."""
    return le_sequence(A, f, [N], spec)[0]


def le_from_log_norms(logn: np.ndarray, N: int) -> float:
    return pairwise_sum(logn / N) / logn.size


def le_sequence(A: MatrixFunction, f: Frequency, Ns: Sequence[int],
                spec: QuadratureSpec = QuadratureSpec()) -> list:
    """``L_N`` for each N of an increasing list, sharing one product pass."""
    Ns = [int(n) for n in Ns]
    if not Ns:
        raise InputError("Ns must be nonempty")
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise InputError("Ns must be strictly increasing")
    t0 = time.perf_counter()
    logs = grid_log_norms(A, f, Ns, spec)
    ms = (time.perf_counter() - t0) * 1e3
    return [FiniteScaleLE(n, le_from_log_norms(logs[n], n), spec, A.label, f.label, ms) for n in Ns]


def le_values(A: MatrixFunction, f: Frequency, Ns: Sequence[int], spec: QuadratureSpec) -> dict:
    """``{N: L_N}`` for an arbitrary collection of scales."""
    uniq = sorted(set(int(n) for n in Ns))
    return {r.N: r.value for r in le_sequence(A, f, uniq, spec)}


def write_le_csv(path, results: Sequence[FiniteScaleLE]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["N", "K", "L_N", "runtime_ms"])
        for r in results:
            w.writerow([r.N, r.quadrature.K, f"{r.value:.17g}", f"{r.runtime_ms:.3f}"])
