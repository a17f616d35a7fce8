"""Trigonometric polynomials on the torus with Gevrey norms.

A :class:`GevreyFunction` stores Fourier coefficients ``f_k`` for
``|k| <= K_max`` in a dense complex array (index ``k + K_max``).  Cocycles are
2x2 matrices of such functions (:class:`MatrixFunction`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InputError, InvariantError
from .freqlib import FixedPointAngle

DEFAULT_C0_GRID = 4096
IMAG_TOL = 1e-8
DET_TOL = 1e-10


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GevreyFunction:
    coeffs: np.ndarray
    s: float = 1.5
    rho: float = 0.1
    truncation_bound: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 != 1:
            raise InputError("coefficient array must have odd length 2*K_max + 1")
        if not self.s > 1 or not self.rho > 0:
            raise InputError(f"need s > 1 and rho > 0, got s={self.s}, rho={self.rho}")
        object.__setattr__(self, "coeffs", _frozen(c))

    @classmethod
    def from_modes(cls, modes: dict, s: float = 1.5, rho: float = 0.1, **kw) -> "GevreyFunction":
        K = max((abs(int(k)) for k in modes), default=0)
        c = np.zeros(2 * K + 1, dtype=complex)
        for k, v in modes.items():
            c[int(k) + K] += v
        return cls(c, s, rho, **kw)

    @classmethod
    def constant(cls, value: float, s: float = 1.5, rho: float = 0.1) -> "GevreyFunction":
        return cls(np.array([value], dtype=complex), s, rho)

    @classmethod
    def cosine(cls, amplitude: float = 1.0, k: int = 1, s: float = 1.5, rho: float = 0.1) -> "GevreyFunction":
        """``amplitude * cos(2 pi k theta)``."""
        return cls.from_modes({k: amplitude / 2, -k: amplitude / 2}, s, rho)

    @classmethod
    def sine(cls, amplitude: float = 1.0, k: int = 1, s: float = 1.5, rho: float = 0.1) -> "GevreyFunction":
        return cls.from_modes({k: -0.5j * amplitude, -k: 0.5j * amplitude}, s, rho)

    @classmethod
    def from_cosine_series(cls, values: Sequence[float], s: float = 1.5, rho: float = 0.1) -> "GevreyFunction":
        """``values[0] + sum_k values[k] cos(2 pi k theta)``."""
        modes = {0: values[0]} if values else {}
        for k, v in enumerate(values[1:], start=1):
            modes[k] = v / 2
            modes[-k] = v / 2
        return cls.from_modes(modes or {0: 0.0}, s, rho)

    @property
    def K_max(self) -> int:
        return (self.coeffs.size - 1) // 2

    def mode(self, k: int) -> complex:
        K = self.K_max
        return complex(self.coeffs[k + K]) if abs(k) <= K else 0j

    def padded(self, K: int) -> np.ndarray:
        if K < self.K_max:
            raise ValueError("cannot pad to a smaller support")
        out = np.zeros(2 * K + 1, dtype=complex)
        out[K - self.K_max:K + self.K_max + 1] = self.coeffs
        return out

    def with_index(self, s: float, rho: float) -> "GevreyFunction":
        return GevreyFunction(self.coeffs, s, rho, self.truncation_bound)

    def symmetry_residue(self) -> float:
        """``max_k |f_{-k} - conj(f_k)|``; zero for real-valued functions."""
        c = self.coeffs
        return float(np.max(np.abs(c[::-1] - np.conj(c))))

    def _combine(self, other, sign):
        if isinstance(other, (int, float)):
            other = GevreyFunction.constant(other, self.s, self.rho)
        K = max(self.K_max, other.K_max)
        c = self.padded(K) + sign * other.padded(K)
        return GevreyFunction(c, self.s, self.rho, self.truncation_bound + other.truncation_bound)

    def __add__(self, other):
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return GevreyFunction(-self.coeffs, self.s, self.rho, self.truncation_bound)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return GevreyFunction(self.coeffs * other, self.s, self.rho, self.truncation_bound * abs(other))
        # pointwise product = coefficient convolution
        c = np.convolve(self.coeffs, other.coeffs)
        return GevreyFunction(c, self.s, self.rho)

    __rmul__ = __mul__

    def __call__(self, theta):
        return evaluate(self, theta)


def gevrey_weights(K: int, s: float, rho: float) -> np.ndarray:
    k = np.arange(-K, K + 1)
    return np.exp(rho * np.abs(2 * np.pi * k) ** (1.0 / s))


def gevrey_norm(f: GevreyFunction) -> float:
    """``sum_k |f_k| exp(rho |2 pi k|**(1/s))``."""
    terms = np.abs(f.coeffs) * gevrey_weights(f.K_max, f.s, f.rho)
    return math.fsum(terms.tolist())


def _as_float_angle(theta) -> float:
    if isinstance(theta, FixedPointAngle):
        return float(theta)
    return float(theta)


def evaluate(f: GevreyFunction, theta) -> float:
    """Real value of the Fourier sum at one angle (FixedPointAngle or float).

    For a FixedPointAngle the phases ``k*theta mod 1`` are reduced exactly
    before conversion to float.
    """
    K = f.K_max
    k = np.arange(-K, K + 1)
    if isinstance(theta, FixedPointAngle):
        P = theta.precision_bits
        mask = (1 << P) - 1
        phases = np.array([float(((int(kk) * theta.numerator) & mask) / (1 << P)) for kk in k])
    else:
        phases = k * float(theta)
    z = np.sum(f.coeffs * np.exp(2j * np.pi * phases))
    if abs(z.imag) > IMAG_TOL:
        raise InvariantError(
            f"imaginary residue {abs(z.imag):.3e} exceeds {IMAG_TOL}: conjugate symmetry broken"
        )
    return float(z.real)


def evaluate_grid(f: GevreyFunction, thetas: np.ndarray) -> np.ndarray:
    """Vectorized real evaluation ``f_0 + sum_{k>0} 2 Re(f_k e^{2 pi i k theta})``.

    Requires conjugate symmetry (checked to IMAG_TOL).
    """
    if f.symmetry_residue() > IMAG_TOL:
        raise InvariantError("conjugate symmetry broken; function is not real-valued")
    thetas = np.asarray(thetas, dtype=float)
    K = f.K_max
    out = np.full(thetas.shape, f.coeffs[K].real)
    for k in range(1, K + 1):
        c = f.coeffs[K + k]
        if c == 0:
            continue
        ph = 2 * np.pi * np.mod(k * thetas, 1.0)
        out += 2 * (c.real * np.cos(ph) - c.imag * np.sin(ph))
    return out


def random_gevrey(seed: int, s: float, rho: float, margin: float, K_max: int) -> GevreyFunction:
    """Random real trigonometric polynomial with ``|f_k| <= exp(-(rho+margin)|2 pi k|**(1/s))``.

    The recorded truncation bound is the envelope tail beyond ``K_max``.
    """
    if not margin > 0:
        raise InputError(f"margin must be positive, got {margin}")
    rng = np.random.default_rng(seed)
    k = np.arange(0, K_max + 1)
    env = np.exp(-(rho + margin) * np.abs(2 * np.pi * k) ** (1.0 / s))
    mag = rng.uniform(0.0, 1.0, K_max + 1) * env
    phase = rng.uniform(0.0, 2 * np.pi, K_max + 1)
    pos = mag * np.exp(1j * phase)
    pos[0] = mag[0] * (1 if rng.uniform() < 0.5 else -1)
    c = np.concatenate([np.conj(pos[:0:-1]), pos])
    return GevreyFunction(c, s, rho, truncation_bound=_envelope_tail(K_max, s, rho + margin))


def _envelope_tail(K: int, s: float, rate: float) -> float:
    total, k = 0.0, K + 1
    while True:
        t = 2 * math.exp(-rate * (2 * math.pi * k) ** (1.0 / s))
        total += t
        if t < 1e-18 * max(total, 1e-300) or k > K + 10**6:
            return total
        k += 1


# ---------------------------------------------------------------------------
# matrix valued maps


def op_norm(a, b, c, d):
    """Largest singular value of [[a, b], [c, d]] in closed form (works on arrays).

    ``sigma_max**2 = (F**2 + sqrt(F**4 - 4 det**2)) / 2`` with the discriminant
    factored as ``((a+d)**2 + (b-c)**2) * ((a-d)**2 + (b+c)**2)``, which gives
    ``sigma_max = (hypot(a+d, b-c) + hypot(a-d, b+c)) / 2`` without cancellation
    near orthogonal matrices.
    """
    return (np.hypot(a + d, b - c) + np.hypot(a - d, b + c)) / 2


@dataclass(frozen=True, eq=False)
class MatrixFunction:
    """``theta -> [[a11, a12], [a21, a22]]`` with shared Gevrey indices."""

    a11: GevreyFunction
    a12: GevreyFunction
    a21: GevreyFunction
    a22: GevreyFunction
    label: str = ""
    check_det: bool = field(default=True, repr=False)

    def __post_init__(self):
        idx = {(e.s, e.rho) for e in self.entries}
        if len(idx) != 1:
            raise InputError(f"entries carry different (s, rho): {sorted(idx)}")
        for e in self.entries:
            if e.symmetry_residue() > IMAG_TOL:
                raise InvariantError("matrix entry is not real-valued")
        if self.check_det:
            th = np.arange(64) / 64.0
            det = self.evaluate_grid(th)
            err = np.max(np.abs(det[0] * det[3] - det[1] * det[2] - 1.0))
            if err > DET_TOL:
                raise InputError(f"matrix function is not SL(2,R)-valued: max |det - 1| = {err:.3e}")

    @property
    def entries(self):
        return (self.a11, self.a12, self.a21, self.a22)

    @property
    def s(self) -> float:
        return self.a11.s

    @property
    def rho(self) -> float:
        return self.a11.rho

    def evaluate(self, theta) -> tuple:
        return tuple(evaluate(e, theta) for e in self.entries)

    def evaluate_grid(self, thetas) -> tuple:
        return tuple(evaluate_grid(e, thetas) for e in self.entries)

    def sup_norm(self, grid: int = DEFAULT_C0_GRID) -> float:
        """Grid maximum of the operator norm (a lower bound of the C0 norm)."""
        th = np.arange(grid) / grid
        return float(np.max(op_norm(*self.evaluate_grid(th))))

    def __sub__(self, other: "MatrixFunction") -> "MatrixFunction":
        return MatrixFunction(*(x - y for x, y in zip(self.entries, other.entries)), check_det=False)

    # -- constructors -------------------------------------------------------

    @classmethod
    def schrodinger(cls, E: float, V: GevreyFunction) -> "MatrixFunction":
        """``[[E - V, -1], [1, 0]]``."""
        s, rho = V.s, V.rho
        one = GevreyFunction.constant(1.0, s, rho)
        return cls(E - V, -one, one, GevreyFunction.constant(0.0, s, rho), label=f"schrodinger(E={E!r})")

    @classmethod
    def almost_mathieu(cls, E: float, lam: float, s: float = 1.5, rho: float = 0.1) -> "MatrixFunction":
        """Schrodinger cocycle with ``V = 2 lam cos(2 pi theta)``."""
        m = cls.schrodinger(E, GevreyFunction.cosine(2 * lam, 1, s, rho))
        return cls(*m.entries, label=f"amo(E={E!r}, lambda={lam!r})")

    @classmethod
    def constant(cls, a, b, c, d, s: float = 1.5, rho: float = 0.1) -> "MatrixFunction":
        k = GevreyFunction.constant
        return cls(k(a, s, rho), k(b, s, rho), k(c, s, rho), k(d, s, rho), label=f"constant({a!r},{b!r},{c!r},{d!r})")

    @classmethod
    def rotation(cls, s: float = 1.5, rho: float = 0.1) -> "MatrixFunction":
        """Rotation by the angle ``2 pi theta``."""
        cos = GevreyFunction.cosine(1.0, 1, s, rho)
        sin = GevreyFunction.sine(1.0, 1, s, rho)
        return cls(cos, -sin, sin, cos, label="rotation")

    @classmethod
    def from_coeffs(cls, entries: Sequence[dict], s: float = 1.5, rho: float = 0.1, label: str = "coeffs") -> "MatrixFunction":
        fs = [GevreyFunction.from_modes(m, s, rho) for m in entries]
        return cls(*fs, label=label)


def _check_same_index(A: MatrixFunction, B: MatrixFunction):
    if (A.s, A.rho) != (B.s, B.rho):
        raise InputError(f"mismatched Gevrey indices: {(A.s, A.rho)} vs {(B.s, B.rho)}")


def c0_distance(A: MatrixFunction, B: MatrixFunction, grid: int = DEFAULT_C0_GRID) -> float:
    """Grid maximum of ``||A(theta) - B(theta)||``; a lower bound of the sup norm."""
    _check_same_index(A, B)
    if grid < 256:
        raise InputError(f"grid must be >= 256, got {grid}")
    th = np.arange(grid) / grid
    ea, eb = A.evaluate_grid(th), B.evaluate_grid(th)
    return float(np.max(op_norm(*(x - y for x, y in zip(ea, eb)))))


def gevrey_distance(A: MatrixFunction, B: MatrixFunction) -> float:
    """Sum of the four entrywise Gevrey norms of ``A - B``."""
    _check_same_index(A, B)
    return math.fsum(gevrey_norm(x - y) for x, y in zip(A.entries, B.entries))


def matrix_gevrey_norm(A: MatrixFunction) -> float:
    return math.fsum(gevrey_norm(e) for e in A.entries)
