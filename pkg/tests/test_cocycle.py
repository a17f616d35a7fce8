import csv
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_cocycle
from oracles import amo_modes, brute_le, brute_log_norms, exact_constant_power_norm
from qpcocycle import (FixedPointAngle, Frequency, LogNormProduct, Mat2, MatrixFunction, QuadratureSpec,
                       finite_scale_le, le_sequence, pointwise_exponent, transfer_product)
from qpcocycle.cocycle import grid_log_norms, pairwise_sum, write_le_csv
from qpcocycle.errors import InputError, NumericError, PrecisionError

GOLDEN_ALPHA = (mpmath.sqrt(5) - 1) / 2
LN2 = math.log(2)


def test_identity_product_has_zero_log_norm():
    assert abs(LogNormProduct.from_matrices([Mat2.identity()]).log_norm()) < 1e-15


def test_diagonal_power():
    p = LogNormProduct.from_matrices([Mat2.diag(2.0, 0.5)] * 50)
    assert p.log_norm() == pytest.approx(50 * LN2, rel=1e-15)
    assert p.normalized.frobenius() == pytest.approx(1.0)


def test_long_products_do_not_overflow():
    p = LogNormProduct.from_matrices([Mat2.diag(1e10, 1e-10)] * 1000)
    assert p.log_norm() == pytest.approx(1000 * 10 * math.log(10), rel=1e-14)


def test_constant_schrodinger_against_exact_product(golden):
    A = MatrixFunction.constant(3.0, -1.0, 1.0, 0.0)
    got = transfer_product(A, golden, FixedPointAngle(0), 100).log_norm()
    ref = exact_constant_power_norm((3, -1, 1, 0), 100)
    assert got == pytest.approx(ref, rel=1e-9)


# -- pointwise ----------------------------------------------------------------------


@pytest.mark.parametrize("N", [1, 7, 100, 1000])
@pytest.mark.parametrize("theta", [0, 1, 12345, 2 ** 191 + 17])
def test_rotation_pointwise_zero(golden, N, theta):
    R = MatrixFunction.rotation()
    assert abs(pointwise_exponent(R, golden, FixedPointAngle(theta), N)) < 1e-12


@pytest.mark.parametrize("N", [1, 13, 400])
def test_diag_pointwise_ln2(golden, N):
    D = MatrixFunction.constant(2.0, 0.0, 0.0, 0.5)
    assert pointwise_exponent(D, golden, FixedPointAngle(99), N) == pytest.approx(LN2, rel=1e-15)


def test_amo_pointwise_matches_brute_force(golden, amo):
    got = pointwise_exponent(amo, golden, FixedPointAngle(0), 144)
    ref = brute_log_norms(amo_modes(0.0, 3.0), GOLDEN_ALPHA, 1, 144)[0] / 144
    assert got == pytest.approx(ref, abs=1e-11)


# -- averages ----------------------------------------------------------------------------


@pytest.mark.parametrize("N", [10, 100, 1000])
def test_rotation_le_zero(golden, N):
    assert abs(finite_scale_le(MatrixFunction.rotation(), golden, N).value) <= 1e-12


@pytest.mark.parametrize("N", [10, 100, 1000])
def test_diag_le_ln2(golden, N):
    v = finite_scale_le(MatrixFunction.constant(2.0, 0.0, 0.0, 0.5), golden, N).value
    assert abs(v - LN2) <= 1e-12


def test_free_schrodinger_limit(golden):
    A = MatrixFunction.schrodinger(3.0, MatrixFunction.rotation().a11 * 0.0)
    v = finite_scale_le(A, golden, 10_000).value
    assert abs(v - math.log((3 + math.sqrt(5)) / 2)) <= 1e-3


def test_amo_le_matches_brute_force(golden, amo):
    spec = QuadratureSpec(1024)
    for N in (1, 7, 144):
        got = finite_scale_le(amo, golden, N, spec).value
        assert got == pytest.approx(brute_le(amo_modes(0.0, 3.0), GOLDEN_ALPHA, 1024, N), abs=1e-12)


def test_amo_frozen_values(golden, amo):
    # recorded from the brute-force oracle at K = 4096
    vals = {r.N: r.value for r in le_sequence(amo, golden, [144, 288])}
    ref144 = brute_le(amo_modes(0.0, 3.0), GOLDEN_ALPHA, 4096, 144)
    assert vals[144] == pytest.approx(ref144, abs=1e-12)
    assert vals[144] == pytest.approx(1.1011665673, abs=1e-9)
    assert vals[288] <= vals[144] + 1e-9


@pytest.mark.parametrize("seed", [0, 5, 11])
def test_random_cocycle_matches_brute_force(golden, seed):
    A = random_cocycle(seed)
    modes = [{k: e.mode(k) for k in range(-e.K_max, e.K_max + 1)} for e in A.entries]
    got = finite_scale_le(A, golden, 50, QuadratureSpec(512)).value
    assert got == pytest.approx(brute_le(modes, GOLDEN_ALPHA, 512, 50), abs=1e-12)


def test_le_sequence_singleton(golden, amo):
    (r,) = le_sequence(amo, golden, [37])
    assert r.value == finite_scale_le(amo, golden, 37).value


def test_le_sequence_constant(golden):
    D = MatrixFunction.constant(2.0, 0.0, 0.0, 0.5)
    assert all(abs(r.value - LN2) < 1e-14 for r in le_sequence(D, golden, [10, 20, 40]))


def test_le_sequence_requires_increasing(golden, amo):
    with pytest.raises(InputError):
        le_sequence(amo, golden, [20, 10])


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 1000), st.integers(1, 300))
def test_nonnegativity(seed, N):
    A = random_cocycle(seed)
    logs = grid_log_norms(A, Frequency.golden(), [N], QuadratureSpec(256))[N]
    assert np.all(logs / N >= -1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_renormalization_invariance(golden, seed):
    A = random_cocycle(seed)
    spec = QuadratureSpec(256)
    every = grid_log_norms(A, golden, [500], spec, renorm_bits=0)[500]
    lazy = grid_log_norms(A, golden, [500], spec)[500]
    assert np.max(np.abs(every - lazy) / np.maximum(np.abs(lazy), 1.0)) < 1e-10


def test_thread_count_is_bit_identical(golden, amo):
    vals = []
    for t in (1, 3, 4, 8):
        spec = QuadratureSpec(1024, threads=t)
        vals.append([r.value for r in le_sequence(amo, golden, [10, 144, 500], spec)])
    assert all(v == vals[0] for v in vals)


def test_pairwise_sum():
    x = np.arange(1, 11, dtype=float)
    assert pairwise_sum(x) == 55.0
    assert pairwise_sum(np.array([1e16, 1.0, -1e16, 1.0])) == pairwise_sum(np.array([1e16, 1.0, -1e16, 1.0]))


@pytest.mark.filterwarnings("ignore:overflow encountered")
def test_overflow_reported_with_step(golden):
    A = MatrixFunction.constant(1e300, 0.0, 0.0, 1e-300)
    with pytest.raises(NumericError) as ei:
        finite_scale_le(A, golden, 3, QuadratureSpec(256))
    assert ei.value.step == 0


def test_precision_shortfall(golden, amo):
    with pytest.raises(PrecisionError):
        finite_scale_le(amo, golden, 2 ** 20, QuadratureSpec(256, precision_bits=70))


@pytest.mark.parametrize("K", [100, 128])
def test_quadrature_validation(K):
    with pytest.raises(InputError):
        QuadratureSpec(K)


def test_le_csv(tmp_path, golden):
    rs = le_sequence(MatrixFunction.rotation(), golden, [10, 100])
    p = tmp_path / "le.csv"
    write_le_csv(p, rs)
    rows = list(csv.reader(open(p)))
    assert rows[0] == ["N", "K", "L_N", "runtime_ms"]
    assert [r[0] for r in rows[1:]] == ["10", "100"]
    assert float(rows[1][2]) == rs[0].value
