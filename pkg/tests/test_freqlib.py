import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import alpha_mp, cf_denominators, cf_value
from qpcocycle.errors import InputError, PrecisionError
from qpcocycle.freqlib import (FixedPointAngle, Frequency, alpha_fixed_point, cf_convergents,
                               classify_frequency, construct_omega_eta, convergents_until, orbit_angles,
                               required_bits)


def test_golden_with_zeroth_convergent():
    qs = [c.q for c in cf_convergents(Frequency.golden(), 5, include_zeroth=True)]
    assert qs == [1, 1, 2, 3, 5]


def test_silver_first_three():
    got = [c.as_fraction() for c in cf_convergents(Frequency.silver(), 3)]
    assert got == [Fraction(1, 2), Fraction(2, 5), Fraction(5, 12)]


def test_single_coefficient():
    (c,) = cf_convergents(Frequency.from_coeffs([7]), 1)
    assert (c.p, c.q) == (1, 7)


def test_exhausted_stream_names_shortfall():
    with pytest.raises(InputError, match="short by 2"):
        cf_convergents(Frequency.from_coeffs([1, 2, 3]), 5)


def test_fibonacci_denominators_far_out():
    convs = cf_convergents(Frequency.golden(), 300)
    a, b = 1, 1
    for c in convs:
        assert c.q == b
        a, b = b, a + b


@given(st.lists(st.integers(1, 50), min_size=1, max_size=40))
def test_convergents_match_topdown_evaluation(coeffs):
    convs = cf_convergents(Frequency.from_coeffs(coeffs), len(coeffs))
    for c, k in zip(convs, range(1, len(coeffs) + 1)):
        assert c.as_fraction() == cf_value(coeffs[:k])
    assert [c.q for c in convs] == cf_denominators(coeffs)


@given(st.lists(st.integers(1, 1000), min_size=2, max_size=30))
def test_determinant_identity(coeffs):
    convs = cf_convergents(Frequency.from_coeffs(coeffs), len(coeffs), include_zeroth=True)
    for a, b in zip(convs, convs[1:]):
        assert b.p * a.q - a.p * b.q == (-1) ** a.n
        assert b.q > a.q or (a.n == 0 and b.q == a.q)


def test_convergents_until():
    out = convergents_until(Frequency.golden(), 100)
    assert out[-1].q == 144 and out[-2].q == 89


# -- classification -----------------------------------------------------------


def test_golden_bounded_witness_is_two():
    rep = classify_frequency(cf_convergents(Frequency.golden(), 31), 0.5, 2.0)
    assert rep["bounded"].witness == pytest.approx(2.0)
    assert rep["bounded"].worst_index == 1
    assert rep["bounded"].holds(2.0) and not rep["bounded"].holds(1.9)


def test_classification_ratios_by_hand():
    convs = cf_convergents(Frequency.from_coeffs([3, 1, 4, 1, 5]), 5)
    rep = classify_frequency(convs, 0.5, 2.0)
    qs = [c.q for c in convs]
    ratios = [b / a for a, b in zip(qs, qs[1:])]
    assert rep["bounded"].witness == pytest.approx(max(ratios))
    om = max(math.log(b) / a ** 0.5 for a, b in zip(qs, qs[1:]))
    assert rep["Omega"].witness == pytest.approx(om)
    assert rep["Brjuno"].witness == pytest.approx(sum(math.log(b) / a for a, b in zip(qs, qs[1:])))


def test_first_violation_reports_index():
    convs = cf_convergents(Frequency.from_coeffs([1, 1, 50, 1, 1]), 5)
    rep = classify_frequency(convs, 0.5, 2.0)
    assert rep["bounded"].first_violation(10.0) == 2
    assert rep["bounded"].first_violation(1000.0) is None


@pytest.mark.parametrize("eta,tau", [(0.0, 2.0), (1.0, 2.0), (0.5, 1.0)])
def test_classification_rejects_bad_parameters(eta, tau):
    with pytest.raises(InputError):
        classify_frequency(cf_convergents(Frequency.golden(), 5), eta, tau)


def test_classification_needs_three():
    with pytest.raises(InputError):
        classify_frequency(cf_convergents(Frequency.golden(), 2), 0.5, 2.0)


# -- construction -----------------------------------------------------------------


def test_construct_small_depth():
    f = construct_omega_eta(0.5, 1.0, 5)
    assert f.prefix == (2, 1, 1, 1, 1)
    rep = classify_frequency(cf_convergents(f, 6), 0.5, 2.0)
    assert rep["Omega"].holds(1.0)


def test_construct_saturates_bound():
    f = construct_omega_eta(0.5, 1.0, 40)
    convs = cf_convergents(f, 41, include_zeroth=True)
    rep = classify_frequency(convs[1:], 0.5, 2.0)
    assert rep["Omega"].holds(1.0)
    assert rep["Omega"].witness > 0.99
    # marked positions are extremal: one more would break ln q_{n+1} <= q_n**eta
    assert f.marked
    for n in f.marked:
        q, qp = convs[n].q, convs[n - 1].q if n else 0
        a = f.coeff(n + 1)
        assert math.log(a * q + qp) <= q ** 0.5
        assert math.log((a + 1) * q + qp) > q ** 0.5


def test_construct_is_seeded():
    assert construct_omega_eta(0.5, 1.0, 60, seed=3) == construct_omega_eta(0.5, 1.0, 60, seed=3)


def test_construct_rejects_bad_eta():
    with pytest.raises(InputError):
        construct_omega_eta(1.2, 1.0, 5)


# -- exact angles ---------------------------------------------------------------


def test_alpha_fixed_point_matches_high_precision_value():
    P = 192
    num = alpha_fixed_point(Frequency.golden(), P)
    import mpmath
    with mpmath.workdps(100):
        exact = (mpmath.sqrt(5) - 1) / 2 * mpmath.mpf(2) ** P
        assert abs(num - exact) <= 1


def test_alpha_fixed_point_needs_long_stream():
    with pytest.raises(PrecisionError):
        alpha_fixed_point(Frequency.from_coeffs([1] * 20), 192)


@settings(max_examples=30)
@given(st.integers(0, 2 ** 64), st.integers(1, 500))
def test_orbit_angles_are_exact_modular_sums(start, N):
    f = Frequency.silver()
    P = 192
    th = FixedPointAngle(start, P)
    ang = orbit_angles(f, th, N, P)
    a = alpha_fixed_point(f, P)
    assert [x.numerator for x in ang] == [(start + j * a) % (1 << P) for j in range(N)]


def test_required_bits_grows_with_N():
    # N - 1 steps of alpha plus 64 guard bits
    assert required_bits(2) == 65
    assert required_bits(2 ** 20 + 1) == 21 + 64
    assert all(required_bits(n) <= required_bits(n + 1) for n in range(1, 5000))


def test_fixed_point_fraction_roundtrip():
    th = FixedPointAngle.from_fraction(Fraction(3, 8), 64)
    assert th.as_fraction() == Fraction(3, 8)
    assert float(th) == 0.375
    assert FixedPointAngle.grid_point(3, 8, 64) == th


def test_alpha_value_agrees_with_oracle():
    f = Frequency.from_coeffs([2, 5, 1, 7], period=[3])
    coeffs = [2, 5, 1, 7] + [3] * 40
    assert float(f.value()) == pytest.approx(float(alpha_mp(coeffs)), abs=1e-15)
