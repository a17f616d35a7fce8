from fractions import Fraction

import pytest

from conftest import desk_bundle
from oracles import mp_pow, smallest_q_above
from qpcocycle import Frequency, construct_omega_eta
from qpcocycle.errors import InputError, WindowError
from qpcocycle.freqlib import cf_convergents
from qpcocycle.scheme import (build_schedule, ldt_range, ldt_window_holds, ms_holds, ns_holds, ns_range,
                              select_qtildes, smallest_certified_start, window_for)


def test_golden_hand_values(golden, bundle):
    assert [c.q for c in select_qtildes(golden, 8, 2, Fraction(6, 5))] == [34, 89, 233]


@pytest.mark.parametrize("start", [5, 8, 12, 20, 40])
def test_next_qtilde_is_smallest_above_power(golden, start):
    zeta = Fraction(6, 5)
    a, b = select_qtildes(golden, start, 1, zeta)
    qs = [c.q for c in cf_convergents(golden, 200)]
    assert b.q == smallest_q_above(qs, lambda: mp_pow(a.q, zeta))


def test_windows_by_hand(bundle):
    # 34**(21/20) ~ 40.8, 4 * 34**(12/11) / 2 ~ 93.9
    assert ns_range(34, bundle) == (41, 93)
    assert ns_range(89, bundle) == (112, 267)
    assert ns_range(233, bundle) == (307, 764)
    assert ns_holds(34, 41, bundle) and not ns_holds(34, 40, bundle) and not ns_holds(34, 94, bundle)
    lo, hi = ldt_range(89, bundle)
    assert lo == 112 and ldt_window_holds(89, hi, bundle) and not ldt_window_holds(89, hi + 1, bundle)


def test_default_constants_leave_small_windows_empty():
    b = desk_bundle(C2=1, sigma_start="3/2", zeta=None)
    lo, hi = ns_range(89, b)
    assert lo > hi


def test_window_for(golden, bundle):
    assert window_for(golden, 144, bundle).q == 89
    with pytest.raises(WindowError) as ei:
        window_for(golden, 1, bundle)
    assert ei.value.admissible


def test_desk_schedules(golden, bundle):
    expect = {34: [41, 574, 1722, 8610, 34440], 89: [112, 1568, 7840, 39200, 274400]}
    for idx, q in ((8, 34), (10, 89)):
        sch = build_schedule(golden, bundle, idx, 4, ns_range(q, bundle)[0], stop_on_failure=False)
        assert sch.qtildes[0] == q
        assert sch.Ns == expect[q]
        assert all(e.N == e.m * prev.N for prev, e in zip(sch.entries, sch.entries[1:]))


def test_failure_is_recorded(golden, bundle):
    sch = build_schedule(golden, bundle, 8, 4, 41)
    assert not sch.ok and "violated at s=1" in sch.failure
    assert sch.depth == 1


def test_bad_start_window(golden, bundle):
    sch = build_schedule(golden, bundle, 8, 2, 10)
    assert sch.failure.startswith("(Ns) violated at s=0")


@pytest.mark.parametrize("f", [Frequency.golden(), construct_omega_eta(0.5, 1.0, 80)], ids=["golden", "omega"])
def test_certified_depth_four(f, bundle):
    sch = smallest_certified_start(f, bundle, 4)
    assert sch.ok and sch.depth == 4
    for e in sch.entries[1:]:
        assert e.cert_qs and e.cert_Ns and e.cert_ms
    # every earlier start fails somewhere
    j0 = sch.entries[0].q_index
    for j in range(1, j0):
        q = cf_convergents(f, j)[-1].q
        lo, hi = ns_range(q, bundle)
        if lo <= hi:
            assert not build_schedule(f, bundle, j, 4, lo).ok


def test_golden_certified_start(golden, bundle):
    sch = smallest_certified_start(golden, bundle, 4)
    assert sch.entries[0].q_index == 40 and sch.qtildes[0] == 165580141


def test_ms_bounds_with_oracle(bundle):
    import mpmath
    q = 165580141
    with mpmath.workdps(60):
        lower = mp_pow(q, bundle.zeta * bundle.sigma - bundle.sigma1)
        upper = mpmath.exp(mpmath.mpf(1) / 100 * mp_pow(q, bundle.gamma))
    m_lo, m_hi = int(mpmath.floor(lower)) + 1, int(mpmath.floor(upper / 2))
    assert ms_holds(q, m_lo, bundle) and not ms_holds(q, m_lo - 1, bundle)
    assert ms_holds(q, m_hi - 1, bundle) and not ms_holds(q, m_hi + 1, bundle)


def test_json_roundtrip_is_stable(golden, bundle):
    a = smallest_certified_start(golden, bundle, 2).to_json()
    assert a == smallest_certified_start(golden, bundle, 2).to_json()


def test_negative_depth(golden, bundle):
    with pytest.raises(InputError):
        build_schedule(golden, bundle, 8, -1, 41)
