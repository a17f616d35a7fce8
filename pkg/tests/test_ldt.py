import csv
import json
import math

import numpy as np
import pytest

from conftest import convergent_with_q
from qpcocycle import MatrixFunction, QuadratureSpec
from qpcocycle.cocycle import grid_log_norms
from qpcocycle.errors import InputError, WindowError
from qpcocycle.ldt import (LdtPoint, calibrate_ldt, deviation_measure, fit_ldt_constant, window_midpoint,
                           write_residual_csv)

SPEC = QuadratureSpec(1024)


def test_planted_fit_recovers_c():
    qs = [34, 89, 233, 610, 1597]
    pts = [LdtPoint(q, 100, math.exp(-2 * q ** 0.4), 4096) for q in qs]
    cal = fit_ldt_constant(pts, 0.4)
    assert abs(cal.c - 2.0) < 1e-6
    assert cal.residual_norm < 1e-9 and cal.ok


def test_zero_fractions_become_ceiling():
    pts = [LdtPoint(34, 1, 0.2, 4096), LdtPoint(89, 1, 0.01, 4096), LdtPoint(233, 1, 0.0, 4096)]
    cal = fit_ldt_constant(pts, 0.4)
    assert cal.c_ceiling == pytest.approx(math.log(4096) / 233 ** 0.4)
    assert len(cal.fitted) == 2
    assert cal.floor_consistent == (cal.c <= cal.c_ceiling)


def test_all_zero_is_degenerate():
    cal = fit_ldt_constant([LdtPoint(q, 1, 0.0, 256) for q in (3, 5, 8)], 0.4)
    assert cal.degenerate and not cal.ok


def test_fit_needs_three():
    with pytest.raises(InputError):
        fit_ldt_constant([LdtPoint(3, 1, 0.1, 256)] * 2, 0.4)


def test_deviation_count_matches_direct(golden, amo, bundle):
    r = deviation_measure(amo, golden, 144, 0.1, bundle, SPEC)
    assert r.q == 89
    u = grid_log_norms(amo, golden, [144], SPEC)[144] / 144
    assert r.count == int(np.sum(np.abs(u - u.mean()) > 0.1))
    assert r.measured_fraction == r.count / 1024
    assert r.bound == pytest.approx(math.exp(-0.1 * 89 ** 0.4))
    assert json.loads(r.to_json())["q"] == "89"


def test_rotation_never_deviates(golden, bundle):
    r = deviation_measure(MatrixFunction.rotation(), golden, 144, 1e-3, bundle, SPEC)
    assert r.count == 0 and r.boundary_cells == 0


def test_window_enforced_unless_waived(golden, amo, bundle):
    with pytest.raises(WindowError):
        deviation_measure(amo, golden, 10, 0.1, bundle, SPEC, q=89)
    r = deviation_measure(amo, golden, 10, 0.1, bundle, SPEC, q=89, waive_window=True)
    assert r.window_waived and r.q == 89
    r = deviation_measure(amo, golden, 1, 0.1, bundle, SPEC, waive_window=True)
    assert r.q is None and r.bound is None


def test_monte_carlo_is_seeded(golden, amo, bundle):
    a = deviation_measure(amo, golden, 144, 0.1, bundle, SPEC, method="monte_carlo", samples=512, seed=3)
    b = deviation_measure(amo, golden, 144, 0.1, bundle, SPEC, method="monte_carlo", samples=512, seed=3)
    g = deviation_measure(amo, golden, 144, 0.1, bundle, SPEC)
    assert a == b and a.samples == 512
    assert abs(a.measured_fraction - g.measured_fraction) < 0.1


@pytest.mark.parametrize("kw", [dict(kappa=0.0), dict(N=0), dict(method="sobol")])
def test_bad_arguments(golden, amo, bundle, kw):
    args = dict(N=144, kappa=0.1)
    args.update(kw)
    with pytest.raises(InputError):
        deviation_measure(amo, golden, args["N"], args["kappa"], bundle, SPEC, method=kw.get("method", "grid"))


def test_window_midpoints(bundle):
    assert [window_midpoint(q, bundle) for q in (34, 89, 233)] == [114, 324, 918]


def test_calibration_residual_csv(tmp_path, golden, amo, bundle):
    cal = calibrate_ldt(amo, golden, [convergent_with_q(golden, q) for q in (34, 89, 233)], 0.02, bundle,
                        QuadratureSpec(8192))
    fr = [r.measured_fraction for r in cal.reports]
    assert fr == sorted(fr, reverse=True)
    assert fr[0] == pytest.approx(0.1738, abs=1e-4)
    p = tmp_path / "res.csv"
    write_residual_csv(p, cal)
    rows = list(csv.reader(open(p)))
    assert rows[0] == ["q", "N", "fraction", "neg_log_fraction", "fitted_bound"]
    assert [r[0] for r in rows[1:]] == ["34", "89", "233"]
