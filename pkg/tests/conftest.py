import numpy as np
import pytest

from qpcocycle import Frequency, MatrixFunction, QuadratureSpec, random_gevrey
from qpcocycle.freqlib import cf_convergents
from qpcocycle.scheme import select_parameters


def random_cocycle(seed: int) -> MatrixFunction:
    """Schrodinger cocycle with a seeded random Gevrey potential and energy."""
    rng = np.random.default_rng(10_000 + seed)
    V = random_gevrey(seed, 1.5, 0.1, 0.2, 6) * 4.0
    return MatrixFunction.schrodinger(float(rng.uniform(-2, 2)), V)


def desk_bundle(kappa="1/200", **kw):
    """Bundle whose windows are nonempty at q ~ 10..1000.

    sigma close to 1 and C2 = 4 widen ``(C1 q^sigma, C2 q^sigma1 / 2)``.
    """
    args = dict(sigma_start="21/20", zeta="6/5", C2=4)
    args.update(kw)
    return select_parameters("7/5", "3/10", kappa, **args)


@pytest.fixture(scope="session")
def golden():
    return Frequency.golden()


@pytest.fixture(scope="session")
def amo():
    return MatrixFunction.almost_mathieu(0.0, 3.0, 1.4, 0.1)


@pytest.fixture(scope="session")
def bundle():
    return desk_bundle()


@pytest.fixture(scope="session")
def spec():
    return QuadratureSpec(4096)


def convergent_with_q(f, q):
    return next(c for c in cf_convergents(f, 60) if c.q == q)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "SUMMARY", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.SUMMARY):
        terminalreporter.write_line(mod.SUMMARY[n])
