import math

import numpy as np
import pytest

from mtcap.quadrature import ConvergenceError, gk_integrate


@pytest.mark.parametrize("deg", [0, 5, 13, 22])
def test_polynomials_exact(deg):
    val, err = gk_integrate(lambda x: x**deg, 0.0, 1.0, rtol=1e-14)
    assert val == pytest.approx(1 / (deg + 1), rel=1e-14)


def test_smooth_and_peaked():
    val, _ = gk_integrate(np.exp, 0.0, 3.0, rtol=1e-13)
    assert val == pytest.approx(math.e**3 - 1, rel=1e-13)
    val, _ = gk_integrate(lambda x: 1 / (1e-4 + x**2), -1.0, 1.0, rtol=1e-11)
    assert val == pytest.approx(2 * math.atan(100) * 100, rel=1e-10)


def test_breakpoint_kink_and_reversed_limits():
    f = lambda x: np.abs(x - 0.3)
    val, _ = gk_integrate(f, 0.0, 1.0, breakpoints=(0.3,))
    assert val == pytest.approx(0.045 + 0.245, rel=1e-14)
    rev, _ = gk_integrate(f, 1.0, 0.0, breakpoints=(0.3,))
    assert rev == pytest.approx(-val)
    assert gk_integrate(f, 2.0, 2.0) == (0.0, 0.0)


def test_reports_non_convergence():
    with pytest.raises(ConvergenceError):
        gk_integrate(lambda x: np.sign(np.sin(1 / x)), 1e-9, 1.0, rtol=1e-14, max_intervals=50)
