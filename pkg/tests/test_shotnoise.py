import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtcap.golden import load_golden
from mtcap.model import NetworkConfig
from mtcap.montecarlo import estimate_interference
from mtcap.pointprocess import truncation_radius
from mtcap.shotnoise import (
    ShotNoiseQuery,
    campbell_mean,
    connected_intensity_bound,
    d_hat,
    delta1,
    delta2,
    laplace_functional,
    laplace_jet,
    laplace_pgfl_direct,
    mgf,
    mgf_pgfl_direct,
    per_attempt_success,
    psi,
)

GOLDEN = load_golden()


def _window(w):
    return math.inf if w == "inf" else float(w)


def test_delta1_rayleigh_closed_values():
    assert delta1(ShotNoiseQuery(phi=1.0)) == pytest.approx(math.pi / 4, rel=1e-12)
    assert delta1(ShotNoiseQuery(phi=16.0)) == pytest.approx(2 * (math.pi - 2 * math.atan(0.25)), rel=1e-12)


@pytest.mark.parametrize("m", [1, 2, 4])
def test_delta1_empty_window(m):
    assert delta1(ShotNoiseQuery(phi=3.0, window=1.0, m=m)) == 0.0


@pytest.mark.parametrize("row", GOLDEN["delta1"], ids=lambda r: f"m{r['m']}-phi{r['phi']}")
@pytest.mark.parametrize("method", ["beta", "quad"])
def test_delta1_golden(row, method):
    q = ShotNoiseQuery(phi=row["phi"], window=_window(row["window"]), m=row["m"], alpha=row["alpha"], d=row["d"])
    tol = GOLDEN["rtol"] if method == "beta" else 1e-8
    assert delta1(q, method) == pytest.approx(row["value"], rel=tol)


@pytest.mark.parametrize("row", GOLDEN["delta2"], ids=lambda r: f"m{r['m']}")
def test_delta2_golden_both_forms(row):
    q = ShotNoiseQuery(phi=row["phi"], window=row["window"], m=row["m"], alpha=row["alpha"], d=row["d"])
    assert delta2(q, "printed") == pytest.approx(row["printed"], rel=1e-10)
    assert delta2(q, "pgfl") == pytest.approx(row["pgfl"], rel=1e-10)
    # the generating-functional form is the one matching the direct radial integral
    assert row["pgfl"] == pytest.approx(row["mgf_exponent"], rel=1e-12)
    assert row["printed"] < 0 < row["pgfl"]


def test_delta2_domain_and_empty_window():
    with pytest.raises(ValueError, match="pole"):
        delta2(ShotNoiseQuery(phi=1.0, window=2.0, m=1))
    with pytest.raises(ValueError):
        delta2(ShotNoiseQuery(phi=0.5, window=math.inf, m=1), "printed")
    assert delta2(ShotNoiseQuery(phi=0.5, window=1.0, m=1)) == 0.0


def test_mgf_values():
    row = GOLDEN["delta2"][0]
    q = ShotNoiseQuery(phi=0.5, window=2.0, lam=0.01, m=1)
    assert mgf(q) == pytest.approx(math.exp(math.pi * 0.01 * row["pgfl"]), rel=1e-10)
    assert mgf(q) == pytest.approx(mgf_pgfl_direct(0.5, 0.01, 1, 4.0, 2, 2.0), rel=1e-8)
    assert mgf(ShotNoiseQuery(phi=0.5, window=2.0, lam=0.0)) == 1.0
    assert mgf(ShotNoiseQuery(phi=1e-9, window=2.0, lam=0.01)) == pytest.approx(1.0, abs=1e-9)


def test_laplace_example_and_unit_at_zero_density():
    q = ShotNoiseQuery(phi=16.0, lam=0.01)
    assert laplace_functional(q) == pytest.approx(0.84654, abs=1e-5)
    assert laplace_functional(ShotNoiseQuery(phi=16.0)) == 1.0
    assert laplace_pgfl_direct(16.0, 0.0, 1, 4.0, 2) == 1.0
    assert laplace_pgfl_direct(16.0, 0.01, 1, 4.0, 2) == pytest.approx(
        math.exp(-0.01 * 4 * math.pi * (math.pi / 2 - math.atan(0.25))), rel=1e-10)


@pytest.mark.parametrize("phi", np.geomspace(0.1, 100, 7))
@pytest.mark.parametrize("m", [1, 2, 3, 5])
def test_closed_form_equals_generating_functional(phi, m):
    q = ShotNoiseQuery(phi=phi, lam=0.01, m=m)
    assert laplace_functional(q) == pytest.approx(laplace_pgfl_direct(phi, 0.01, m, 4.0, 2), rel=1e-9)


def test_generating_functional_matches_simulation_m2(rayleigh):
    cfg = rayleigh.replace(m=2)
    window = truncation_radius(0.01, 4.0, 2, 1e-4)
    phis = [1.0, 4.0, 16.0]
    st_ = estimate_interference(cfg, phis, 100_000, 17, r_sim=window)
    for i, phi in enumerate(phis):
        ref = laplace_pgfl_direct(phi, 0.01, 2, 4.0, 2, window)
        assert abs(st_.laplace[i] - ref) <= 3 * st_.laplace_se[i]


def test_d_hat_rayleigh():
    assert d_hat(1, 0.5) == pytest.approx(math.pi / 2, rel=1e-14)


@pytest.mark.parametrize("row", GOLDEN["psi"], ids=lambda r: f"order{r['order']}")
def test_psi_golden(row):
    v = psi(row["phi"], row["order"], row["lambda_t"], row["m"], row["alpha"], row["d"])
    assert v == pytest.approx(row["value"], rel=GOLDEN["rtol"])


def test_psi_order_zero():
    assert psi(16.0, 0, 0.01, 1, 4.0, 2) == pytest.approx(0.052909, abs=1e-6)
    assert psi(4.0, 0, 0.0, 1, 4.0, 2) == 0.25


@pytest.mark.parametrize("m", [1, 2, 3, 4])
@pytest.mark.parametrize("phi", [0.7, 5.0, 30.0])
def test_jet_matches_finite_differences(m, phi):
    order = m - 1
    lam = 0.02

    def f(x):
        return laplace_functional(ShotNoiseQuery(phi=x, lam=lam, m=m)) / x

    h = 1e-2 * phi
    # fourth-order central differences of order 0..3
    pts = {j: f(phi + j * h) for j in range(-3, 4)}
    fd = [pts[0],
          (-pts[2] + 8 * pts[1] - 8 * pts[-1] + pts[-2]) / (12 * h),
          (-pts[2] + 16 * pts[1] - 30 * pts[0] + 16 * pts[-1] - pts[-2]) / (12 * h**2),
          (-pts[3] + 8 * pts[2] - 13 * pts[1] + 13 * pts[-1] - 8 * pts[-2] + pts[-3]) / (8 * h**3)]
    want = (-phi) ** order / math.factorial(order) * fd[order]
    assert psi(phi, order, lam, m, 4.0, 2) == pytest.approx(want, rel=1e-4)


@pytest.mark.parametrize("m", [1, 3, 6])
def test_jet_coefficient_zero_is_function_value(m):
    c = np.array([0.5, 3.0, 40.0])
    jet = laplace_jet(c, m - 1, 0.01, m, 4.0, 2)
    direct = [laplace_functional(ShotNoiseQuery(phi=x, lam=0.01, m=m)) for x in c]
    np.testing.assert_allclose(jet.coefficients[0], direct, rtol=1e-12)


def test_success_rayleigh_identity(rayleigh):
    r = np.array([1.0, 2.0, 3.5, 7.0])
    p = per_attempt_success(r, rayleigh)
    lap = [laplace_functional(ShotNoiseQuery(phi=x**4, lam=0.01)) for x in r]
    np.testing.assert_allclose(p, lap, rtol=1e-13)
    assert per_attempt_success(2.0, rayleigh) == pytest.approx(0.84654, abs=1e-5)
    assert per_attempt_success(5.0, rayleigh.replace(lambda_t=0.0)) == 1.0


@pytest.mark.parametrize("m", [1, 2, 3, 5])
def test_success_non_increasing_in_r(rayleigh, m):
    p = per_attempt_success(np.arange(1.0, 11.0), rayleigh.replace(m=m))
    assert np.all(np.diff(p) <= 1e-12)
    assert np.all((p >= 0) & (p <= 1))


def test_clip_policies(rayleigh):
    assert per_attempt_success(0.5, rayleigh) == per_attempt_success(1.0, rayleigh)
    assert per_attempt_success(0.5, rayleigh, clip="strict-eq1") == 0.0
    with pytest.raises(ValueError):
        per_attempt_success(2.0, rayleigh, clip="bogus")


def test_scale_one_differs_from_unit_mean(rayleigh):
    cfg = rayleigh.replace(m=2)
    # Gamma(2, 1) desired gains are larger on average than unit-mean ones
    assert per_attempt_success(3.0, cfg, fading_scale="scale-one") > per_attempt_success(3.0, cfg)
    # for m = 1 both conventions coincide
    assert per_attempt_success(3.0, rayleigh, fading_scale="scale-one") == per_attempt_success(3.0, rayleigh)


def test_connected_intensity_bound_examples(rayleigh):
    cfg = rayleigh.replace(lambda_r=0.1)
    assert connected_intensity_bound(2.0, 1, cfg) == pytest.approx(0.084654, abs=1e-6)
    assert connected_intensity_bound(2.0, 2, cfg) == pytest.approx(0.097645, abs=1e-6)
    assert connected_intensity_bound(2.0, 200, cfg) == pytest.approx(0.1, rel=1e-12)


def test_campbell_mean():
    assert campbell_mean(0.01, 4.0, 2) == pytest.approx(0.01 * math.pi)
    assert campbell_mean(0.01, 4.0, 2, r_hi=17.72) == pytest.approx(math.pi * 0.01 * (1 - 17.72**-2))
    assert campbell_mean(0.0, 4.0, 2) == 0.0


@settings(max_examples=40, deadline=None)
@given(phi=st.floats(0.05, 200.0), r1=st.floats(1.0, 50.0), r2=st.floats(1.0, 50.0), m=st.integers(1, 5))
def test_delta1_monotone_in_window(phi, r1, r2, m):
    lo, hi = sorted((r1, r2))
    a = delta1(ShotNoiseQuery(phi=phi, window=lo, m=m))
    b = delta1(ShotNoiseQuery(phi=phi, window=hi, m=m))
    assert a <= b * (1 + 1e-12) + 1e-15


@settings(max_examples=40, deadline=None)
@given(p1=st.floats(0.05, 200.0), p2=st.floats(0.05, 200.0), m=st.integers(1, 5), alpha=st.floats(2.5, 6.0))
def test_delta1_monotone_in_phi(p1, p2, m, alpha):
    lo, hi = sorted((p1, p2))
    a = delta1(ShotNoiseQuery(phi=lo, m=m, alpha=alpha))
    b = delta1(ShotNoiseQuery(phi=hi, m=m, alpha=alpha))
    assert a <= b * (1 + 1e-12)


@settings(max_examples=30, deadline=None)
@given(r=st.floats(1.0, 10.0), t1=st.integers(1, 6), t2=st.integers(1, 6), m=st.integers(1, 4))
def test_bound_monotone_in_tau_and_below_lambda_r(r, t1, t2, m):
    cfg = NetworkConfig(2, 4.0, 1.0, 10.0, 0.01, 0.1, m, 1, 0.05)
    lo, hi = sorted((t1, t2))
    a = connected_intensity_bound(r, lo, cfg)
    b = connected_intensity_bound(r, hi, cfg)
    assert a <= b + 1e-15 and b <= cfg.lambda_r * (1 + 1e-12)
