import logging
import math

import numpy as np
import pytest

from mtcap.model import NetworkConfig, derive_params
from mtcap.montecarlo import estimate_outage
from mtcap.outage import (
    BracketError,
    RadialDistribution,
    max_contention_closed_form,
    outage_probability_analytic,
    premise_warnings,
    radial_expectation,
    rho,
    solve_max_contention,
)
from mtcap.shotnoise import ShotNoiseQuery, d_hat, delta1


def test_radial_expectation_examples():
    assert radial_expectation(lambda r: np.full_like(r, 3.5), 2, 10.0) == pytest.approx(3.5, rel=1e-12)
    assert radial_expectation(lambda r: r**2, 2, 10.0) == pytest.approx(50.0, rel=1e-12)
    assert radial_expectation(lambda r: (r >= 10.0).astype(float), 2, 10.0) == pytest.approx(0.0, abs=1e-12)
    assert radial_expectation(lambda r: r, 3, 2.0) == pytest.approx(1.5, rel=1e-12)


def test_radial_distribution():
    dist = RadialDistribution(2, 4.0)
    assert dist.cdf(2.0) == pytest.approx(0.25)
    assert dist.cdf(5.0) == 1.0 and dist.pdf(5.0) == 0.0
    assert dist.pdf(2.0) == pytest.approx(2 * 2.0 / 16)


def test_constant_success_stub(rayleigh):
    out = outage_probability_analytic(rayleigh, success_fn=lambda r, c: np.full_like(r, 0.99))
    assert out == pytest.approx(1 - math.exp(-0.1), rel=1e-10)
    assert out == pytest.approx(0.09516, abs=1e-5)


def test_zero_density_means_no_outage(rayleigh):
    assert outage_probability_analytic(rayleigh.replace(lambda_t=0.0)) == 0.0
    assert outage_probability_analytic(rayleigh.replace(lambda_t=0.0, tau=3, m=2)) == 0.0


def test_strict_clip_keeps_inner_receivers_in_outage(small_cluster):
    cfg = small_cluster.replace(lambda_t=0.0)
    k = derive_params(cfg).k
    assert outage_probability_analytic(cfg, clip="strict-eq1") == pytest.approx(-math.expm1(-k / 9), rel=1e-9)


@pytest.mark.parametrize("m", [1, 3])
def test_outage_monotone(rayleigh, m):
    cfg = rayleigh.replace(m=m)
    lams = [1e-5, 1e-4, 1e-3, 1e-2]
    for tau in (1, 2, 4):
        vals = [outage_probability_analytic(cfg.replace(lambda_t=l, tau=tau)) for l in lams]
        assert all(a < b for a, b in zip(vals, vals[1:]))
        assert all(0 < v < 1 for v in vals)
    for lam in lams:
        vals = [outage_probability_analytic(cfg.replace(lambda_t=lam), tau=t) for t in (1, 2, 3, 4)]
        assert all(a > b for a, b in zip(vals, vals[1:]))


def test_rho_examples():
    assert rho(0.05, 1) == pytest.approx(0.1, rel=1e-15)
    assert rho(0.05, 2) == pytest.approx(0.25 * math.sqrt(0.15), rel=1e-15)
    assert rho(0.05, 2) == pytest.approx(0.09682, abs=1e-5)


def test_closed_form_example(rayleigh):
    sol = max_contention_closed_form(rayleigh)
    assert sol.d_hat == pytest.approx(math.pi / 2, rel=1e-14)
    assert sol.lambda_bar == pytest.approx(0.1 / (100 * math.pi * 10 * math.pi / 2), rel=1e-12)
    assert sol.lambda_bar == pytest.approx(2.0264e-5, rel=1e-4)
    assert sol.method == "closed-form" and sol.normalization == "proof"


@pytest.mark.parametrize("tau", [1, 2, 4])
@pytest.mark.parametrize("m", [1, 2])
def test_closed_form_doubling_ratios(rayleigh, tau, m):
    cfg = rayleigh.replace(tau=tau, m=m, lambda_r=1000 / (100 * math.pi))
    xi = 0.5
    lam = lambda c: max_contention_closed_form(c).lambda_bar
    base = lam(cfg)
    assert lam(cfg.replace(epsilon=0.1)) / base == pytest.approx(2 ** (1 / tau), rel=1e-12)
    assert lam(cfg.replace(lambda_r=2 * cfg.lambda_r)) / base == pytest.approx(2 ** (-1 / tau), rel=1e-12)
    # double mu_r at fixed k
    wide = cfg.replace(s=cfg.s * math.sqrt(2), lambda_r=cfg.lambda_r / 2)
    assert lam(wide) / base == pytest.approx(0.5, rel=1e-12)
    assert lam(cfg.replace(beta=2.0)) / base == pytest.approx(2 ** (-xi), rel=1e-12)


def test_literal_normalization(rayleigh):
    beta = 4.0
    cfg = rayleigh.replace(beta=beta)
    proof = max_contention_closed_form(cfg)
    lit = max_contention_closed_form(cfg, "literal")
    # m = 1 and a_hat_B = 1: divisor is delta1(beta, inf)
    assert lit.d_hat == pytest.approx(delta1(ShotNoiseQuery(phi=beta)), rel=1e-9)
    assert lit.lambda_bar / proof.lambda_bar == pytest.approx(d_hat(1, 0.5) / lit.d_hat, rel=1e-9)
    smaller = max_contention_closed_form(cfg, "literal", a_hat_B=0.5)
    assert smaller.d_hat > lit.d_hat
    with pytest.raises(ValueError):
        max_contention_closed_form(cfg, a_hat_B=1.5)
    with pytest.raises(ValueError):
        max_contention_closed_form(cfg, "other")


def test_premise_warning(rayleigh, caplog):
    assert premise_warnings(rayleigh) == []
    cfg = rayleigh.replace(tau=2)  # needs k >= 20
    with caplog.at_level(logging.WARNING, logger="mtcap"):
        sol = max_contention_closed_form(cfg)
    assert sol.warnings and sol.warnings[0].startswith("closed-form-premise")
    assert "closed-form-premise" in caplog.text


def test_solver_inverts_stub_exactly(rayleigh):
    c = 50.0
    stub = lambda r, cfg: np.full_like(r, math.exp(-c * cfg.lambda_t))
    for eps, k in ((0.05, 10.0), (0.01, 100.0), (0.2, 3.0)):
        cfg = rayleigh.replace(epsilon=eps, lambda_r=k / (100 * math.pi))
        sol = solve_max_contention(cfg, tolerance=1e-12, success_fn=stub)
        exact = -math.log(1 + math.log(1 - eps) / k) / c
        assert sol.lambda_bar == pytest.approx(exact, abs=1e-6)
        assert sol.lambda_bar == pytest.approx(exact, rel=1e-8)


@pytest.mark.parametrize("tau", [1, 2])
def test_solver_hits_epsilon(rayleigh, tau):
    cfg = rayleigh.replace(tau=tau, lambda_r=100 / (100 * math.pi))
    sol = solve_max_contention(cfg)
    assert abs(outage_probability_analytic(cfg.replace(lambda_t=sol.lambda_bar)) - cfg.epsilon) <= 1e-5
    assert sol.achieved_outage == pytest.approx(cfg.epsilon, abs=1e-5)
    assert solve_max_contention(cfg).lambda_bar == sol.lambda_bar


def test_solver_bracket_failures(small_cluster):
    with pytest.raises(BracketError):
        solve_max_contention(small_cluster.replace(lambda_r=20 / (9 * math.pi)), clip="strict-eq1")
    with pytest.raises(BracketError):
        solve_max_contention(small_cluster, success_fn=lambda r, c: np.ones_like(r))
    with pytest.raises(ValueError):
        solve_max_contention(small_cluster, oracle="bogus")


def test_mc_oracle(small_cluster):
    cfg = small_cluster.replace(epsilon=0.2)
    sol = solve_max_contention(cfg, "mc", trials=2000, seed=3)
    ref = solve_max_contention(cfg).lambda_bar
    assert sol.method == "bisect-mc"
    assert abs(sol.achieved_outage - 0.2) <= sol.achieved_half_width
    assert ref / 3 < sol.lambda_bar < 3 * ref
    again = estimate_outage(cfg.replace(lambda_t=sol.lambda_bar), 2000, 3)
    assert again.probability > 0
