"""Multicast outage probability and the maximum contention intensity."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .model import NetworkConfig, derive_params
from .quadrature import gk_integrate
from .shotnoise import _delta1_signed, d_hat, per_attempt_success

log = logging.getLogger(__name__)

NORMALIZATIONS = ("proof", "literal")


class BracketError(RuntimeError):
    """The outage never crosses epsilon inside the search range."""


@dataclass(frozen=True)
class RadialDistribution:
    d: int
    s: float

    def pdf(self, r):
        r = np.asarray(r, dtype=float)
        return np.where((r >= 0) & (r <= self.s), self.d * r ** (self.d - 1) / self.s**self.d, 0.0)

    def cdf(self, r):
        return np.clip(np.asarray(r, dtype=float) / self.s, 0.0, 1.0) ** self.d


def radial_expectation(fn, d: int, s: float, rtol: float = 1e-9) -> float:
    """``E[fn(R)]`` for R with density ``d r^(d-1) / s^d`` on [0, s]; ``fn`` must accept arrays."""
    dist = RadialDistribution(d, s)
    val, _ = gk_integrate(
        lambda r: np.asarray(fn(r), dtype=float) * dist.pdf(r), 0.0, s, rtol=rtol, atol=1e-300,
        breakpoints=(1.0,) if s > 1 else (),
    )
    return val


def outage_probability_analytic(config: NetworkConfig, tau: int | None = None, *, fading_scale="unit-mean",
                                clip="capped", success_fn=None) -> float:
    """``1 - exp(-k E_R[(1 - p(R))^tau])`` with the per-attempt success ``p``.

    ``success_fn(r, config)`` replaces the shot-noise success probability
    (used to inject stubs in tests).
    """
    tau = config.tau if tau is None else tau
    k = derive_params(config).k
    if success_fn is None:
        if config.lambda_t == 0 and clip == "capped":
            return 0.0
        success_fn = lambda r, c: per_attempt_success(r, c, fading_scale=fading_scale, clip=clip)
    miss = radial_expectation(lambda r: (1.0 - np.asarray(success_fn(r, config))) ** tau, config.d, config.s)
    return float(-math.expm1(-k * miss))


def rho(epsilon: float, tau: int) -> float:
    return (epsilon * (tau + 1)) ** (1.0 / tau) / tau**2


@dataclass
class ContentionSolution:
    lambda_bar: float
    method: str
    normalization: str | None = None
    a_hat_B: float | None = None
    d_hat: float | None = None
    achieved_outage: float | None = None
    achieved_half_width: float | None = None
    iterations: int = 0
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def premise_warnings(config: NetworkConfig) -> list[str]:
    k = derive_params(config).k
    need = config.epsilon ** (-(config.tau - 1))
    if k < need:
        return [f"closed-form-premise: k={k:.6g} < epsilon^-(tau-1)={need:.6g}"]
    return []


def max_contention_closed_form(config: NetworkConfig, normalization: str = "proof",
                               a_hat_B: float = 1.0) -> ContentionSolution:
    """Closed-form maximum contention intensity.

    ``normalization="proof"`` divides by the beta-free constant ``D_hat``;
    ``"literal"`` divides by ``[delta1(beta, inf) - delta1(beta, a_hat_B)] prod(1 - xi/j)``
    on top of ``beta^xi``.
    """
    if not 0 <= a_hat_B <= 1:
        raise ValueError("a_hat_B must lie in [0, 1]")
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    dp = derive_params(config)
    eps, tau, m, beta = config.epsilon, config.tau, config.m, config.beta
    if normalization == "proof":
        const = d_hat(m, dp.xi)
    else:
        prod = 1.0
        for j in range(1, m):
            prod *= 1.0 - dp.xi / j
        const = _delta1_signed(beta, a_hat_B, math.inf, m, config.alpha, config.d) * prod
    warns = premise_warnings(config)
    for w in warns:
        log.warning(w)
    lam = (eps * (tau + 1)) ** (1.0 / tau) / (dp.mu_r * beta**dp.xi * dp.k ** (1.0 / tau) * const)
    return ContentionSolution(lam, "closed-form", normalization, a_hat_B, const, warnings=warns)


def bisect_increasing(f, target: float, lo: float, hi: float, ftol: float, xtol_rel: float = 1e-12,
                      max_expand: int = 200, max_iter: int = 300):
    """Find x with ``|f(x) - target| <= ftol`` for non-decreasing ``f`` and ``f(lo) < target``.

    ``hi`` is doubled until ``f(hi) > target``.  Returns ``(x, f(x), iterations)``.
    """
    f_hi = f(hi)
    n = 0
    while f_hi <= target:
        if abs(f_hi - target) <= ftol:
            return hi, f_hi, n
        lo, hi = hi, 2.0 * hi
        f_hi = f(hi)
        n += 1
        if n > max_expand:
            raise BracketError(f"outage stays below target up to {hi:.3g}")
    x, fx = lo, None
    for _ in range(max_iter):
        n += 1
        x = 0.5 * (lo + hi)
        fx = f(x)
        if abs(fx - target) <= ftol:
            return x, fx, n
        if fx < target:
            lo = x
        else:
            hi = x
        if hi - lo <= xtol_rel * hi:
            break
    return x, fx, n


def solve_max_contention(config: NetworkConfig, oracle: str = "analytic", tolerance: float = 1e-5, *,
                         fading_scale="unit-mean", clip="capped", success_fn=None,
                         trials: int = 20000, seed: int = 0, sim_options=None) -> ContentionSolution:
    """Largest lambda_t whose outage equals epsilon, by bisection.

    ``oracle="analytic"`` bisects the semi-analytic outage until it is within
    ``tolerance`` of epsilon.  ``oracle="mc"`` bisects the simulated outage
    with common random numbers (fixed seed and window) and stops once the 95%
    interval of the estimate contains epsilon.
    """
    eps = config.epsilon
    analytic = lambda lam: outage_probability_analytic(
        config.replace(lambda_t=lam), fading_scale=fading_scale, clip=clip, success_fn=success_fn
    )
    base = analytic(0.0) if success_fn is not None else (0.0 if clip == "capped" else analytic(0.0))
    if base >= eps:
        raise BracketError(f"outage {base:.4g} at lambda_t -> 0 already exceeds epsilon")
    guess = max_contention_closed_form(config).lambda_bar if success_fn is None else 1e-3
    if oracle == "analytic":
        lam, p, it = bisect_increasing(analytic, eps, 0.0, guess, tolerance)
        return ContentionSolution(lam, "bisect-analytic", achieved_outage=p, iterations=it,
                                  warnings=premise_warnings(config))
    if oracle != "mc":
        raise ValueError("oracle must be 'analytic' or 'mc'")
    from .montecarlo import SimOptions, estimate_outage
    from .pointprocess import simulation_radius

    ref, _, _ = bisect_increasing(analytic, eps, 0.0, guess, 1e-4)
    opts = sim_options or SimOptions(fading_scale=fading_scale, clip=clip)
    if opts.r_sim is None:
        # one window for the whole search keeps the estimates coupled and monotone
        lo_cfg = config.replace(lambda_t=ref / 4)
        opts = SimOptions(**{**opts.__dict__, "r_sim": simulation_radius(lo_cfg)})
    last = {}

    def mc(lam):
        est = estimate_outage(config.replace(lambda_t=lam), trials, seed, opts)
        last[lam] = est
        return est.probability

    lo, hi = ref / 4, ref * 4
    it = 0
    while mc(hi) <= eps:
        hi *= 2
        it += 1
        if it > 20:
            raise BracketError("simulated outage stays below epsilon")
    while mc(lo) >= eps and lo > 0:
        lo /= 2
        it += 1
        if it > 40:
            raise BracketError("simulated outage stays above epsilon")
    x = 0.5 * (lo + hi)
    for _ in range(60):
        it += 1
        x = 0.5 * (lo + hi)
        p = mc(x)
        if abs(p - eps) <= last[x].half_width or hi - lo <= 1e-6 * hi:
            break
        if p < eps:
            lo = x
        else:
            hi = x
    est = last[x]
    return ContentionSolution(x, "bisect-mc", achieved_outage=est.probability,
                              achieved_half_width=est.half_width, iterations=it,
                              warnings=premise_warnings(config))
