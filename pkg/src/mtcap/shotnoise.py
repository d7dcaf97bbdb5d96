"""Poisson shot-noise transforms and the per-attempt success probability.

The interference at the origin is ``I = sum_i G_i ||X_i||^-alpha`` over a PPP of
intensity ``lam`` restricted to ``1 <= ||x|| <= window`` with unit-mean
Gamma(m) marks.  Its Laplace transform is ``exp(-mu_u * lam * delta1)``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .model import FADING_SCALES, NetworkConfig, derive_params, unit_ball_volume
from .taylor import TaylorJet

log = logging.getLogger(__name__)

QUAD_RTOL = 1e-9


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class ShotNoiseQuery:
    phi: float
    window: float = math.inf
    lam: float = 0.0
    m: int = 1
    alpha: float = 4.0
    d: int = 2

    @property
    def xi(self) -> float:
        return self.d / self.alpha

    @property
    def mu_u(self) -> float:
        return unit_ball_volume(self.d)

    @classmethod
    def from_config(cls, config: NetworkConfig, phi, window=math.inf, lam=None):
        return cls(
            phi=phi,
            window=window,
            lam=config.lambda_t if lam is None else lam,
            m=config.m,
            alpha=config.alpha,
            d=config.d,
        )


def _quad(f, a, b, rtol=QUAD_RTOL, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, a, b, epsabs=0.0, epsrel=rtol * 0.01, limit=500, **kw)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(str(exc)) from exc
    if err > rtol * abs(val) and err > 1e-300:
        raise QuadratureError(f"quadrature error estimate {err:.3g} exceeds tolerance on {val:.6g}")
    return val


def _beta_segment(p, q, a, b):
    """Integral of ``t**(p-1) / (1+t)**(p+q)`` over [a, b] via incomplete beta functions.

    With ``u = t/(1+t)`` this is a Beta(p, q) integral; the range is split at
    t = 1 so each half uses the tail that keeps full relative precision.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    B = special.beta(p, q)
    lo_hi = np.minimum(b, 1.0)
    head = np.where(
        a < lo_hi,
        special.betainc(p, q, lo_hi / (1.0 + lo_hi)) - special.betainc(p, q, a / (1.0 + a)),
        0.0,
    )
    hi_lo = np.maximum(a, 1.0)
    with np.errstate(divide="ignore"):
        tail_b = np.where(np.isinf(b), 0.0, special.betainc(q, p, 1.0 / (1.0 + b)))
    tail = np.where(hi_lo < b, special.betainc(q, p, 1.0 / (1.0 + hi_lo)) - tail_b, 0.0)
    return B * (head + tail)


def _quad_beta(p, q, a, b):
    """Same integral as ``_beta_segment`` by adaptive quadrature in ``u = t/(1+t)``."""
    if not b > a:
        return 0.0
    ua = a / (1.0 + a)
    if math.isinf(b):
        # algebraic endpoint singularity (1-u)^(q-1) handled by the weighted rule
        return _quad(lambda u: u ** (p - 1.0), ua, 1.0, weight="alg", wvar=(0.0, q - 1.0))
    ub = b / (1.0 + b)
    return _quad(lambda u: u ** (p - 1.0) * (1.0 - u) ** (q - 1.0), ua, ub)


def _delta1_range(phi, lo_t, hi_t, m, xi, method="beta"):
    phi = np.asarray(phi, dtype=float)
    total = np.zeros(np.broadcast_shapes(phi.shape, np.shape(lo_t), np.shape(hi_t)))
    for j in range(m):
        p = j + xi
        q = m - p
        if method == "beta":
            seg = _beta_segment(p, q, lo_t, hi_t)
        else:
            seg = np.vectorize(lambda a, b, p=p, q=q: _quad_beta(p, q, a, b))(lo_t, hi_t)
        total = total + math.comb(m, j) * seg
    return xi * (phi / m) ** xi * total


def delta1(query: ShotNoiseQuery, method: str = "beta"):
    """Exponent of the Laplace transform of the windowed shot noise (per unit mu_u*lam).

    ``method="beta"`` evaluates each term through the regularised incomplete
    beta function, ``method="quad"`` by adaptive quadrature on ``t``.
    """
    if query.window < 1:
        raise ValueError("window must be >= 1")
    if not query.alpha > query.d:
        raise ValueError("alpha > d is required for a finite shot noise")
    phi = np.asarray(query.phi, dtype=float)
    if np.any(phi <= 0):
        raise ValueError("phi must be positive")
    m = query.m
    lo = m / phi
    hi = np.inf if math.isinf(query.window) else m * query.window**query.alpha / phi
    out = _delta1_range(phi, lo, hi, m, query.xi, method)
    return out if out.ndim else float(out)


def _delta1_signed(phi, r_lo, r_hi, m, alpha, d):
    """Delta1-style integral between two radii, allowing radii below 1."""
    xi = d / alpha
    lo = m * r_lo**alpha / phi
    hi = np.inf if math.isinf(r_hi) else m * r_hi**alpha / phi
    return float(_delta1_range(phi, lo, hi, m, xi))


def d_hat(m: int, xi: float) -> float:
    """phi-independent large-argument constant of the truncated Delta1 expansion.

    ``xi m^-xi prod_{j<m}(1 - xi/j) sum_j C(m,j) B(j+xi, m-j-xi)``.
    """
    prod = 1.0
    for j in range(1, m):
        prod *= 1.0 - xi / j
    total = sum(math.comb(m, j) * special.beta(j + xi, m - j - xi) for j in range(m))
    return xi * m ** (-xi) * prod * total


def delta2(query: ShotNoiseQuery, form: str = "printed"):
    """Exponent of the moment generating function, restricted to ``0 < phi < m``.

    ``form="printed"`` integrates the binomial sum ``(-1)^j t^(j+xi) / (1-t)^m``
    term by term.  ``form="pgfl"`` integrates the expression that follows
    from the Poisson generating functional with Gamma(m, 1/m) marks,
    ``t^(xi-1) ((1 - 1/t)^-m - 1)``; only this one gives ``E[e^{phi I}] >= 1``.
    """
    phi, m, xi = float(query.phi), query.m, query.xi
    if not 0 < phi < m:
        raise ValueError(
            f"delta2 needs 0 < phi < m (phi={phi}, m={m}); at phi >= m the (1-t)^-m pole "
            "at t = 1 enters the integration range"
        )
    if query.window < 1:
        raise ValueError("window must be >= 1")
    lo = m / phi
    if math.isinf(query.window):
        if form == "printed":
            raise ValueError("printed delta2 diverges for an unbounded window")
        hi = math.inf
    else:
        hi = m * query.window**query.alpha / phi
    if hi <= lo:
        return 0.0
    scale = xi * (phi / m) ** xi
    if form == "printed":
        total = 0.0
        for j in range(m):
            total += math.comb(m, j) * _quad(
                lambda t, j=j: (-1) ** j * t ** (j + xi) / (1.0 - t) ** m, lo, hi
            )
        return scale * total
    if form == "pgfl":
        f = lambda t: t ** (xi - 1.0) * math.expm1(-m * math.log1p(-1.0 / t))
        return scale * _quad(f, lo, hi)
    raise ValueError(f"unknown delta2 form {form!r}")


def laplace_functional(query: ShotNoiseQuery, method: str = "beta"):
    """E[exp(-phi I)] from the closed form."""
    if query.lam == 0:
        return 1.0 if np.ndim(query.phi) == 0 else np.ones(np.shape(query.phi))
    return np.exp(-query.mu_u * delta1(query, method) * query.lam)


def mgf(query: ShotNoiseQuery, form: str = "pgfl"):
    """E[exp(+phi I)] for ``0 < phi < m``."""
    if query.lam == 0:
        return 1.0
    return math.exp(query.mu_u * delta2(query, form) * query.lam)


def _radial(f, window):
    if math.isinf(window):
        return _quad(f, 1.0, 2.0) + _quad(f, 2.0, math.inf)
    # split on a log grid; the integrand spans many decades
    edges = np.unique(np.concatenate([[1.0], np.geomspace(2.0, window, max(2, int(math.log2(window)))), [window]]))
    edges = edges[edges <= window]
    return sum(_quad(f, a, b) for a, b in zip(edges[:-1], edges[1:]))


def laplace_pgfl_direct(phi, lam, m, alpha, d, window=math.inf) -> float:
    """E[exp(-phi I)] through the PPP generating functional, by radial quadrature.

    Independent of ``delta1``: integrates ``1 - (1 + phi rho^-alpha / m)^-m``
    against ``d mu_u rho^(d-1)`` on ``[1, window]``.
    """
    if lam == 0 or window <= 1:
        return 1.0
    if not alpha > d:
        raise ValueError("alpha > d is required")
    mu_u = unit_ball_volume(d)
    f = lambda rho: -math.expm1(-m * math.log1p(phi * rho ** (-alpha) / m)) * rho ** (d - 1)
    return math.exp(-lam * d * mu_u * _radial(f, window))


def mgf_pgfl_direct(phi, lam, m, alpha, d, window=math.inf) -> float:
    """E[exp(+phi I)] through the generating functional; needs ``phi < m``."""
    if not 0 < phi < m:
        raise ValueError("mgf needs 0 < phi < m")
    if lam == 0 or window <= 1:
        return 1.0
    mu_u = unit_ball_volume(d)
    f = lambda rho: math.expm1(-m * math.log1p(-phi * rho ** (-alpha) / m)) * rho ** (d - 1)
    return math.exp(lam * d * mu_u * _radial(f, window))


def laplace_jet(center, order: int, lam: float, m: int, alpha: float, d: int) -> TaylorJet:
    """Jet of ``phi -> exp(-mu_u lam delta1(phi, inf))`` about ``center``.

    The phi-dependence of delta1 sits in the prefactor and the lower integration
    limit ``m/phi``; the limit's contribution is differentiated analytically
    (boundary term) and lifted back by jet integration.
    """
    xi = d / alpha
    mu_u = unit_ball_volume(d)
    c = np.asarray(center, dtype=float)
    x = TaylorJet.variable(c, order)
    # G(phi) = sum_j C(m,j) int_{m/phi}^inf t^(j+xi-1) (1+t)^-m dt
    g0 = _delta1_range(c, m / c, np.inf, m, xi) / (xi * (c / m) ** xi)
    u = m / x
    poly = sum(math.comb(m, j) * u ** float(j) for j in range(m))
    dG = (u ** (xi + 1.0)) * ((1.0 + u) ** float(-m)) * poly / m
    G = dG.integrate(g0)
    delta = (x ** xi) * G * (xi * m ** (-xi))
    return (delta * (-mu_u * lam)).exp()


def psi(phi, order: int, lambda_t: float, m: int, alpha: float, d: int):
    """``(-phi)^n / n! * d^n/dphi^n [L(phi)/phi]`` with ``L`` the interference Laplace transform."""
    phi = np.asarray(phi, dtype=float)
    if np.any(phi <= 0):
        raise ValueError("phi must be positive")
    x = TaylorJet.variable(phi, order)
    if lambda_t == 0:
        q = 1.0 / x
    else:
        q = laplace_jet(phi, order, lambda_t, m, alpha, d) / x
    out = (-phi) ** order * q.coefficients[order]
    return out if out.ndim else float(out)


def per_attempt_success(r, config: NetworkConfig, fading_scale: str = "unit-mean", clip: str = "capped"):
    """Probability that one attempt reaches a receiver at distance ``r``.

    ``arg * Psi^(m-1)(arg)`` with ``arg = beta r^alpha`` scaled by ``m`` for
    unit-mean desired-link gains (``"scale-one"`` keeps the bare argument).
    Under ``clip="capped"`` receivers inside the unit ball are treated as at
    r = 1; ``"strict-eq1"`` gives them zero desired gain.
    """
    if fading_scale not in FADING_SCALES:
        raise ValueError(f"fading_scale must be one of {FADING_SCALES}")
    r = np.asarray(r, dtype=float)
    inside = r < 1.0
    reff = np.maximum(r, 1.0)
    if config.lambda_t == 0:
        p = np.ones_like(reff)
    else:
        arg = config.beta * reff**config.alpha
        if fading_scale == "unit-mean":
            arg = arg * config.m
        p = arg * psi(arg, config.m - 1, config.lambda_t, config.m, config.alpha, config.d)
        excess = max(float(np.max(p - 1.0, initial=0.0)), float(np.max(-p, initial=0.0)))
        if excess > 1e-9:
            log.warning("per-attempt success clamped by %.3g", excess)
        p = np.clip(p, 0.0, 1.0)
    if clip == "strict-eq1":
        p = np.where(inside, 0.0, p)
    elif clip != "capped":
        raise ValueError(f"unknown clip policy {clip!r}")
    return p if p.ndim else float(p)


def connected_intensity_bound(r, tau: int, config: NetworkConfig, **kw):
    """Intensity of receivers connected within ``tau`` attempts at distance ``r``."""
    p = np.asarray(per_attempt_success(r, config, **kw))
    with np.errstate(divide="ignore"):
        out = -config.lambda_r * np.expm1(tau * np.log1p(-p))
    return out if out.ndim else float(out)


def campbell_mean(lam: float, alpha: float, d: int, r_lo: float = 1.0, r_hi: float = math.inf) -> float:
    """Mean interference from unit-mean marks on the annulus [r_lo, r_hi]."""
    if lam == 0:
        return 0.0
    mu_u = unit_ball_volume(d)
    tail = 0.0 if math.isinf(r_hi) else r_hi ** (d - alpha)
    return lam * d * mu_u * (r_lo ** (d - alpha) - tail) / (alpha - d)


__all__ = [
    "QuadratureError",
    "ShotNoiseQuery",
    "delta1",
    "delta2",
    "d_hat",
    "laplace_functional",
    "mgf",
    "laplace_pgfl_direct",
    "mgf_pgfl_direct",
    "laplace_jet",
    "psi",
    "per_attempt_success",
    "connected_intensity_bound",
    "campbell_mean",
    "derive_params",
]
