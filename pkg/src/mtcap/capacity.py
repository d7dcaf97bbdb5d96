"""Multicast transmission capacity, regime sweeps and scaling-exponent fits."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .model import NetworkConfig, derive_params, unit_ball_volume
from .outage import BracketError, max_contention_closed_form, rho, solve_max_contention

log = logging.getLogger(__name__)

REGIMES = ("dense", "large", "large-dense")
SWEEP_COLUMNS = ("regime", "k", "s", "lambda_r", "lambda_bar_closed", "lambda_bar_solved",
                 "b_proxy", "b_mc", "C_eps", "rho", "flags")


def multicast_capacity(b: float, lambda_bar: float, epsilon: float, tau: int) -> float:
    """Rate times density per attempt: ``b lambda_bar (1 - epsilon) / tau``."""
    if b < 0 or lambda_bar <= 0 or tau < 1 or not 0 < epsilon < 1:
        raise ValueError("need b >= 0, lambda_bar > 0, tau >= 1, epsilon in (0, 1)")
    return b * lambda_bar * (1.0 - epsilon) / tau


def rate_proxy(lambda_t: float, mu_r: float) -> float:
    """``log(1 + 1/(mu_r lambda_t))``, the rate's logarithmic lower-bound term (nats)."""
    return math.log1p(1.0 / (mu_r * lambda_t))


def regime_config(regime: str, k: float, template: NetworkConfig, c: float = 1.0) -> NetworkConfig:
    """Config whose mean receiver count is ``k`` under a growth regime.

    dense: keep ``s``, set ``lambda_r = k / mu_r``; large: keep ``lambda_r``,
    grow ``s``; large-dense: ``mu_r = sqrt(k / c)`` and ``lambda_r = sqrt(k c)``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    vol = unit_ball_volume(template.d)
    if regime == "dense":
        s, lam_r = template.s, k / (vol * template.s**template.d)
    elif regime == "large":
        s, lam_r = (k / (template.lambda_r * vol)) ** (1.0 / template.d), template.lambda_r
    elif regime == "large-dense":
        mu_r = math.sqrt(k / c)
        s, lam_r = (mu_r / vol) ** (1.0 / template.d), math.sqrt(k * c)
    else:
        raise ValueError(f"regime must be one of {REGIMES}")
    if s < 1:
        raise ValueError(f"{regime} regime at k={k:g} needs s={s:.4g} < 1")
    return template.replace(s=float(s), lambda_r=float(lam_r))


@dataclass
class SweepRow:
    regime: str
    k: float
    s: float
    lambda_r: float
    lambda_bar_closed: float
    lambda_bar_literal: float | None = None
    lambda_bar_solved: float | None = None
    b_proxy: float | None = None
    b_mc: float | None = None
    C_eps: float | None = None
    rho: float | None = None
    flags: list = field(default_factory=list)

    def csv_values(self):
        def fmt(v):
            return "" if v is None else repr(float(v))

        return [self.regime, fmt(self.k), fmt(self.s), fmt(self.lambda_r), fmt(self.lambda_bar_closed),
                fmt(self.lambda_bar_solved), fmt(self.b_proxy), fmt(self.b_mc), fmt(self.C_eps),
                fmt(self.rho), ";".join(self.flags)]


@dataclass
class SweepResult:
    regime: str
    lambda_method: str
    rate_method: str
    rows: list
    warnings: list = field(default_factory=list)

    def ok_rows(self):
        return [r for r in self.rows if r.C_eps is not None and r.C_eps > 0]

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for row in self.rows:
            w.writerow(row.csv_values())
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def to_dict(self):
        return asdict(self)


def sweep(regime: str, k_grid, template: NetworkConfig, *, lambda_method: str = "closed",
          rate_method: str = "proxy", normalization: str = "proof", c: float = 1.0,
          mc_trials: int = 10000, seed: int = 0, sim_options=None, solve_tolerance: float = 1e-5) -> SweepResult:
    """One row per ``k``: contention intensity, rate, capacity and rho.

    ``lambda_method`` ("closed" or "solved") and ``rate_method`` ("proxy" or
    "mc") choose which quantities feed ``C_eps``.  A row whose computation
    fails is kept with empty numbers and a flag.
    """
    if lambda_method not in ("closed", "solved"):
        raise ValueError("lambda_method must be 'closed' or 'solved'")
    if rate_method not in ("proxy", "mc"):
        raise ValueError("rate_method must be 'proxy' or 'mc'")
    ks = [float(k) for k in k_grid]
    res = SweepResult(regime, lambda_method, rate_method, [])
    if not ks:
        res.warnings.append("empty k grid")
        log.warning("empty k grid")
        return res
    if ks != sorted(ks):
        raise ValueError("k_grid must be sorted")
    for k in ks:
        cfg = regime_config(regime, k, template, c)
        mu_r = derive_params(cfg).mu_r
        closed = max_contention_closed_form(cfg, normalization)
        row = SweepRow(regime, k, cfg.s, cfg.lambda_r, closed.lambda_bar, rho=rho(cfg.epsilon, cfg.tau))
        row.flags += closed.warnings
        if normalization == "proof":
            try:
                row.lambda_bar_literal = max_contention_closed_form(cfg, "literal").lambda_bar
            except (ValueError, ArithmeticError) as exc:
                row.flags.append(f"literal: {exc}")
        lam = closed.lambda_bar
        if lambda_method == "solved":
            try:
                lam = row.lambda_bar_solved = solve_max_contention(cfg, "analytic", solve_tolerance).lambda_bar
            except (BracketError, ArithmeticError, RuntimeError) as exc:
                row.flags.append(f"solver: {exc}")
                res.rows.append(row)
                continue
        row.b_proxy = rate_proxy(lam, mu_r)
        b = row.b_proxy
        if rate_method == "mc":
            from .montecarlo import SimOptions, estimate_rate

            est = estimate_rate(cfg.replace(lambda_t=lam), mc_trials, seed, sim_options or SimOptions())
            row.b_mc = b = est.b
            if est.flagged:
                row.flags.append(f"rate: {est.discarded} zero-interference trials dropped")
        row.C_eps = multicast_capacity(b, lam, cfg.epsilon, cfg.tau)
        res.rows.append(row)
    return res


@dataclass
class ScalingFit:
    exponent: float
    intercept: float
    residual_rms: float
    k_min: float
    k_max: float
    points: int
    model: str = "log C - log log k = const + x log k"

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def fit_exponent(sweep_or_points) -> ScalingFit:
    """Least-squares slope of ``log C - log log k`` against ``log k``.

    Accepts a SweepResult or an iterable of ``(k, C)`` pairs.  Needs at least
    five points spanning two decades of ``k``.
    """
    if isinstance(sweep_or_points, SweepResult):
        pts = [(r.k, r.C_eps) for r in sweep_or_points.ok_rows()]
    else:
        pts = list(sweep_or_points)
    k = np.array([p[0] for p in pts], dtype=float)
    cap = np.array([p[1] for p in pts], dtype=float)
    if k.size < 5 or np.any(k <= 1) or k.max() / k.min() < 100 * (1 - 1e-12):
        raise ValueError("fit needs >= 5 points with k > 1 spanning >= 2 decades")
    x = np.log(k)
    y = np.log(cap) - np.log(np.log(k))
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    return ScalingFit(float(slope), float(icpt), float(np.sqrt(np.mean(resid**2))),
                      float(k.min()), float(k.max()), int(k.size))


def table_exponent(regime: str, tau: int) -> float:
    """Reference exponent of the capacity law for each regime."""
    return {"dense": -1.0 / tau, "large": -(1.0 + 1.0 / tau), "large-dense": -(tau + 2.0) / (2.0 * tau)}[regime]


def _slope(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def unicast_reduction_check(template: NetworkConfig, eps_grid=(0.01, 0.02, 0.05, 0.1, 0.2),
                            s_grid=(2.0, 4.0, 8.0, 16.0, 32.0, 64.0), beta_grid=(0.25, 0.5, 1.0, 2.0, 4.0)) -> dict:
    """Slopes of the k = tau = 1 contention intensity against epsilon, s and beta.

    The epsilon and s slopes come from the closed form, with the solver's
    values alongside; the beta slope is reported for both normalizations.
    """
    if template.d != 2:
        raise ValueError("unicast reduction is stated for d = 2")

    def unicast(cfg):
        cfg = cfg.replace(tau=1)
        return cfg.replace(lambda_r=1.0 / derive_params(cfg).mu_r)

    base = unicast(template)
    eps_cf = [max_contention_closed_form(base.replace(epsilon=e)).lambda_bar for e in eps_grid]
    eps_sv = [solve_max_contention(base.replace(epsilon=e)).lambda_bar for e in eps_grid]
    s_cfgs = [unicast(template.replace(s=s)) for s in s_grid]
    s_cf = [max_contention_closed_form(c).lambda_bar for c in s_cfgs]
    s_sv = [solve_max_contention(c).lambda_bar for c in s_cfgs]
    beta_proof = [max_contention_closed_form(base.replace(beta=b)).lambda_bar for b in beta_grid]
    beta_lit = [max_contention_closed_form(base.replace(beta=b), "literal").lambda_bar for b in beta_grid]
    return {
        "k": derive_params(base).k,
        "eps_grid": list(eps_grid),
        "s_grid": list(s_grid),
        "beta_grid": list(beta_grid),
        "slope_eps": _slope(eps_grid, eps_cf),
        "slope_s": _slope(s_grid, s_cf),
        "slope_eps_solved": _slope(eps_grid, eps_sv),
        "slope_s_solved": _slope(s_grid, s_sv),
        "slope_beta_proof": _slope(beta_grid, beta_proof),
        "slope_beta_literal": _slope(beta_grid, beta_lit),
        "xi": derive_params(base).xi,
    }


def retransmission_study(template: NetworkConfig, tau_grid=(1, 2, 3, 4, 5, 6), k: float | None = None,
                         regime: str = "dense", lambda_method: str = "solved", normalization: str = "proof") -> dict:
    """Capacity per number of attempts; contention intensity and rate proxy recomputed for each tau."""
    taus = [int(t) for t in tau_grid]
    if not taus or min(taus) < 1:
        raise ValueError("tau_grid must hold positive integers")
    base = template if k is None else regime_config(regime, k, template)
    rows = []
    for tau in taus:
        cfg = base.replace(tau=tau)
        mu_r = derive_params(cfg).mu_r
        closed = max_contention_closed_form(cfg, normalization)
        lam = closed.lambda_bar
        solved = None
        if lambda_method == "solved":
            solved = lam = solve_max_contention(cfg).lambda_bar
        b = rate_proxy(lam, mu_r)
        rows.append({
            "tau": tau,
            "lambda_bar_closed": closed.lambda_bar,
            "lambda_bar_solved": solved,
            "b_proxy": b,
            "C_eps": multicast_capacity(b, lam, cfg.epsilon, tau),
            "premise_ok": not closed.warnings,
        })
    caps = [r["C_eps"] for r in rows]
    best = taus[int(np.argmax(caps))]
    return {"config": base.to_dict(), "lambda_method": lambda_method, "rows": rows, "tau_star": best}
