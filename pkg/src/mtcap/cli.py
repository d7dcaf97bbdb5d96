"""Command-line front end: ``mtcap validate``, ``mtcap run <what>`` and ``mtcap oracle``.

Every run writes ``result.json`` (deterministic for a fixed config, seed and
flags), ``rows.csv`` for tabular output, and ``manifest.json`` with the
config, derived parameters, flags, timing, collected warnings and content
hashes of the other files.

Exit codes: 0 ok, 2 config or usage error, 3 numeric failure, 4 bracket failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .capacity import SWEEP_COLUMNS, fit_exponent, multicast_capacity, rate_proxy, retransmission_study, sweep
from .model import ConfigError, NetworkConfig, derive_params
from .outage import (
    BracketError,
    max_contention_closed_form,
    outage_probability_analytic,
    solve_max_contention,
)
from .pointprocess import truncation_radius
from .quadrature import ConvergenceError
from .shotnoise import (
    QuadratureError,
    ShotNoiseQuery,
    campbell_mean,
    connected_intensity_bound,
    delta1,
    laplace_functional,
    laplace_pgfl_direct,
    per_attempt_success,
)

log = logging.getLogger("mtcap")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_BRACKET = 0, 2, 3, 4
CSV_SCHEMA_VERSION = 1
SUBCOMMANDS = ("laplace", "success-prob", "outage", "lambda-max", "rate", "mtc", "sweep", "retx-study")
NATS_PER_BIT = math.log(2.0)


class _Collect(logging.Handler):
    def __init__(self):
        super().__init__(logging.WARNING)
        self.messages = []

    def emit(self, record):
        msg = record.getMessage()
        if msg not in self.messages:
            self.messages.append(msg)


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                    for v in r])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _sim_options(args):
    from .montecarlo import SimOptions

    return SimOptions(mode=args.mode, clip=args.clip, fading_scale=args.fading_scale,
                      interference_at=args.interference_at, workers=args.workers,
                      backend=args.backend, r_sim=args.r_sim)


def _rate_unit(args, value):
    if value is None:
        return None
    return value / NATS_PER_BIT if args.bits else value


# subcommands: each returns (result dict, (header, rows) or None)

def run_laplace(cfg, args):
    lam = cfg.lambda_t
    if args.window is None:
        # neglected mean at most 1e-4, relative once the full-plane mean exceeds one
        bias = 1e-4 * max(1.0, campbell_mean(lam, cfg.alpha, cfg.d))
        window = truncation_radius(lam, cfg.alpha, cfg.d, bias)
    else:
        window = args.window
    phis = _floats(args.phi)
    mc = None
    if args.trials and lam > 0:
        from .montecarlo import estimate_interference

        mc = estimate_interference(cfg, phis, args.trials, args.seed, r_sim=window,
                                   workers=args.workers, backend=args.backend)
    rows = []
    for i, phi in enumerate(phis):
        q = ShotNoiseQuery.from_config(cfg, phi, window=window)
        rows.append([phi, laplace_functional(q), laplace_pgfl_direct(phi, lam, cfg.m, cfg.alpha, cfg.d, window),
                     None if mc is None else float(mc.laplace[i]), None if mc is None else float(mc.laplace_se[i])])
    header = ["phi", "closed_form", "pgfl_direct", "mc", "mc_se"]
    return {"window": window, "trials": args.trials if mc is not None else 0,
            "rows": [dict(zip(header, r)) for r in rows]}, (header, rows)


def run_success_prob(cfg, args):
    radii = _floats(args.r) if args.r else [float(x) for x in np.arange(1, math.floor(cfg.s) + 1)]
    p = np.atleast_1d(per_attempt_success(radii, cfg, fading_scale=args.fading_scale, clip=args.clip))
    bound = np.atleast_1d(connected_intensity_bound(radii, cfg.tau, cfg, fading_scale=args.fading_scale,
                                                     clip=args.clip))
    rows = []
    for r, pr, b in zip(radii, p, bound):
        row = [r, float(pr), float(b), None, None]
        if args.trials:
            from .montecarlo import estimate_link_success

            freq, hw = estimate_link_success(cfg.replace(tau=1), r, args.trials, args.seed, _sim_options(args))
            row[3:] = [freq, hw]
        rows.append(row)
    header = ["r", "p_attempt", "connected_intensity_bound", "mc_frequency", "mc_half_width"]
    return {"rows": [dict(zip(header, r)) for r in rows]}, (header, rows)


def run_outage(cfg, args):
    out = {"analytic": outage_probability_analytic(cfg, fading_scale=args.fading_scale, clip=args.clip)}
    if args.oracle == "mc":
        from .montecarlo import estimate_outage

        out["mc"] = estimate_outage(cfg, args.trials, args.seed, _sim_options(args)).to_dict()
    return out, None


def run_lambda_max(cfg, args):
    if args.oracle == "closed":
        sol = max_contention_closed_form(cfg, args.normalization, args.a_hat_b)
    else:
        sol = solve_max_contention(cfg, args.oracle, args.tolerance, fading_scale=args.fading_scale,
                                   clip=args.clip, trials=args.trials, seed=args.seed,
                                   sim_options=_sim_options(args) if args.oracle == "mc" else None)
    return sol.to_dict(), None


def run_rate(cfg, args):
    from .montecarlo import check_rate_bounds, estimate_rate

    est = estimate_rate(cfg, args.trials, args.seed, _sim_options(args))
    rep = check_rate_bounds([(cfg.lambda_t, est)], cfg)
    return {
        "unit": "bits" if args.bits else "nats",
        "b": _rate_unit(args, est.b),
        "half_width": _rate_unit(args, est.half_width),
        "trials": est.trials,
        "discarded": est.discarded,
        "flagged": est.flagged,
        "log_term": _rate_unit(args, float(rep.log_term[0])),
        "ratio": float(rep.ratio[0]),
        "in_band": rep.in_band,
    }, None


def run_mtc(cfg, args):
    if args.oracle == "closed":
        lam = max_contention_closed_form(cfg, args.normalization, args.a_hat_b).lambda_bar
    else:
        lam = solve_max_contention(cfg, args.oracle, args.tolerance, trials=args.trials, seed=args.seed,
                                   sim_options=_sim_options(args) if args.oracle == "mc" else None).lambda_bar
    b = b_proxy = rate_proxy(lam, derive_params(cfg).mu_r)
    b_mc = None
    if args.rate_method == "mc":
        from .montecarlo import estimate_rate

        b_mc = b = estimate_rate(cfg.replace(lambda_t=lam), args.trials, args.seed, _sim_options(args)).b
    cap = multicast_capacity(b, lam, cfg.epsilon, cfg.tau)
    return {"unit": "bits" if args.bits else "nats", "lambda_bar": lam, "b_proxy": _rate_unit(args, b_proxy),
            "b_mc": _rate_unit(args, b_mc), "C_eps": _rate_unit(args, cap)}, None


def run_sweep(cfg, args):
    ks = _floats(args.k_grid)
    res = sweep(args.regime, ks, cfg, lambda_method="closed" if args.oracle == "closed" else "solved",
                rate_method=args.rate_method, normalization=args.normalization, c=args.c,
                mc_trials=args.trials, seed=args.seed, sim_options=_sim_options(args))
    rows = []
    for r in res.rows:
        vals = r.csv_values()
        if args.bits:
            for col in ("b_proxy", "b_mc", "C_eps"):
                i = SWEEP_COLUMNS.index(col)
                if vals[i] != "":
                    vals[i] = repr(float(vals[i]) / NATS_PER_BIT)
        rows.append(vals)
    out = {"regime": args.regime, "unit": "bits" if args.bits else "nats",
           "rows": [asdict(r) for r in res.rows], "warnings": res.warnings}
    try:
        out["fit"] = asdict(fit_exponent(res))
    except ValueError as exc:
        out["fit"] = None
        out["warnings"].append(f"fit skipped: {exc}")
    return out, (list(SWEEP_COLUMNS), rows)


def run_retx(cfg, args):
    k = None if args.k is None else float(args.k)
    study = retransmission_study(cfg, _ints(args.tau_grid), k, regime=args.regime,
                                 lambda_method="closed" if args.oracle == "closed" else "solved",
                                 normalization=args.normalization)
    header = ["tau", "lambda_bar_closed", "lambda_bar_solved", "b_proxy", "C_eps", "premise_ok"]
    for r in study["rows"]:
        r["b_proxy"] = _rate_unit(args, r["b_proxy"])
        r["C_eps"] = _rate_unit(args, r["C_eps"])
    study["unit"] = "bits" if args.bits else "nats"
    return study, (header, [[r[h] for h in header] for r in study["rows"]])


RUNNERS = {
    "laplace": run_laplace,
    "success-prob": run_success_prob,
    "outage": run_outage,
    "lambda-max": run_lambda_max,
    "rate": run_rate,
    "mtc": run_mtc,
    "sweep": run_sweep,
    "retx-study": run_retx,
}


def _closed_form_check(cfg) -> list[str]:
    """Compare the closed-form Laplace exponent with the generating-functional integral."""
    if cfg.lambda_t == 0:
        return []
    phi = cfg.beta * cfg.s**cfg.alpha * cfg.m
    a = delta1(ShotNoiseQuery.from_config(cfg, phi))
    lt = laplace_pgfl_direct(phi, 1.0, cfg.m, cfg.alpha, cfg.d)
    b = -math.log(lt) / derive_params(cfg).mu_u
    if abs(a - b) > 1e-6 * abs(b):
        return [f"closed-form vs generating-functional exponent differ at phi={phi:.4g}: {a:.10g} vs {b:.10g}"]
    return []


def _write(path: Path, text: str) -> str:
    path.write_text(text)
    return hashlib.sha256(text.encode()).hexdigest()


def _flags(args) -> dict:
    keys = ("seed", "trials", "mode", "clip", "normalization", "oracle", "fading_scale", "interference_at",
            "workers", "backend", "r_sim", "bits", "a_hat_b", "tolerance")
    return {k: getattr(args, k) for k in keys if hasattr(args, k)}


def cmd_run(args) -> int:
    cfg = NetworkConfig.load(args.config).validate()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    handler = _Collect()
    log.addHandler(handler)
    t0 = time.perf_counter()
    try:
        result, table = RUNNERS[args.what](cfg, args)
    finally:
        log.removeHandler(handler)
    elapsed = time.perf_counter() - t0
    warnings = handler.messages + _closed_form_check(cfg)
    payload = {"command": args.what, "config": cfg.to_dict(), "result": _jsonable(result)}
    files = {"result.json": _write(out / "result.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")}
    if table is not None:
        files["rows.csv"] = _write(out / "rows.csv", _csv_text(*table))
    manifest = {
        "tool": "mtcap",
        "version": __version__,
        "command": args.what,
        "config": cfg.to_dict(),
        "derived": asdict(derive_params(cfg)),
        "seed": args.seed,
        "flags": _flags(args),
        "timing_seconds": elapsed,
        "warnings": warnings,
        "outputs": {name: {"sha256": h} for name, h in files.items()},
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "csv_columns": table[0] if table is not None else None,
    }
    (out / "manifest.json").write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n")
    print(json.dumps({"ok": True, "out": str(out), "outputs": files}))
    return EXIT_OK


def self_check(cfg: NetworkConfig, trials: int = 20000, seed: int = 1) -> list[str]:
    """Rayleigh three-way Laplace agreement at three arguments, plus basic monotonicity."""
    from .montecarlo import estimate_interference

    errors = []
    lam = 0.01  # reference density; sparse fields make the simulated transform a rare-event estimate
    ref = cfg.replace(m=1, lambda_t=lam)
    window = truncation_radius(lam, cfg.alpha, cfg.d, 1e-4)
    phis = [1.0, 4.0, 16.0]
    mc = estimate_interference(ref, phis, trials, seed, r_sim=window)
    for i, phi in enumerate(phis):
        a = laplace_functional(ShotNoiseQuery.from_config(ref, phi, window=window))
        b = laplace_pgfl_direct(phi, lam, 1, cfg.alpha, cfg.d, window)
        if abs(a - b) > 1e-6 * b:
            errors.append(f"laplace closed form vs generating functional at phi={phi}: {a} vs {b}")
        if abs(mc.laplace[i] - a) > 3 * mc.laplace_se[i]:
            errors.append(f"laplace closed form vs simulation at phi={phi}: {a} vs {mc.laplace[i]}")
    grid = np.arange(1.0, math.floor(cfg.s) + 1)
    p = np.atleast_1d(per_attempt_success(grid, cfg))
    if np.any(np.diff(p) > 1e-12):
        errors.append("per-attempt success not non-increasing in r")
    if outage_probability_analytic(cfg.replace(lambda_t=0.0)) != 0.0:
        errors.append("outage at lambda_t = 0 is not 0")
    errors += _closed_form_check(cfg)
    return errors


def cmd_validate(args) -> int:
    try:
        raw = json.loads(Path(args.config).read_text())
        cfg = NetworkConfig.from_dict(raw)
    except ConfigError as exc:
        print(json.dumps({"ok": False, "errors": exc.violations}))
        return EXIT_CONFIG
    bad = cfg.violations()
    if bad:
        print(json.dumps({"ok": False, "errors": bad}))
        return EXIT_CONFIG
    errors = self_check(cfg, args.trials, args.seed)
    print(json.dumps({"ok": not errors, "errors": errors, "derived": asdict(derive_params(cfg))}))
    return EXIT_NUMERIC if errors else EXIT_OK


def cmd_oracle(args) -> int:
    from .golden import write_golden

    path = Path(args.out) if args.out else Path(__file__).with_name("data") / "golden.json"
    write_golden(path)
    print(json.dumps({"ok": True, "golden": str(path)}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mtcap", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"mtcap {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    v = sub.add_parser("validate", help="check a config and run the fast self-consistency suite")
    v.add_argument("config")
    v.add_argument("--trials", type=int, default=20000)
    v.add_argument("--seed", type=int, default=1)
    v.set_defaults(func=cmd_validate)

    o = sub.add_parser("oracle", help="regenerate the golden reference file")
    o.add_argument("--out", default=None)
    o.set_defaults(func=cmd_oracle)

    r = sub.add_parser("run", help="run one computation")
    r.add_argument("what", choices=SUBCOMMANDS)
    r.add_argument("config")
    r.add_argument("--out", default="out")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--trials", type=int, default=10000)
    r.add_argument("--mode", choices=("iid", "fixed"), default="iid")
    r.add_argument("--clip", choices=("capped", "strict-eq1"), default="capped")
    r.add_argument("--normalization", choices=("proof", "literal"), default="proof")
    r.add_argument("--oracle", choices=("analytic", "mc", "closed"), default="analytic")
    r.add_argument("--fading-scale", choices=("unit-mean", "scale-one"), default="unit-mean")
    r.add_argument("--interference-at", choices=("origin", "receiver"), default="origin")
    r.add_argument("--workers", "--threads", dest="workers", type=int, default=1)
    r.add_argument("--backend", choices=("numba", "numpy"), default=None)
    r.add_argument("--r-sim", type=float, default=None, help="simulation window radius")
    r.add_argument("--bits", action="store_true", help="report rates in bits instead of nats")
    r.add_argument("--a-hat-b", type=float, default=1.0)
    r.add_argument("--tolerance", type=float, default=1e-5)
    r.add_argument("--phi", default="1,4,16")
    r.add_argument("--window", type=float, default=None)
    r.add_argument("--r", default=None, help="comma-separated receiver distances")
    r.add_argument("--rate-method", choices=("proxy", "mc"), default="proxy")
    r.add_argument("--regime", choices=("dense", "large", "large-dense"), default="dense")
    r.add_argument("--k-grid", default="100,177.8,316.2,562.3,1000,1778,3162,5623,10000")
    r.add_argument("--c", type=float, default=1.0)
    r.add_argument("--tau-grid", default="1,2,3,4,5,6")
    r.add_argument("--k", type=float, default=None)
    r.set_defaults(func=cmd_run)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    saved = [(h, h.level) for h in logging.root.handlers], log.level
    for h in logging.root.handlers:
        h.setLevel(logging.INFO if args.verbose else logging.ERROR)
    # warnings still reach the manifest collector
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(json.dumps({"ok": False, "errors": exc.violations}))
        return EXIT_CONFIG
    except BracketError as exc:
        print(json.dumps({"ok": False, "errors": [f"bracket: {exc}"]}))
        return EXIT_BRACKET
    except (QuadratureError, ConvergenceError, ArithmeticError) as exc:
        print(json.dumps({"ok": False, "errors": [f"numeric: {exc}"]}))
        return EXIT_NUMERIC
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(json.dumps({"ok": False, "errors": [str(exc)]}))
        return EXIT_CONFIG
    finally:
        for h, level in saved[0]:
            h.setLevel(level)
        log.setLevel(saved[1])

if __name__ == "__main__":
    sys.exit(main())
