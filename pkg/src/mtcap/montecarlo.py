"""Monte-Carlo simulation of tau-attempt multicast in the Poisson cluster model.

Trials are cut into fixed blocks of ``BLOCK`` consecutive trial ids.  Every
random number is addressed by ``(seed, purpose, trial, attempt, index)``, so
the block results, and therefore every estimate, are independent of how many
workers process the blocks.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from . import rng as crng
from .kernels import backend_name, get_backend
from .model import FADING_SCALES, NetworkConfig, derive_params, path_loss, unit_ball_volume
from .pointprocess import ClusterScenario, interferer_field, simulation_radius

log = logging.getLogger(__name__)

BLOCK = 4096
Z95 = 1.959963984540054
MODES = {"iid": "iid-interference", "fixed": "fixed-positions"}
CLIPS = ("capped", "strict-eq1")


@dataclass(frozen=True)
class SimOptions:
    mode: str = "iid"
    clip: str = "capped"
    fading_scale: str = "unit-mean"
    interference_at: str = "origin"
    workers: int = 1
    backend: str | None = None
    r_sim: float | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {tuple(MODES)}")
        if self.clip not in CLIPS:
            raise ValueError(f"clip must be one of {CLIPS}")
        if self.fading_scale not in FADING_SCALES:
            raise ValueError(f"fading_scale must be one of {FADING_SCALES}")
        if self.interference_at not in ("origin", "receiver"):
            raise ValueError("interference_at must be 'origin' or 'receiver'")

    def window(self, config: NetworkConfig) -> float:
        return self.r_sim if self.r_sim is not None else simulation_radius(config)

    def gain_scale(self, m: int) -> float:
        return 1.0 / m if self.fading_scale == "unit-mean" else 1.0


@dataclass
class TrialOutcome:
    distances: np.ndarray
    first_attempt: np.ndarray  # 0 = never connected, else 1-based attempt
    interference: np.ndarray
    outage: bool

    @property
    def connected(self) -> np.ndarray:
        return self.first_attempt > 0


@dataclass
class OutageEstimate:
    probability: float
    half_width: float
    trials: int
    mode: str
    clip: str

    def to_dict(self):
        return asdict(self)


@dataclass
class RateEstimate:
    b: float
    half_width: float
    trials: int
    discarded: int
    flagged: bool = False

    @property
    def standard_error(self) -> float:
        return self.half_width / Z95

    def to_dict(self):
        return asdict(self)


@dataclass
class SimulationResult:
    """Concatenated per-trial and per-receiver arrays of one batch run."""

    n_rx: np.ndarray
    rx_r: np.ndarray
    rx_first: np.ndarray
    interference: np.ndarray
    outage: np.ndarray
    r_sim: float
    backend: str

    @property
    def rx_owner(self) -> np.ndarray:
        return np.repeat(np.arange(len(self.n_rx)), self.n_rx)

    @property
    def trials(self) -> int:
        return len(self.n_rx)


def _blocks(trials: int):
    return [(t0, min(BLOCK, trials - t0)) for t0 in range(0, trials, BLOCK)]


def _map_blocks(fn, trials: int, workers: int):
    blocks = _blocks(trials)
    if workers <= 1 or len(blocks) == 1:
        return [fn(t0, n) for t0, n in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda b: fn(*b), blocks))


def simulate(config: NetworkConfig, trials: int, seed: int, opts: SimOptions = SimOptions(),
             n_fixed: int = -1, r_fixed: float = -1.0) -> SimulationResult:
    """Run ``trials`` independent Palm realisations of the tau-attempt protocol.

    ``n_fixed >= 0`` replaces the Poisson receiver count by a fixed count;
    ``r_fixed >= 0`` puts every receiver at that distance.
    """
    config.validate()
    kern = get_backend(opts.backend)
    dp = derive_params(config)
    r_sim = opts.window(config)
    rx_table = crng.poisson_table(dp.k)
    if_table = crng.poisson_table(config.lambda_t * unit_ball_volume(config.d) * r_sim**config.d)
    seed64 = np.uint64(crng.normalize_seed(seed))

    def run(t0, n):
        return kern.simulate_block(
            seed64, t0, n, config.d, float(config.alpha), float(config.beta), float(config.s),
            config.m, config.tau, float(r_sim), rx_table, if_table,
            opts.mode == "iid", opts.clip == "strict-eq1", opts.gain_scale(config.m),
            opts.interference_at == "receiver", int(n_fixed), float(r_fixed),
        )

    parts = _map_blocks(run, trials, opts.workers)
    cat = [np.concatenate([p[i] for p in parts]) for i in range(5)]
    return SimulationResult(*cat, r_sim=r_sim, backend=backend_name(kern))


def run_trial(scenario: ClusterScenario, config: NetworkConfig, opts: SimOptions = SimOptions()) -> TrialOutcome:
    """Play the tau attempts of one scenario.

    Reference path for a single realisation, written directly against the
    point patterns.  Later attempts draw their interferer fields (iid mode)
    and all fading marks from the scenario's stream, so the outcome equals
    the batch kernels' trial with the same id.
    """
    seed, trial, m, alpha = scenario.seed, scenario.trial, config.m, config.alpha
    rx = scenario.receivers
    r = rx.radii
    nr = len(r)
    eligible = ~((r < 1.0) & (opts.clip == "strict-eq1"))
    pl = np.maximum(r, 1.0) ** (-alpha)
    first = np.zeros(nr, dtype=np.int32)
    samples = np.zeros(config.tau)
    field = scenario.interferers
    idx_rx = np.arange(nr)
    for a in range(config.tau):
        if a > 0 and opts.mode == "iid":
            field = interferer_field(config, scenario.r_sim, seed, trial, a)
        ni = len(field)
        u = crng.uniform(seed, crng.IF_MARK, trial, a, np.arange(ni)[:, None] * m + np.arange(m))
        marks = -np.log(u).sum(axis=1) / m
        samples[a] = float(np.sum(marks * path_loss(field.radii, alpha)))
        if opts.interference_at == "receiver":
            dist = np.linalg.norm(field.points[None, :, :] - rx.points[:, None, :], axis=2)
            i_rx = (marks[None, :] * path_loss(dist, alpha)).sum(axis=1)
        else:
            i_rx = np.full(nr, samples[a])
        ug = crng.uniform(seed, crng.RX_GAIN, trial, a, idx_rx[:, None] * m + np.arange(m))
        h = -np.log(ug).sum(axis=1) * opts.gain_scale(m)
        hit = (first == 0) & eligible & (h * pl >= config.beta * i_rx)
        first[hit] = a + 1
    return TrialOutcome(r, first, samples, bool(np.any(first == 0)))


def _binomial_estimate(hits: int, n: int):
    p = hits / n
    return p, Z95 * math.sqrt(p * (1 - p) / n)


def estimate_outage(config: NetworkConfig, trials: int, seed: int, opts: SimOptions = SimOptions(),
                    n_fixed: int = -1) -> OutageEstimate:
    """Fraction of trials in which some receiver is still unconnected after tau attempts."""
    if trials < 100:
        raise ValueError("estimate_outage needs at least 100 trials")
    res = simulate(config, trials, seed, opts, n_fixed=n_fixed)
    p, hw = _binomial_estimate(int(res.outage.sum()), trials)
    return OutageEstimate(p, hw, trials, MODES[opts.mode], opts.clip)


def estimate_link_success(config: NetworkConfig, r: float, trials: int, seed: int,
                          opts: SimOptions = SimOptions()) -> tuple[float, float]:
    """Frequency with which a single receiver at distance ``r`` connects within tau attempts."""
    res = simulate(config, trials, seed, opts, n_fixed=1, r_fixed=r)
    return _binomial_estimate(int((res.rx_first > 0).sum()), trials)


@dataclass
class IntensityCurve:
    edges: np.ndarray
    intensity: np.ndarray
    half_width: np.ndarray
    trials: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])


def _bin_counts(res: SimulationResult, edges: np.ndarray, connected_only: bool = True) -> np.ndarray:
    """(trials, bins) matrix of receiver counts per radial bin."""
    nb = len(edges) - 1
    sel = res.rx_first > 0 if connected_only else np.ones(res.rx_r.size, bool)
    b = np.searchsorted(edges, res.rx_r, side="right") - 1
    ok = sel & (b >= 0) & (b < nb)
    flat = res.rx_owner[ok] * nb + b[ok]
    return np.bincount(flat, minlength=res.trials * nb).reshape(res.trials, nb)


def estimate_connected_intensity(config: NetworkConfig, radial_bins, trials: int, seed: int,
                                 opts: SimOptions = SimOptions()) -> IntensityCurve:
    """Connected-receiver density per radial bin: count / (trials * bin volume)."""
    edges = np.asarray(radial_bins, dtype=float)
    if np.any(np.diff(edges) <= 0) or edges[0] < 0 or edges[-1] > config.s * (1 + 1e-12):
        raise ValueError("bins must be increasing within [0, s]")
    res = simulate(config, trials, seed, opts)
    counts = _bin_counts(res, edges)
    vol = unit_ball_volume(config.d) * np.diff(edges**config.d)
    mean = counts.mean(axis=0)
    sd = counts.std(axis=0, ddof=1)
    return IntensityCurve(edges, mean / vol, Z95 * sd / math.sqrt(trials) / vol, trials)


@dataclass
class DispersionReport:
    edges: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    ratio: np.ndarray
    p_value: np.ndarray
    trials: int


def thinning_dispersion(config: NetworkConfig, edges, trials: int, seed: int,
                        opts: SimOptions = SimOptions()) -> DispersionReport:
    """Variance/mean of connected counts in disjoint annuli with a two-sided dispersion test."""
    edges = np.asarray(edges, dtype=float)
    res = simulate(config, trials, seed, opts)
    counts = _bin_counts(res, edges)
    mean = counts.mean(axis=0)
    var = counts.var(axis=0, ddof=1)
    ratio = var / mean
    stat = (trials - 1) * ratio
    cdf = stats.chi2.cdf(stat, trials - 1)
    pval = 2 * np.minimum(cdf, 1 - cdf)
    return DispersionReport(edges, mean, var, ratio, pval, trials)


@dataclass
class InterferenceStats:
    mean: float
    variance: float
    mean_se: float
    phi: np.ndarray
    laplace: np.ndarray
    laplace_se: np.ndarray
    trials: int
    r_sim: float
    samples: np.ndarray = field(repr=False, default=None)


def sample_interference(config: NetworkConfig, trials: int, seed: int, r_sim: float,
                        workers: int = 1, backend: str | None = None, attempt: int = 0) -> np.ndarray:
    """Shot-noise samples at the origin, one fresh interferer field per trial."""
    kern = get_backend(backend)
    table = crng.poisson_table(config.lambda_t * unit_ball_volume(config.d) * r_sim**config.d)
    seed64 = np.uint64(crng.normalize_seed(seed))
    parts = _map_blocks(
        lambda t0, n: kern.interference_block(seed64, t0, n, config.d, float(config.alpha), config.m,
                                              float(r_sim), table, attempt),
        trials, workers,
    )
    return np.concatenate(parts)


def estimate_interference(config: NetworkConfig, phi_grid, trials: int, seed: int,
                          r_sim: float | None = None, workers: int = 1, backend: str | None = None) -> InterferenceStats:
    """Mean, variance and empirical Laplace transform of the interference at the origin."""
    if trials < 1000:
        raise ValueError("estimate_interference needs at least 1000 trials")
    r_sim = simulation_radius(config) if r_sim is None else r_sim
    x = sample_interference(config, trials, seed, r_sim, workers, backend)
    phi = np.atleast_1d(np.asarray(phi_grid, dtype=float))
    e = np.exp(-phi[:, None] * x[None, :])
    return InterferenceStats(
        mean=float(x.mean()),
        variance=float(x.var(ddof=1)),
        mean_se=float(x.std(ddof=1) / math.sqrt(trials)),
        phi=phi,
        laplace=e.mean(axis=1),
        laplace_se=e.std(axis=1, ddof=1) / math.sqrt(trials),
        trials=trials,
        r_sim=r_sim,
        samples=x,
    )


def rate_samples(config: NetworkConfig, trials: int, seed: int, opts: SimOptions = SimOptions()):
    """Interference and best-of-tau desired gains for the cluster-edge link."""
    kern = get_backend(opts.backend)
    r_sim = opts.window(config)
    interference = sample_interference(config, trials, seed, r_sim, opts.workers, opts.backend)
    seed64 = np.uint64(crng.normalize_seed(seed))
    hmax = np.concatenate(_map_blocks(
        lambda t0, n: kern.hmax_block(seed64, t0, n, config.m, config.tau, opts.gain_scale(config.m)),
        trials, opts.workers,
    ))
    return interference, hmax


def estimate_rate(config: NetworkConfig, trials: int, seed: int, opts: SimOptions = SimOptions()) -> RateEstimate:
    """Mean of ``log(1 + H_max s^-alpha / I)`` in nats.

    Trials whose truncated field produces no interference are dropped and
    counted; more than 1% of them sets ``flagged``.
    """
    if config.lambda_t <= 0:
        raise ValueError("rate estimation needs lambda_t > 0 (interference-limited model)")
    interference, hmax = rate_samples(config, trials, seed, opts)
    keep = interference > 0
    dropped = int((~keep).sum())
    vals = np.log1p(hmax[keep] * config.s ** (-config.alpha) / interference[keep])
    n = vals.size
    flagged = dropped > 0.01 * trials
    if flagged:
        log.warning("rate estimate discarded %d of %d zero-interference trials", dropped, trials)
    return RateEstimate(float(vals.mean()), float(Z95 * vals.std(ddof=1) / math.sqrt(n)), n, dropped, flagged)


@dataclass
class RateBoundsReport:
    lambda_t: np.ndarray
    b: np.ndarray
    log_term: np.ndarray
    ratio: np.ndarray
    delta: float
    max_excess: float
    band: tuple
    in_band: bool


def check_rate_bounds(rates, config: NetworkConfig, band=(0.2, 3.0)) -> RateBoundsReport:
    """Compare rate estimates with ``log(1 + 1/(mu_r lambda_t))``.

    ``rates`` is a sequence of ``(lambda_t, RateEstimate)`` pairs; the lower
    constant is reported as the smallest observed ratio, the additive one as
    the largest ``b - log(...)``.
    """
    mu_r = derive_params(config).mu_r
    lam = np.array([lt for lt, _ in rates], dtype=float)
    b = np.array([r.b for _, r in rates], dtype=float)
    L = np.log1p(1.0 / (mu_r * lam))
    ratio = b / L
    return RateBoundsReport(
        lambda_t=lam,
        b=b,
        log_term=L,
        ratio=ratio,
        delta=float(ratio.min()),
        max_excess=float(np.max(b - L)),
        band=tuple(band),
        in_band=bool(np.all((ratio >= band[0]) & (ratio <= band[1]))),
    )


TRIAL_COLUMNS = ("trial", "outage", "n_rx", "min_attempt", "max_attempt")


def write_trial_csv(path, res: SimulationResult):
    """One row per trial: outage flag, receiver count, first-success range, interference per attempt."""
    tau = res.interference.shape[1]
    owner = res.rx_owner
    connected = res.rx_first > 0
    big = np.iinfo(np.int32).max
    mins = np.full(res.trials, big)
    np.minimum.at(mins, owner[connected], res.rx_first[connected])
    maxs = np.zeros(res.trials, dtype=np.int64)
    np.maximum.at(maxs, owner[connected], res.rx_first[connected])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(TRIAL_COLUMNS) + [f"I_{a + 1}" for a in range(tau)])
        for t in range(res.trials):
            lo = "" if mins[t] == big else int(mins[t])
            hi = "" if maxs[t] == 0 else int(maxs[t])
            w.writerow([t, int(res.outage[t]), int(res.n_rx[t]), lo, hi]
                       + [repr(float(v)) for v in res.interference[t]])
