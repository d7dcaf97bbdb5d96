"""Poisson point patterns and the Palm-conditioned cluster scenario."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import rng as crng
from .model import NetworkConfig, derive_params, unit_ball_volume

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Region:
    """Ball (``inner == 0``) or annulus centred at the origin."""

    d: int
    outer: float
    inner: float = 0.0

    def __post_init__(self):
        if not (self.outer > self.inner >= 0):
            raise ValueError("region needs outer > inner >= 0")

    @property
    def volume(self) -> float:
        return unit_ball_volume(self.d) * (self.outer**self.d - self.inner**self.d)

    def radius_from_uniform(self, u):
        lo = self.inner**self.d
        return (lo + np.asarray(u) * (self.outer**self.d - lo)) ** (1.0 / self.d)

    def contains(self, points, slack=1e-12) -> np.ndarray:
        r = np.linalg.norm(np.atleast_2d(points), axis=1)
        return (r <= self.outer * (1 + slack)) & (r >= self.inner * (1 - slack))


@dataclass
class PointPattern:
    points: np.ndarray
    region: Region

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, self.region.d)

    def __len__(self):
        return len(self.points)

    @property
    def radii(self) -> np.ndarray:
        return np.linalg.norm(self.points, axis=1)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"x{i}" for i in range(self.region.d)])
        for p in self.points:
            writer.writerow([repr(float(c)) for c in p])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text: str, region: Region) -> "PointPattern":
        rows = list(csv.reader(io.StringIO(text)))
        pts = np.array([[float(c) for c in row] for row in rows[1:]], dtype=float)
        return cls(pts.reshape(-1, region.d), region)


def sample_ppp(intensity: float, region: Region, rng: np.random.Generator) -> PointPattern:
    """Homogeneous PPP on a ball or annulus."""
    if intensity < 0:
        raise ValueError("intensity must be >= 0")
    n = rng.poisson(intensity * region.volume) if intensity > 0 else 0
    r = region.radius_from_uniform(rng.random(n))
    k = crng.n_direction_uniforms(region.d)
    dirs = crng.ball_directions(rng.random((n, k)), region.d)
    return PointPattern(dirs * r[:, None], region)


def truncation_radius(lambda_t: float, alpha: float, d: int, bias_tol: float) -> float:
    """Smallest window radius whose neglected mean interference is at most ``bias_tol``."""
    if not alpha > d:
        raise ValueError("truncation needs alpha > d")
    if bias_tol <= 0:
        raise ValueError("bias_tol must be positive")
    if lambda_t == 0 or math.isinf(bias_tol):
        return 1.0
    mu_u = unit_ball_volume(d)
    r = (lambda_t * d * mu_u / ((alpha - d) * bias_tol)) ** (1.0 / (alpha - d))
    return max(1.0, r)


def simulation_radius(config: NetworkConfig, rel_bias: float = 1e-3, min_points: float = 50.0) -> float:
    """Window used by the simulator.

    Large enough that (a) the neglected mean interference is at most
    ``rel_bias`` of the full-plane mean and (b) the window holds
    ``min_points`` interferers on average, so sparse fields are not cut to
    nothing.  Never smaller than the cluster radius.
    """
    lam, alpha, d = config.lambda_t, config.alpha, config.d
    if lam == 0:
        return max(1.0, config.s)
    mu_u = unit_ball_volume(d)
    full = lam * d * mu_u / (alpha - d)
    r_bias = truncation_radius(lam, alpha, d, rel_bias * full)
    r_count = (min_points / (lam * mu_u)) ** (1.0 / d)
    return max(1.0, config.s, r_bias, r_count)


@dataclass
class ClusterScenario:
    """One Palm realisation: typical transmitter at the origin.

    ``interferers`` is the attempt-0 field; the simulator redraws it per
    attempt in iid mode from the same stream.
    """

    receivers: PointPattern
    interferers: PointPattern
    r_sim: float
    seed: int
    trial: int
    meta: dict = field(default_factory=dict)


def _stream_points(seed, trial, attempt, count_purpose, pos_purpose, dir_purpose, mean, region, n_fixed=None):
    table = crng.poisson_table(mean)
    if n_fixed is None:
        n = int(crng.poisson_from_uniform(crng.uniform(seed, count_purpose, trial, attempt, 0), table))
    else:
        n = n_fixed
    idx = np.arange(n)
    r = region.radius_from_uniform(crng.uniform(seed, pos_purpose, trial, attempt, idx))
    k = crng.n_direction_uniforms(region.d)
    u = crng.uniform(seed, dir_purpose, trial, attempt, idx[:, None] * k + np.arange(k))
    dirs = crng.ball_directions(u.reshape(n, k), region.d)
    return PointPattern(dirs * np.asarray(r).reshape(n, 1), region)


def interferer_field(config: NetworkConfig, r_sim: float, seed: int, trial: int, attempt: int) -> PointPattern:
    region = Region(config.d, r_sim)
    return _stream_points(
        seed, trial, attempt, crng.IF_COUNT, crng.IF_POS, crng.IF_DIR, config.lambda_t * region.volume, region
    )


def build_cluster_scenario(config: NetworkConfig, r_sim: float, seed: int, trial: int = 0) -> ClusterScenario:
    """Receivers ~ PPP(lambda_r) on B(0, s), interferers ~ PPP(lambda_t) on B(0, r_sim).

    Fully determined by ``(config, r_sim, seed, trial)``; draws come from the
    same counter streams as the batch simulator.
    """
    if r_sim < max(1.0, config.s):
        log.warning("simulation window %.3g is smaller than max(1, s)", r_sim)
    seed = crng.normalize_seed(seed)
    k = derive_params(config).k
    rx = _stream_points(seed, trial, 0, crng.RX_COUNT, crng.RX_POS, crng.RX_DIR, k, Region(config.d, config.s))
    itf = interferer_field(config, r_sim, seed, trial, 0)
    return ClusterScenario(rx, itf, r_sim, seed, trial)
