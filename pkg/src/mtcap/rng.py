"""Counter-based random streams.

Every uniform variate is a pure function of
``(master_seed, purpose, trial, attempt, index)``: the key is folded through
the SplitMix64 finaliser one field at a time.  No generator state exists, so
any partition of trials over workers reproduces the same numbers, and the
numba kernels can regenerate exactly what the numpy path draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_TWO_M53 = 2.0**-53

# purposes
RX_COUNT = 1
RX_POS = 2
RX_DIR = 3
RX_GAIN = 4
IF_COUNT = 5
IF_POS = 6
IF_DIR = 7
IF_MARK = 8
RATE_GAIN = 9

MASK64 = (1 << 64) - 1


def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _u64(x):
    return np.asarray(x).astype(np.uint64)


def key_hash(seed, purpose, trial, attempt, index):
    """Hash the counter tuple to uint64 (arrays broadcast)."""
    # uint64 wraparound is the point; scalar paths would otherwise warn
    with np.errstate(over="ignore"):
        h = mix64(_u64(seed) ^ mix64(_u64(purpose) * GOLDEN + _ONE))
        h = mix64(h + (_u64(trial) + _ONE) * GOLDEN)
        h = mix64(h + (_u64(attempt) + _ONE) * GOLDEN)
        return mix64(h + (_u64(index) + _ONE) * GOLDEN)


def uniform(seed, purpose, trial, attempt, index):
    """Uniform variates on the open interval (0, 1)."""
    h = key_hash(seed, purpose, trial, attempt, index)
    return ((h >> _S11).astype(np.float64) + 0.5) * _TWO_M53


def normalize_seed(seed: int) -> int:
    return int(seed) & MASK64


def poisson_table(mean: float) -> np.ndarray:
    """Cumulative Poisson probabilities used for inversion sampling.

    The table runs until the upper tail is below 1e-17; counts are drawn as
    ``searchsorted(table, u)`` so both kernel backends agree exactly.
    """
    if mean <= 0:
        return np.ones(1)
    nmax = int(mean + 12.0 * math.sqrt(mean) + 40)
    n = np.arange(nmax + 1)
    logp = -mean + n * math.log(mean) - np.array([math.lgamma(i + 1.0) for i in n])
    cdf = np.cumsum(np.exp(logp))
    cdf[-1] = 1.0
    return np.minimum(cdf, 1.0)


def poisson_from_uniform(u, table: np.ndarray):
    return np.searchsorted(table, u, side="left")


def gamma_from_uniforms(u, m: int, scale: float):
    """Gamma(m) variates from an (..., m) block of uniforms: sum of exponentials."""
    return -np.log(u).sum(axis=-1) * scale


def ball_directions(u, d: int):
    """Map (..., d-1 or 1) uniforms to unit vectors in R^d."""
    u = np.asarray(u, dtype=float)
    if d == 1:
        return np.where(u[..., :1] < 0.5, -1.0, 1.0)
    if d == 2:
        ang = 2.0 * np.pi * u[..., 0]
        return np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    cz = 2.0 * u[..., 0] - 1.0
    ang = 2.0 * np.pi * u[..., 1]
    rho = np.sqrt(np.maximum(0.0, 1.0 - cz * cz))
    return np.stack([rho * np.cos(ang), rho * np.sin(ang), cz], axis=-1)


def n_direction_uniforms(d: int) -> int:
    return 1 if d < 3 else 2


@dataclass(frozen=True)
class Stream:
    """Handle on the substreams of one trial."""

    seed: int
    trial: int

    def uniform(self, purpose: int, attempt: int, index) -> np.ndarray:
        return uniform(self.seed, purpose, self.trial, attempt, np.asarray(index))
