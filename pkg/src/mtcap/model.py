"""Network configuration, derived parameters, path loss and Nakagami-m fading."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np
from scipy import special

FADING_SCALES = ("unit-mean", "scale-one")


class ConfigError(ValueError):
    """A configuration violates one of the model constraints."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class NetworkConfig:
    d: int
    alpha: float
    beta: float
    s: float
    lambda_t: float
    lambda_r: float
    m: int
    tau: int
    epsilon: float

    def violations(self) -> list[str]:
        out = []
        if not (isinstance(self.d, (int, np.integer)) and self.d in (1, 2, 3)):
            out.append("d in {1, 2, 3}")
        if not self.alpha > self.d:
            out.append("alpha > d")
        if not self.beta > 0:
            out.append("beta > 0")
        if not self.s >= 1:
            out.append("s >= 1")
        if not 0 < self.epsilon < 1:
            out.append("epsilon in (0, 1)")
        if not self.lambda_t >= 0:
            out.append("lambda_t >= 0")
        if not self.lambda_r > 0:
            out.append("lambda_r > 0")
        if not (float(self.m).is_integer() and self.m >= 1):
            out.append("m >= 1 integer")
        if not (float(self.tau).is_integer() and self.tau >= 1):
            out.append("tau >= 1 integer")
        return out

    def validate(self) -> "NetworkConfig":
        bad = self.violations()
        if bad:
            raise ConfigError(bad)
        return self

    def replace(self, **changes) -> "NetworkConfig":
        data = asdict(self)
        data.update(changes)
        return NetworkConfig(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkConfig":
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - names)
        missing = sorted(names - set(data))
        problems = [f"unknown field '{k}'" for k in unknown]
        problems += [f"missing field '{k}'" for k in missing]
        if problems:
            raise ConfigError(problems)
        cfg = cls(
            d=int(data["d"]),
            alpha=float(data["alpha"]),
            beta=float(data["beta"]),
            s=float(data["s"]),
            lambda_t=float(data["lambda_t"]),
            lambda_r=float(data["lambda_r"]),
            m=int(data["m"]),
            tau=int(data["tau"]),
            epsilon=float(data["epsilon"]),
        )
        return cfg

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "NetworkConfig":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "NetworkConfig":
        return cls.from_json(Path(path).read_text())


@dataclass(frozen=True)
class DerivedParams:
    xi: float
    mu_u: float
    mu_r: float
    k: float


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(1 + d / 2)


def derive_params(config: NetworkConfig) -> DerivedParams:
    """Return xi = d/alpha, the unit-ball volume, the cluster volume and k."""
    config.validate()
    mu_u = unit_ball_volume(config.d)
    mu_r = mu_u * config.s**config.d
    return DerivedParams(
        xi=config.d / config.alpha,
        mu_u=mu_u,
        mu_r=mu_r,
        k=mu_r * config.lambda_r,
    )


def path_loss(distance, alpha):
    """Bounded power-law attenuation: ``distance**-alpha`` beyond unit range, 0 inside it."""
    r = np.asarray(distance, dtype=float)
    with np.errstate(divide="ignore"):
        g = np.where(r >= 1.0, r ** (-float(alpha)), 0.0)
    return g if g.ndim else float(g)


def nakagami_power_gain(m: int, rng: np.random.Generator, size=None, scale: str = "unit-mean"):
    """Draw Nakagami-m power gains, i.e. Gamma(m) variates.

    With ``scale="unit-mean"`` the gains have mean 1 and variance 1/m;
    ``"scale-one"`` gives Gamma(m, 1) (mean m).
    """
    theta = 1.0 / m if scale == "unit-mean" else 1.0
    return rng.gamma(m, theta, size=size)


def fading_cdf(x, m: int, scale: str = "unit-mean"):
    """CDF of the power gain: ``1 - Gamma(m, c x) / Gamma(m)`` with ``c = m`` (unit mean) or 1."""
    c = m if scale == "unit-mean" else 1.0
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    out = special.gammainc(m, c * x)
    return out if out.ndim else float(out)
