"""Multicast capacity of clustered random wireless networks: analytics and simulation."""

__version__ = "0.1.0"

from .model import ConfigError, DerivedParams, NetworkConfig, derive_params  # noqa: E402
from .shotnoise import (  # noqa: E402
    ShotNoiseQuery,
    connected_intensity_bound,
    delta1,
    delta2,
    laplace_functional,
    laplace_pgfl_direct,
    mgf,
    per_attempt_success,
    psi,
)
from .outage import (  # noqa: E402
    BracketError,
    ContentionSolution,
    max_contention_closed_form,
    outage_probability_analytic,
    solve_max_contention,
)
from .capacity import fit_exponent, multicast_capacity, regime_config, sweep  # noqa: E402

__all__ = [
    "__version__",
    "BracketError",
    "ConfigError",
    "ContentionSolution",
    "DerivedParams",
    "NetworkConfig",
    "ShotNoiseQuery",
    "connected_intensity_bound",
    "delta1",
    "delta2",
    "derive_params",
    "fit_exponent",
    "laplace_functional",
    "laplace_pgfl_direct",
    "max_contention_closed_form",
    "mgf",
    "multicast_capacity",
    "outage_probability_analytic",
    "per_attempt_success",
    "psi",
    "regime_config",
    "solve_max_contention",
    "sweep",
]
