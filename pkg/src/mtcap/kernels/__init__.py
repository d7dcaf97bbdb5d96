"""Simulation kernels with two interchangeable backends.

``MTCAP_BACKEND=numpy`` (or ``MTCAP_DISABLE_NUMBA=1``) selects the pure-numpy
path; otherwise numba is used when it imports.
"""

import importlib
import logging
import os

log = logging.getLogger(__name__)

BACKENDS = ("numba", "numpy")


def _default_backend() -> str:
    if os.environ.get("MTCAP_DISABLE_NUMBA", "").strip() not in ("", "0"):
        return "numpy"
    name = os.environ.get("MTCAP_BACKEND", "numba").strip().lower()
    if name not in BACKENDS:
        raise ValueError(f"MTCAP_BACKEND must be one of {BACKENDS}, got {name!r}")
    return name


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` (default from the environment)."""
    name = name or _default_backend()
    if name == "numba":
        try:
            return importlib.import_module("._numba", __name__)
        except ImportError:  # pragma: no cover - numba is a declared dependency
            log.warning("numba unavailable, falling back to numpy kernels")
            name = "numpy"
    return importlib.import_module("._numpy", __name__)


def backend_name(module) -> str:
    return module.__name__.rsplit("_", 1)[-1]
