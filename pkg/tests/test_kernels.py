import importlib
import math

import numpy as np
import pytest

from mtcap import rng as crng
from mtcap.kernels import backend_name, get_backend


def _args(d, per_rx, iid=True, m=2, tau=3, strict=False):
    rx = crng.poisson_table(6.0)
    itf = crng.poisson_table(0.05 * (math.pi if d == 2 else (2.0 if d == 1 else 4 / 3 * math.pi)) * 8.0**d)
    return (np.uint64(99), 40, 300, d, 3.5 if d < 3 else 4.0, 1.0, 3.0, m, tau, 8.0, rx, itf,
            iid, strict, 1.0 / m, per_rx, -1, -1.0)


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("per_rx", [False, True])
@pytest.mark.parametrize("iid", [True, False])
def test_simulate_block_backends_agree(d, per_rx, iid):
    a = get_backend("numba").simulate_block(*_args(d, per_rx, iid))
    b = get_backend("numpy").simulate_block(*_args(d, per_rx, iid))
    for x, y in zip(a, b):
        if x.dtype.kind in "ib":
            np.testing.assert_array_equal(x, y)
        else:
            np.testing.assert_allclose(x, y, rtol=1e-12, atol=0)


def test_fixed_counts_and_strict_clip_agree():
    args = list(_args(2, False, strict=True))
    args[-2], args[-1] = 4, 0.5
    a = get_backend("numba").simulate_block(*args)
    b = get_backend("numpy").simulate_block(*args)
    np.testing.assert_array_equal(a[0], 4)
    np.testing.assert_array_equal(a[2], 0)  # receivers inside the unit ball never connect
    np.testing.assert_array_equal(a[2], b[2])


def test_interference_and_hmax_agree():
    table = crng.poisson_table(30.0)
    a = get_backend("numba").interference_block(np.uint64(3), 0, 500, 2, 4.0, 2, 10.0, table, 1)
    b = get_backend("numpy").interference_block(np.uint64(3), 0, 500, 2, 4.0, 2, 10.0, table, 1)
    np.testing.assert_allclose(a, b, rtol=1e-12)
    a = get_backend("numba").hmax_block(np.uint64(3), 0, 500, 3, 4, 1 / 3)
    b = get_backend("numpy").hmax_block(np.uint64(3), 0, 500, 3, 4, 1 / 3)
    np.testing.assert_allclose(a, b, rtol=1e-13)


def test_uniforms_match_reference():
    idx = np.arange(50, dtype=np.int64)
    trial = np.full(50, 7, dtype=np.int64)
    ref = crng.uniform(11, crng.IF_POS, 7, 2, idx)
    for name in ("numba", "numpy"):
        np.testing.assert_array_equal(get_backend(name).uniforms(np.uint64(11), crng.IF_POS, trial, 2, idx), ref)


def test_environment_selects_backend(monkeypatch):
    import mtcap.kernels as k

    monkeypatch.setenv("MTCAP_DISABLE_NUMBA", "1")
    assert backend_name(k.get_backend()) == "numpy"
    monkeypatch.delenv("MTCAP_DISABLE_NUMBA")
    monkeypatch.setenv("MTCAP_BACKEND", "numpy")
    assert backend_name(k.get_backend()) == "numpy"
    monkeypatch.setenv("MTCAP_BACKEND", "numba")
    assert backend_name(k.get_backend()) == "numba"
    monkeypatch.setenv("MTCAP_BACKEND", "cuda")
    with pytest.raises(ValueError):
        k.get_backend()
    importlib.reload(k)
