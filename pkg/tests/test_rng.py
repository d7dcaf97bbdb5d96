import numpy as np
import pytest
from scipy import stats

from mtcap import rng as crng


def test_uniform_open_interval_and_deterministic():
    idx = np.arange(100_000)
    u = crng.uniform(1, crng.IF_POS, 3, 0, idx)
    assert np.all((u > 0) & (u < 1))
    np.testing.assert_array_equal(u, crng.uniform(1, crng.IF_POS, 3, 0, idx))
    assert stats.kstest(u, "uniform").pvalue > 1e-3


def test_keys_give_distinct_streams():
    idx = np.arange(1000)
    base = crng.uniform(7, crng.RX_GAIN, 0, 0, idx)
    for other in (crng.uniform(8, crng.RX_GAIN, 0, 0, idx), crng.uniform(7, crng.IF_MARK, 0, 0, idx),
                  crng.uniform(7, crng.RX_GAIN, 1, 0, idx), crng.uniform(7, crng.RX_GAIN, 0, 1, idx)):
        assert not np.any(base == other)
        assert abs(np.corrcoef(base, other)[0, 1]) < 0.1


def test_seed_normalisation_wraps_to_64_bits():
    assert crng.normalize_seed(-1) == 2**64 - 1
    assert crng.normalize_seed(2**64 + 5) == 5


@pytest.mark.parametrize("mean", [0.3, 5.0, 120.0])
def test_poisson_inversion_matches_pmf(mean):
    table = crng.poisson_table(mean)
    assert table[-1] == 1.0 and np.all(np.diff(table) >= 0)
    u = crng.uniform(2, crng.RX_COUNT, np.arange(200_000), 0, 0)
    n = crng.poisson_from_uniform(u, table)
    assert n.mean() == pytest.approx(mean, rel=0.02, abs=0.01)
    assert n.var() == pytest.approx(mean, rel=0.03, abs=0.01)


def test_poisson_table_zero_mean():
    assert crng.poisson_from_uniform(0.999, crng.poisson_table(0.0)) == 0


def test_gamma_from_uniforms_moments():
    u = crng.uniform(4, crng.IF_MARK, 0, 0, np.arange(300_000).reshape(-1, 3))
    g = crng.gamma_from_uniforms(u, 3, 1 / 3)
    assert g.mean() == pytest.approx(1.0, rel=0.01)
    assert g.var() == pytest.approx(1 / 3, rel=0.03)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_directions_are_unit_and_centred(d):
    k = crng.n_direction_uniforms(d)
    u = crng.uniform(5, crng.RX_DIR, 0, 0, np.arange(60_000 * k)).reshape(-1, k)
    v = crng.ball_directions(u, d)
    np.testing.assert_allclose(np.linalg.norm(v, axis=-1), 1.0)
    np.testing.assert_allclose(v.mean(axis=0), 0.0, atol=0.02)


def test_stream_handle():
    s = crng.Stream(9, 4)
    np.testing.assert_array_equal(s.uniform(crng.RX_POS, 0, [0, 1]), crng.uniform(9, crng.RX_POS, 4, 0, np.array([0, 1])))
