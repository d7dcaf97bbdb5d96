"""Vectorised numpy versions of the simulation kernels.

Same signatures and the same counter streams as the numba kernels; integer
outputs (counts, attempt indices, outage flags) match them exactly, floating
outputs to rounding.
"""

import numpy as np

from .. import rng as crng


def uniforms(seed, purpose, trial, attempt, index):
    return crng.uniform(seed, purpose, trial, attempt, index)


def _ragged(counts):
    """Owner index and within-owner position for a flattened ragged array."""
    owner = np.repeat(np.arange(len(counts)), counts)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.int64)
    local = np.arange(owner.size) - starts[owner]
    return owner, local, starts


def _gamma(seed, purpose, trial, attempt, index, m):
    idx = index[:, None] * m + np.arange(m)
    u = crng.uniform(seed, purpose, trial[:, None], attempt, idx)
    acc = np.zeros(len(index))
    for q in range(m):
        acc = acc - np.log(u[:, q])
    return acc


def _directions(seed, purpose, trial, attempt, index, d):
    k = crng.n_direction_uniforms(d)
    u = crng.uniform(seed, purpose, trial[:, None], attempt, index[:, None] * k + np.arange(k))
    dirs = crng.ball_directions(u, d)
    out = np.zeros((len(index), 3))
    out[:, :d] = dirs
    return out


def _path_loss(r, alpha):
    with np.errstate(divide="ignore"):
        return np.where(r >= 1.0, r ** (-alpha), 0.0)


def simulate_block(seed, t0, n, d, alpha, beta, s, m, tau, r_sim, rx_table, if_table,
                   iid, strict, gain_scale, per_rx, n_fixed, r_fixed):
    trials = t0 + np.arange(n, dtype=np.int64)
    if n_fixed >= 0:
        n_rx = np.full(n, n_fixed, dtype=np.int64)
    else:
        n_rx = np.searchsorted(rx_table, crng.uniform(seed, crng.RX_COUNT, trials, 0, 0)).astype(np.int64)
    rx_owner, rx_j, _ = _ragged(n_rx)
    rx_tr = trials[rx_owner]
    if r_fixed >= 0:
        rx_r = np.full(rx_owner.size, float(r_fixed))
    else:
        rx_r = (crng.uniform(seed, crng.RX_POS, rx_tr, 0, rx_j) * s**d) ** (1.0 / d)
    if per_rx:
        rx_x = _directions(seed, crng.RX_DIR, rx_tr, 0, rx_j, d) * rx_r[:, None]
    eff = np.where(rx_r < 1.0, 1.0, rx_r)
    pl = eff ** (-alpha)
    eligible = ~((rx_r < 1.0) & strict)
    rx_first = np.zeros(rx_owner.size, np.int32)
    interference = np.zeros((n, tau))

    for a in range(tau):
        apos = a if iid else 0
        if a == 0 or iid:
            nif = np.searchsorted(if_table, crng.uniform(seed, crng.IF_COUNT, trials, apos, 0)).astype(np.int64)
            if_owner, if_i, if_start = _ragged(nif)
            if_tr = trials[if_owner]
            if_r = (crng.uniform(seed, crng.IF_POS, if_tr, apos, if_i) * r_sim**d) ** (1.0 / d)
            if per_rx:
                if_x = _directions(seed, crng.IF_DIR, if_tr, apos, if_i, d) * if_r[:, None]
        marks = _gamma(seed, crng.IF_MARK, if_tr, a, if_i, m) / m
        i0 = np.bincount(if_owner, weights=marks * _path_loss(if_r, alpha), minlength=n)
        interference[:, a] = i0
        active = np.flatnonzero((rx_first == 0) & eligible)
        if active.size == 0:
            continue
        if per_rx:
            # all (receiver, interferer) pairs within each trial
            per = nif[rx_owner[active]]
            pair_rx, pair_k, _ = _ragged(per)
            pair_if = if_start[rx_owner[active]][pair_rx] + pair_k
            dist = np.linalg.norm(if_x[pair_if] - rx_x[active][pair_rx], axis=1)
            ij = np.bincount(pair_rx, weights=marks[pair_if] * _path_loss(dist, alpha), minlength=active.size)
        else:
            ij = i0[rx_owner[active]]
        h = _gamma(seed, crng.RX_GAIN, rx_tr[active], a, rx_j[active], m) * gain_scale
        hit = h * pl[active] >= beta * ij
        rx_first[active[hit]] = a + 1

    missing = np.bincount(rx_owner, weights=(rx_first == 0), minlength=n)
    outage = missing > 0
    return n_rx, rx_r, rx_first, interference, outage


def interference_block(seed, t0, n, d, alpha, m, r_sim, if_table, attempt):
    trials = t0 + np.arange(n, dtype=np.int64)
    nif = np.searchsorted(if_table, crng.uniform(seed, crng.IF_COUNT, trials, attempt, 0))
    owner, i, _ = _ragged(nif)
    tr = trials[owner]
    r = (crng.uniform(seed, crng.IF_POS, tr, attempt, i) * r_sim**d) ** (1.0 / d)
    g = _gamma(seed, crng.IF_MARK, tr, attempt, i, m) / m
    return np.bincount(owner, weights=g * _path_loss(r, alpha), minlength=n)


def hmax_block(seed, t0, n, m, tau, gain_scale):
    trials = t0 + np.arange(n, dtype=np.int64)
    zero = np.zeros(n, dtype=np.int64)
    best = np.zeros(n)
    for a in range(tau):
        best = np.maximum(best, _gamma(seed, crng.RATE_GAIN, trials, a, zero, m) * gain_scale)
    return best
