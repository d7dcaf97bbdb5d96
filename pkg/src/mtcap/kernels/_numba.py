"""Loop kernels compiled with numba (nopython, nogil)."""

import math

import numpy as np
from numba import njit

from .. import rng as crng

_G = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_TWO_M53 = 2.0**-53

RX_COUNT = crng.RX_COUNT
RX_POS = crng.RX_POS
RX_DIR = crng.RX_DIR
RX_GAIN = crng.RX_GAIN
IF_COUNT = crng.IF_COUNT
IF_POS = crng.IF_POS
IF_DIR = crng.IF_DIR
IF_MARK = crng.IF_MARK
RATE_GAIN = crng.RATE_GAIN

_JIT = dict(nogil=True, cache=True)


@njit(inline="always", **_JIT)
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(**_JIT)
def _uniform(seed, purpose, trial, attempt, index):
    h = _mix(seed ^ _mix(np.uint64(purpose) * _G + _ONE))
    h = _mix(h + (np.uint64(trial) + _ONE) * _G)
    h = _mix(h + (np.uint64(attempt) + _ONE) * _G)
    h = _mix(h + (np.uint64(index) + _ONE) * _G)
    return (np.float64(h >> _S11) + 0.5) * _TWO_M53


@njit(**_JIT)
def _gamma(seed, purpose, trial, attempt, index, m):
    acc = 0.0
    for q in range(m):
        acc += -math.log(_uniform(seed, purpose, trial, attempt, index * m + q))
    return acc


@njit(**_JIT)
def _direction(seed, purpose, trial, attempt, index, d, out):
    if d == 1:
        u = _uniform(seed, purpose, trial, attempt, index)
        out[0] = -1.0 if u < 0.5 else 1.0
        out[1] = 0.0
        out[2] = 0.0
    elif d == 2:
        ang = 2.0 * math.pi * _uniform(seed, purpose, trial, attempt, index)
        out[0] = math.cos(ang)
        out[1] = math.sin(ang)
        out[2] = 0.0
    else:
        cz = 2.0 * _uniform(seed, purpose, trial, attempt, 2 * index) - 1.0
        ang = 2.0 * math.pi * _uniform(seed, purpose, trial, attempt, 2 * index + 1)
        rho = math.sqrt(max(0.0, 1.0 - cz * cz))
        out[0] = rho * math.cos(ang)
        out[1] = rho * math.sin(ang)
        out[2] = cz


@njit(**_JIT)
def uniforms(seed, purpose, trial, attempt, index):
    out = np.empty(index.shape[0])
    for i in range(index.shape[0]):
        out[i] = _uniform(seed, purpose, trial[i], attempt, index[i])
    return out


@njit(**_JIT)
def simulate_block(seed, t0, n, d, alpha, beta, s, m, tau, r_sim, rx_table, if_table,
                   iid, strict, gain_scale, per_rx, n_fixed, r_fixed):
    inv_d = 1.0 / d
    n_rx = np.empty(n, np.int64)
    for t in range(n):
        if n_fixed >= 0:
            n_rx[t] = n_fixed
        else:
            n_rx[t] = np.searchsorted(rx_table, _uniform(seed, RX_COUNT, t0 + t, 0, 0))
    offsets = np.zeros(n + 1, np.int64)
    for t in range(n):
        offsets[t + 1] = offsets[t] + n_rx[t]
    total = offsets[n]
    rx_r = np.empty(total)
    rx_first = np.zeros(total, np.int32)
    interference = np.zeros((n, tau))
    outage = np.zeros(n, np.bool_)

    cap = 64
    if_r = np.empty(cap)
    if_x = np.zeros((cap, 3))
    marks = np.empty(cap)
    rx_x = np.zeros((16, 3))
    dirv = np.zeros(3)
    s_d = s**d
    r_d = r_sim**d

    for t in range(n):
        tr = t0 + t
        o = offsets[t]
        nr = n_rx[t]
        if per_rx and nr > rx_x.shape[0]:
            rx_x = np.zeros((2 * nr, 3))
        for j in range(nr):
            if r_fixed >= 0:
                r = r_fixed
            else:
                r = (_uniform(seed, RX_POS, tr, 0, j) * s_d) ** inv_d
            rx_r[o + j] = r
            if per_rx:
                _direction(seed, RX_DIR, tr, 0, j, d, dirv)
                for c in range(3):
                    rx_x[j, c] = r * dirv[c]
        nif = 0
        for a in range(tau):
            apos = a if iid else 0
            if a == 0 or iid:
                nif = np.searchsorted(if_table, _uniform(seed, IF_COUNT, tr, apos, 0))
                if nif > cap:
                    cap = 2 * nif
                    if_r = np.empty(cap)
                    if_x = np.zeros((cap, 3))
                    marks = np.empty(cap)
                for i in range(nif):
                    ri = (_uniform(seed, IF_POS, tr, apos, i) * r_d) ** inv_d
                    if_r[i] = ri
                    if per_rx:
                        _direction(seed, IF_DIR, tr, apos, i, d, dirv)
                        for c in range(3):
                            if_x[i, c] = ri * dirv[c]
            i0 = 0.0
            for i in range(nif):
                g = _gamma(seed, IF_MARK, tr, a, i, m) / m
                marks[i] = g
                if if_r[i] >= 1.0:
                    i0 += g * if_r[i] ** (-alpha)
            interference[t, a] = i0
            for j in range(nr):
                if rx_first[o + j] != 0:
                    continue
                r = rx_r[o + j]
                if r < 1.0:
                    if strict:
                        continue
                    r = 1.0
                pl = r ** (-alpha)
                ij = i0
                if per_rx:
                    ij = 0.0
                    for i in range(nif):
                        dd = 0.0
                        for c in range(3):
                            diff = if_x[i, c] - rx_x[j, c]
                            dd += diff * diff
                        dist = math.sqrt(dd)
                        if dist >= 1.0:
                            ij += marks[i] * dist ** (-alpha)
                h = _gamma(seed, RX_GAIN, tr, a, j, m) * gain_scale
                if h * pl >= beta * ij:
                    rx_first[o + j] = a + 1
        out = False
        for j in range(nr):
            if rx_first[o + j] == 0:
                out = True
                break
        outage[t] = out
    return n_rx, rx_r, rx_first, interference, outage


@njit(**_JIT)
def interference_block(seed, t0, n, d, alpha, m, r_sim, if_table, attempt):
    inv_d = 1.0 / d
    r_d = r_sim**d
    out = np.zeros(n)
    for t in range(n):
        tr = t0 + t
        nif = np.searchsorted(if_table, _uniform(seed, IF_COUNT, tr, attempt, 0))
        acc = 0.0
        for i in range(nif):
            ri = (_uniform(seed, IF_POS, tr, attempt, i) * r_d) ** inv_d
            g = _gamma(seed, IF_MARK, tr, attempt, i, m) / m
            if ri >= 1.0:
                acc += g * ri ** (-alpha)
        out[t] = acc
    return out


@njit(**_JIT)
def hmax_block(seed, t0, n, m, tau, gain_scale):
    out = np.zeros(n)
    for t in range(n):
        best = 0.0
        for a in range(tau):
            h = _gamma(seed, RATE_GAIN, t0 + t, a, 0, m) * gain_scale
            if h > best:
                best = h
        out[t] = best
    return out
