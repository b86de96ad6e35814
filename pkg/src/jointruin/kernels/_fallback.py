"""Numpy implementations of the path-scan kernels.

Paths are padded rows: ``theta[m, K]`` arrival times, ``sigma[m, K]`` claim
sizes, ``counts[m]`` the number of valid columns per row.  Ruin indices use
0 for ruin at time zero, ``k >= 1`` for the k-th arrival and -1 for no ruin.
"""

import numpy as np

NO_RUIN = -1


def _first_true(mask):
    if mask.shape[1] == 0:
        return np.full(mask.shape[0], NO_RUIN, dtype=np.int64)
    hit = mask.any(axis=1)
    return np.where(hit, mask.argmax(axis=1) + 1, NO_RUIN).astype(np.int64)


def _valid(theta, counts):
    return np.arange(theta.shape[1])[None, :] < counts[:, None]


def scan_joint(theta, sigma, counts, x1, x2, p1, p2, r):
    m = theta.shape[0]
    out = np.full((m, 4), NO_RUIN, dtype=np.int64)
    valid = _valid(theta, counts)
    disc = np.cumsum(np.exp(-r * theta) * sigma, axis=1)
    drift = -np.expm1(-r * theta)
    neg1 = ((x1 + p1 * drift - disc) < 0) & valid
    neg2 = ((x2 + p2 * drift - disc) < 0) & valid
    out[:, 0] = _first_true(neg1)
    out[:, 1] = _first_true(neg2)
    out[:, 2] = _first_true(neg1 | neg2)
    out[:, 3] = _first_true(neg1 & neg2)
    if x1 < 0:
        out[:, 0] = 0
    if x2 < 0:
        out[:, 1] = 0
    if x1 < 0 or x2 < 0:
        out[:, 2] = 0
    if x1 < 0 and x2 < 0:
        out[:, 3] = 0
    return out


def scan_joint_compounded(theta, sigma, counts, u1, u2, c1, c2, d1, d2, r):
    m, K = theta.shape
    out = np.full((m, 4), NO_RUIN, dtype=np.int64)
    U1 = np.full(m, float(u1))
    U2 = np.full(m, float(u2))
    prev = np.zeros(m)
    for k in range(K):
        live = k < counts
        if not live.any():
            break
        dt = theta[:, k] - prev
        g = np.exp(r * dt)
        e = np.expm1(r * dt)
        U1 = np.where(live, g * U1 + (c1 / r) * e - d1 * sigma[:, k], U1)
        U2 = np.where(live, g * U2 + (c2 / r) * e - d2 * sigma[:, k], U2)
        prev = np.where(live, theta[:, k], prev)
        n1 = live & (U1 < 0)
        n2 = live & (U2 < 0)
        for col, hit in ((0, n1), (1, n2), (2, n1 | n2), (3, n1 & n2)):
            fresh = hit & (out[:, col] == NO_RUIN)
            out[fresh, col] = k + 1
    if u1 < 0:
        out[:, 0] = 0
    if u2 < 0:
        out[:, 1] = 0
    if u1 < 0 or u2 < 0:
        out[:, 2] = 0
    if u1 < 0 and u2 < 0:
        out[:, 3] = 0
    return out


def first_passage_levels(theta, sigma, counts, levels, p, r):
    """Univariate ruin index of ``x + p(1 - e^{-rt}) - S(t)`` for every
    starting level ``x`` in ``levels``, sharing one set of paths."""
    levels = np.asarray(levels, dtype=float)
    m = theta.shape[0]
    valid = _valid(theta, counts)
    excess = np.cumsum(np.exp(-r * theta) * sigma, axis=1) + p * np.expm1(-r * theta)
    excess = np.where(valid, excess, -np.inf)
    out = np.empty((m, levels.size), dtype=np.int64)
    for j, x in enumerate(levels):
        out[:, j] = 0 if x < 0 else _first_true(excess > x)
    return out
