"""Hot numeric kernels.

Every kernel exists twice: an explicit-loop version compiled with
``numba.njit`` and a vectorized numpy version.  The public names at the
bottom of the module point at one or the other.  Set ``FACLOC_NUMBA=0`` in the
environment to force the numpy path (numba is also skipped silently when it
cannot be imported).
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and os.environ.get("FACLOC_NUMBA", "1").lower() not in ("0", "false", "no", "off")


def _njit(fn):
    if numba is None:
        return fn
    return numba.njit(cache=True)(fn)


# ---------------------------------------------------------------------------
# greedy interval covering

def _greedy_starts_loop(xs, length):
    out = np.empty(xs.shape[0])
    count = 0
    start = xs[0]
    out[0] = start
    count = 1
    for i in range(1, xs.shape[0]):
        if xs[i] - start > length:
            start = xs[i]
            out[count] = start
            count += 1
    return out[:count]


def greedy_starts_numpy(xs, length):
    starts = []
    i = 0
    n = xs.shape[0]
    while i < n:
        start = xs[i]
        starts.append(start)
        beyond = np.flatnonzero(xs[i:] - start > length)
        if beyond.size == 0:
            break
        i += int(beyond[0])
    return np.asarray(starts, dtype=np.float64)


# ---------------------------------------------------------------------------
# nullspace of the differenced system (row echelon + back substitution)

def _nullspace_pair_loop(M):
    # M: q x (q+2) with positive diagonal, nonpositive off-diagonal entries.
    q = M.shape[0]
    w = M.shape[1]
    G = M.copy()
    for i in range(q):
        piv = G[i, i]
        for r in range(i + 1, q):
            f = G[r, i] / piv
            if f != 0.0:
                G[r, i] = 0.0
                for c in range(i + 1, w):
                    G[r, c] -= f * G[i, c]
    out = np.zeros((2, w))
    out[0, w - 2] = 1.0
    out[1, w - 1] = 1.0
    for b in range(2):
        for j in range(q - 1, -1, -1):
            acc = 0.0
            for c in range(j + 1, w):
                acc -= G[j, c] * out[b, c]
            out[b, j] = acc / G[j, j]
    return out


def nullspace_pair_numpy(M):
    q, w = M.shape
    G = np.array(M, dtype=np.float64, copy=True)
    for i in range(q - 1):
        f = G[i + 1:, i] / G[i, i]
        G[i + 1:, i:] -= np.outer(f, G[i, i:])
    out = np.zeros((2, w))
    out[0, w - 2] = 1.0
    out[1, w - 1] = 1.0
    for j in range(q - 1, -1, -1):
        out[:, j] = -(out[:, j + 1:] @ G[j, j + 1:]) / G[j, j]
    return out


# ---------------------------------------------------------------------------
# loser probabilities: q_i = k_i * int_0^{1/k_i} prod_{j != i} min(1, k_j t) dt

def _loser_probs_loop(kappa):
    m = kappa.shape[0]
    q = np.empty(m)
    if m == 1:
        q[0] = 1.0
        return q
    order = np.argsort(-kappa)  # breakpoints 1/k_j ascending
    ks = kappa[order]
    for i in range(m):
        ki = kappa[i]
        top = 1.0 / ki
        # active set: all j != i with 1/k_j > t; starts as everyone but i
        coef = 1.0
        deg = 0
        for j in range(m):
            if j != i:
                coef *= kappa[j]
                deg += 1
        total = 0.0
        lo = 0.0
        skipped_self = False
        for idx in range(m):
            kj = ks[idx]
            if order[idx] == i and not skipped_self:
                skipped_self = True
                continue
            b = 1.0 / kj
            if b >= top:
                break
            if b > lo:
                total += coef * (b ** (deg + 1) - lo ** (deg + 1)) / (deg + 1)
                lo = b
            coef /= kj
            deg -= 1
        total += coef * (top ** (deg + 1) - lo ** (deg + 1)) / (deg + 1)
        q[i] = ki * total
    return q


def loser_probs_numpy(kappa):
    kappa = np.asarray(kappa, dtype=np.float64)
    m = kappa.shape[0]
    if m == 1:
        return np.ones(1)
    q = np.empty(m)
    for i in range(m):
        others = np.sort(1.0 / np.delete(kappa, i))
        kos = 1.0 / others  # same agents, descending kappa
        top = 1.0 / kappa[i]
        cut = int(np.searchsorted(others, top, side="left"))
        edges = np.concatenate(([0.0], others[:cut], [top]))
        r = m - 1
        # on segment s, the s agents with smallest breakpoints are saturated
        degs = r - np.arange(cut + 1)
        coefs = np.concatenate(([1.0], np.cumprod(1.0 / kos[:cut]))) * np.prod(kos)
        seg = coefs * (edges[1:] ** (degs + 1) - edges[:-1] ** (degs + 1)) / (degs + 1)
        q[i] = kappa[i] * seg.sum()
    return q


# ---------------------------------------------------------------------------
# nearest facility distances for many realizations

def _nearest_distances_loop(facilities, points):
    S, k = facilities.shape
    n = points.shape[0]
    out = np.empty((S, n))
    for s in range(S):
        for i in range(n):
            best = np.inf
            for j in range(k):
                d = abs(points[i] - facilities[s, j])
                if d < best:
                    best = d
            out[s, i] = best
    return out


def nearest_distances_numpy(facilities, points):
    return np.abs(points[None, :, None] - facilities[:, None, :]).min(axis=2)


greedy_starts_jit = _njit(_greedy_starts_loop)
nullspace_pair_jit = _njit(_nullspace_pair_loop)
loser_probs_jit = _njit(_loser_probs_loop)
nearest_distances_jit = _njit(_nearest_distances_loop)

if USE_NUMBA:
    greedy_starts = greedy_starts_jit
    nullspace_pair = nullspace_pair_jit
    loser_probs = loser_probs_jit
    nearest_distances = nearest_distances_jit
else:
    greedy_starts = greedy_starts_numpy
    nullspace_pair = nullspace_pair_numpy
    loser_probs = loser_probs_numpy
    nearest_distances = nearest_distances_numpy
