"""Minimum-length covering of points on the line by equal-length intervals."""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from . import kernels


@dataclass(frozen=True)
class Covering:
    """Intervals [a_i, a_i + length], ordered left to right.

    Consecutive intervals satisfy a_{i+1} - a_i >= length (touching allowed).
    There may be fewer intervals than facilities when fewer suffice.

    Membership is tested as 0 <= x - a <= length, the same arithmetic the
    greedy uses; a + length can round below a point that x - a says is in.
    """

    length: float
    starts: Tuple[float, ...]

    @property
    def count(self) -> int:
        return len(self.starts)

    def covers(self, x: float) -> bool:
        return any(0 <= x - a <= self.length for a in self.starts)


def _distinct(locations) -> np.ndarray:
    xs = np.unique(np.asarray(locations, dtype=np.float64))
    if xs.size == 0:
        raise ValueError("locations must be nonempty")
    return xs


def greedy_cover(locations: Sequence[float], length: float) -> Tuple[float, ...]:
    """Open an interval at each leftmost uncovered point.

    ``locations`` must be sorted ascending.  The number of starts returned is
    the minimum number of length-``length`` intervals covering the points.
    """
    xs = np.asarray(locations, dtype=np.float64)
    if xs.size == 0:
        raise ValueError("locations must be nonempty")
    if length < 0:
        raise ValueError("length must be nonnegative")
    return tuple(kernels.greedy_starts(xs, float(length)).tolist())


def candidate_lengths(locations: Sequence[float]) -> np.ndarray:
    xs = _distinct(locations)
    diffs = (xs[None, :] - xs[:, None])[np.triu_indices(xs.size, 1)]
    return np.unique(np.concatenate(([0.0], diffs)))


def min_cover(locations: Sequence[float], k: int) -> Covering:
    if k < 1:
        raise ValueError("k must be at least 1")
    xs = _distinct(locations)
    if xs.size <= k:
        return Covering(0.0, tuple(xs.tolist()))
    cands = candidate_lengths(xs)
    lo, hi = 0, cands.size - 1  # the full span is always feasible
    while lo < hi:
        mid = (lo + hi) // 2
        if kernels.greedy_starts(xs, cands[mid]).size <= k:
            hi = mid
        else:
            lo = mid + 1
    length = float(cands[lo])
    return Covering(length, tuple(kernels.greedy_starts(xs, length).tolist()))


def fit_bounded(cov: Covering, L: float, locations: Sequence[float] = None) -> Covering:
    """Shift intervals left so that all of them lie inside [0, L].

    a'_i = min(a_i, L - (m + 1 - i) * length) for intervals i = 1..m.
    """
    if locations is not None:
        xs = np.asarray(locations, dtype=np.float64)
        if xs.size and (xs.min() < 0 or xs.max() > L):
            raise ValueError("location outside [0,L]")
    if min(cov.starts) < 0 or max(cov.starts) > L:
        raise ValueError("location outside [0,L]")
    ell = cov.length
    # Right to left: b_i = min(a_i, b_{i+1} - ell) equals the closed form
    # because greedy starts already satisfy a_{i+1} - a_i >= ell.  Computing
    # it this way lets each gap be checked (and nudged) in floating point.
    starts = list(cov.starts)
    edge = L
    for i in range(len(starts) - 1, -1, -1):
        b = min(starts[i], edge - ell)
        while edge - b < ell:
            b = np.nextafter(b, -np.inf)
        starts[i] = max(float(b), 0.0)
        edge = starts[i]
    return Covering(ell, tuple(starts))
