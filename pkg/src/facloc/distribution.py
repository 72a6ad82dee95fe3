"""The equalizing facility offset X(l) on [0, l].

For piecewise-linear concave costs X(l) is finitely supported on the points
i and l - i (i = 0..floor(l), in unit-piece coordinates).  Requiring the
expected cost E[c(|x - X|)] to have zero slope on every gap between
consecutive support points gives a homogeneous Toeplitz system whose unique
symmetric probability solution is found by differencing rows, rotating the
first column to the end and eliminating (the sign structure makes every
pivot positive, so no pivoting is needed).
"""

from dataclasses import dataclass
from functools import lru_cache
import math
from typing import Sequence, Tuple, Union

import numpy as np

from . import kernels
from .cost import CostFunction, Exponential, Linear, PiecewiseLinear, require_concave, to_unit_pieces


@dataclass(frozen=True, eq=False)
class Discrete:
    support: np.ndarray
    probs: np.ndarray
    length: float
    equal_cost: float


@dataclass(frozen=True, eq=False)
class ExponentialMixture:
    """Atoms of 1/(l*lam + 2) at 0 and at l, the rest uniform on (0, l)."""

    length: float
    lam: float
    equal_cost: float

    @property
    def atom(self) -> float:
        return 1.0 / (self.length * self.lam + 2.0)


FacilityDistribution = Union[Discrete, ExponentialMixture]


# ---------------------------------------------------------------------------
# support lattice

def _lattice(length: float) -> Tuple[np.ndarray, np.ndarray, int, float]:
    """Support as (integer part q, fractional flag t): the point is q + t*f."""
    m = math.floor(length)
    f = length - m
    if f == 0.0:
        return np.arange(m + 1), np.zeros(m + 1, dtype=np.int64), m, 0.0
    q = np.repeat(np.arange(m + 1), 2)
    t = np.tile(np.array([0, 1]), m + 1)
    return q, t, m, f


def support_points(length: float) -> np.ndarray:
    """Points i and length - i for i = 0..floor(length), sorted, deduplicated."""
    if length < 0:
        raise ValueError("length must be nonnegative")
    q, t, m, f = _lattice(length)
    # fractional points written as length - (m - q) so both ends are exact
    return np.where(t == 1, length - (m - q), q).astype(np.float64)


def build_system(length: float, slopes: Sequence[float]) -> np.ndarray:
    """Zero-slope conditions, one row per gap between consecutive support points.

    Row g, column s holds +slope(piece of x - s) for s left of the gap and
    -slope(piece of s - x) for s right of it.  Piece indices are computed on
    the lattice so no floor() of a float difference is ever taken.
    """
    if length <= 0:
        raise ValueError("length must be positive")
    beta = np.asarray(slopes, dtype=np.float64)
    q, t, _, _ = _lattice(length)
    size = q.size
    g = np.arange(size - 1)[:, None]
    s = np.arange(size)[None, :]
    left = s <= g
    # gap g spans lattice points g and g + 1
    qu, tu = q[g], t[g]
    qv, tv = q[g + 1], t[g + 1]
    qs, ts = q[s], t[s]
    piece_left = (qu - qs) - ((tu - ts) == -1)
    piece_right = (qs - qv) - ((ts - tv) == -1)
    piece = np.where(left, piece_left, piece_right)
    vals = beta[np.minimum(piece, beta.size - 1)]
    return np.where(left, vals, -vals)


def _check_structure(A: np.ndarray) -> None:
    n, cols = A.shape
    if cols != n + 1:
        raise ValueError("system must have one more column than rows")
    diag = np.concatenate((A[0, :0:-1], A[:, 0]))  # a_{-n} .. a_{n-1}
    idx = np.arange(n)[:, None] - np.arange(n + 1)[None, :] + n
    scale = np.abs(diag).max()
    tol = 1e-12 * scale
    if np.abs(A - diag[idx]).max() > tol:
        raise ValueError("system is not constant along diagonals")
    pos = diag[n:]  # a_0 .. a_{n-1}
    neg = diag[:n][::-1]  # a_{-1} .. a_{-n}
    if np.abs(neg + pos).max() > tol:
        raise ValueError("antisymmetry a_{m-1} = -a_{-m} violated")
    if np.any(pos <= 0):
        raise ValueError("diagonal values a_m (m >= 0) must be positive")
    if np.any(np.diff(pos) > tol):
        raise ValueError("diagonal values a_m (m >= 0) must be nonincreasing")


def nullspace_basis(A: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Nullspace of the row-differenced system, from free-variable settings.

    Returns (p1, p2): p1 has p_0 = 1, p_n = 0; p2 has p_0 = 0, p_n = 1.
    Both are nonnegative.
    """
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[0]
    width = n + 1
    if n == 1:
        return np.array([1.0, 0.0]), np.array([0.0, 1.0])
    diffed = A[1:] - A[:-1]
    rotated = np.ascontiguousarray(np.concatenate((diffed[:, 1:], diffed[:, :1]), axis=1))
    xs = kernels.nullspace_pair(rotated)
    # rotated column c is original column c + 1; the last one is column 0
    basis = np.empty((2, width))
    basis[:, 1:] = xs[:, :-1]
    basis[:, 0] = xs[:, -1]
    return basis[1], basis[0]


def solve_symmetric(A: np.ndarray) -> np.ndarray:
    """The unique symmetric, nonnegative, normalized solution of A p = 0."""
    A = np.asarray(A, dtype=np.float64)
    _check_structure(A)
    p1, p2 = nullspace_basis(A)
    return symmetrize(p1 + p2)


def symmetrize(v: np.ndarray) -> np.ndarray:
    v = 0.5 * (v + v[::-1])
    return v / v.sum()


# ---------------------------------------------------------------------------
# distributions


def _frozen(a):
    a = np.asarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def _point_mass(location=0.0):
    return Discrete(_frozen([location]), _frozen([1.0]), 0.0, 0.0)


@lru_cache(maxsize=4096)
def _piecewise_distribution(c: PiecewiseLinear, length: float) -> Discrete:
    slopes, scale = to_unit_pieces(c)
    u = length / scale
    q, t, m, f = _lattice(u)
    if q.size == 1:
        return _point_mass()
    probs = solve_symmetric(build_system(u, slopes))
    # write the upper half as length - offset so support mirrors exactly
    upper = (t == 1) if f else (2 * q > m)
    support = np.where(upper, length - (m - q) * scale, q * scale)
    return Discrete(_frozen(support), _frozen(probs), length, float(probs @ c(support)))


def distribution(c: CostFunction, length: float) -> FacilityDistribution:
    require_concave(c)
    length = float(length)
    if not length >= 0:
        raise ValueError("length must be nonnegative")
    if length == 0.0:
        return _point_mass()
    if isinstance(c, Linear):
        return Discrete(_frozen([0.0, length]), _frozen([0.5, 0.5]), length, 0.5 * c.slope * length)
    if isinstance(c, Exponential):
        r = length * c.lam
        return ExponentialMixture(length, c.lam, r / (r + 2.0))
    if isinstance(c, PiecewiseLinear):
        return _piecewise_distribution(c, length)
    raise ValueError(f"no distribution for cost kind {c.kind!r}")


def _uniform_integral(c: CostFunction, length: float, x):
    """int_0^length c(|x - t|) dt for scalar or array x."""
    x = np.asarray(x, dtype=np.float64)
    inside = c.integral(np.clip(x, 0, length)) + c.integral(np.clip(length - x, 0, length))
    right = c.integral(np.maximum(x, 0)) - c.integral(np.maximum(x - length, 0))
    left = c.integral(np.maximum(length - x, 0)) - c.integral(np.maximum(-x, 0))
    return np.where(x > length, right, np.where(x < 0, left, inside))


def expected_cost_at(dist: FacilityDistribution, c: CostFunction, x):
    """E[c(|x - X|)]; ``x`` may be any real (or array), also outside [0, l]."""
    x = np.asarray(x, dtype=np.float64)
    if isinstance(dist, Discrete):
        out = c(np.abs(x[..., None] - dist.support)) @ dist.probs
    else:
        ell = dist.length
        atoms = dist.atom * (c(np.abs(x)) + c(np.abs(x - ell)))
        out = atoms + dist.lam * dist.atom * _uniform_integral(c, ell, x)
    return float(out) if np.ndim(out) == 0 else out


def equal_cost_value(c: CostFunction, length: float) -> float:
    return distribution(c, length).equal_cost


# ---------------------------------------------------------------------------
# two-piece closed form, used as an independent cross-check of the solver

def two_piece_closed_form(beta1: float, beta2: float, length: float) -> Tuple[np.ndarray, np.ndarray]:
    """(support, probs) for slope beta1 on [0, 1) and beta2 beyond, unit pieces.

    Within (m, m+1) the integer point i and the mirrored point l - i both
    carry w_i proportional to rho^i - rho^(2m+2-i), rho the smaller root of
    the recurrence w_i = (b1 - b2) / (2 b1) * (w_{i-1} + w_{i+1}),
    1 <= i <= m, w_{m+1} = 0.  At integer l the two families merge.
    """
    if not beta1 > beta2 > 0:
        raise ValueError("need beta1 > beta2 > 0")
    if length <= 0:
        raise ValueError("length must be positive")
    m = math.floor(length)
    diff = beta1 - beta2
    rho = (beta1 - math.sqrt(beta1 * beta1 - diff * diff)) / diff
    i = np.arange(m + 1)
    w = rho ** i - rho ** (2 * m + 2 - i)
    w = w / (2 * w.sum())
    support = support_points(length)
    if length == m:
        # integer length is the limit from the right: point i gets w_i + w_{m-i}
        return support, w + w[::-1]
    probs = np.empty(2 * (m + 1))
    probs[0::2] = w
    probs[1::2] = w[::-1]
    return support, probs
