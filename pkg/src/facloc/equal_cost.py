"""The Equal Cost mechanism and its radius-cost variant.

Interval i (counted from 1, left to right) gets its facility at a_i + X when
i is odd and at a_i + l - X when i is even, for one shared draw X ~ X(l).
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .cost import CostFunction, Radius, require_concave
from .covering import Covering, fit_bounded, min_cover
from .distribution import Discrete, ExponentialMixture, FacilityDistribution, distribution
from .instance import Instance


@dataclass(frozen=True, eq=False)
class EcOutcome:
    covering: Covering
    dist: FacilityDistribution
    cost: CostFunction
    k: int

    @property
    def length(self) -> float:
        return self.covering.length

    @property
    def starts(self) -> np.ndarray:
        return np.asarray(self.covering.starts)

    @property
    def flipped(self) -> np.ndarray:
        """True where the facility sits at a_i + l - X (even intervals, counted from 1)."""
        return np.arange(self.covering.count) % 2 == 1

    def lines(self) -> Tuple[np.ndarray, np.ndarray]:
        """Facility j sits at base_j + slope_j * X."""
        slope = np.where(self.flipped, -1.0, 1.0)
        base = self.starts + np.where(self.flipped, self.length, 0.0)
        return base, slope

    def place(self, X) -> np.ndarray:
        """Facility locations for offset(s) X; shape (..., intervals)."""
        base, slope = self.lines()
        return base + slope * np.asarray(X, dtype=np.float64)[..., None]


def run(instance: Instance) -> EcOutcome:
    if isinstance(instance.cost, Radius):
        raise ValueError("radius cost is not concave; use radius_variant")
    require_concave(instance.cost)
    cov = min_cover(instance.locations, instance.k)
    if instance.bound is not None:
        cov = fit_bounded(cov, instance.bound, instance.locations)
    return EcOutcome(cov, distribution(instance.cost, cov.length), instance.cost, instance.k)


def _pad(facilities: np.ndarray, k: int) -> np.ndarray:
    if facilities.shape[-1] >= k:
        return facilities
    extra = np.repeat(facilities[..., -1:], k - facilities.shape[-1], axis=-1)
    return np.concatenate((facilities, extra), axis=-1)


def draw_offset(dist: FacilityDistribution, rng: np.random.Generator, size=None):
    if isinstance(dist, Discrete):
        return rng.choice(dist.support, size=size, p=dist.probs)
    u = rng.random(size)
    v = rng.random(size)
    a = dist.atom
    return np.where(u < a, 0.0, np.where(u < 2 * a, dist.length, v * dist.length))


def sample(outcome: EcOutcome, rng) -> np.ndarray:
    """One realization: k facility locations in left-to-right order.

    ``rng`` is a Generator or a seed.
    """
    rng = np.random.default_rng(rng)
    X = float(draw_offset(outcome.dist, rng))
    return _pad(outcome.place(X), outcome.k)


# ---------------------------------------------------------------------------
# exact expectations over X


def _uniform_envelope_integral(cost, ell, offsets, slope, worst):
    """int_0^ell c(D(X)) dX, D piecewise linear in X.

    ``offsets[i, j] = y_i - base_j`` so |offsets - slope * X| is the distance
    from point i to facility j.  D is min over j, then max over i if
    ``worst`` else kept per point (returns an array).
    """
    n, k = offsets.shape
    # signed lines +/-(offsets - slope X): intercepts and slopes (+-1)
    b = np.concatenate((offsets.ravel(), -offsets.ravel()))
    s = np.concatenate((np.tile(-slope, n), np.tile(slope, n)))
    zeros = (offsets / slope).ravel()
    if worst:
        groups = [(b, s)]
    else:
        groups = [(np.concatenate((offsets[i], -offsets[i])), np.concatenate((-slope, slope))) for i in range(n)]
    results = []
    for gi, (bb, ss) in enumerate(groups):
        up, dn = bb[ss > 0], bb[ss < 0]
        cross = 0.5 * (dn[:, None] - up[None, :]).ravel()
        z = zeros if worst else offsets[gi] / slope
        pts = np.concatenate(([0.0, ell], z, cross))
        pts = np.unique(pts[(pts >= 0) & (pts <= ell)])
        rows = offsets if worst else offsets[gi:gi + 1]
        D = np.abs(rows[:, :, None] - slope[None, :, None] * pts[None, None, :]).min(axis=1)
        D = D.max(axis=0)
        du, dv = D[:-1], D[1:]
        h = np.diff(pts)
        gap = dv - du
        flat = np.abs(gap) <= 1e-9 * (1.0 + np.abs(du))
        safe = np.where(flat, 1.0, gap)
        steep = h * (cost.integral(dv) - cost.integral(du)) / safe
        level = h * cost(0.5 * (du + dv))
        results.append(float(np.where(flat, level, steep).sum()))
    return results[0] if worst else np.asarray(results)


def _point_costs(outcome: EcOutcome, points: np.ndarray, worst: bool):
    c = outcome.cost
    dist = outcome.dist
    if isinstance(dist, Discrete):
        F = np.ascontiguousarray(outcome.place(dist.support))
        D = kernels.nearest_distances(F, points)
        if worst:
            return float(dist.probs @ c(D.max(axis=1)))
        return dist.probs @ c(D)
    ell = dist.length
    atom = dist.atom
    F_ends = outcome.place(np.array([0.0, ell]))
    D = kernels.nearest_distances(np.ascontiguousarray(F_ends), points)
    if worst:
        ends = c(D.max(axis=1)).sum()
    else:
        ends = c(D).sum(axis=0)
    base, slope = outcome.lines()
    offsets = points[:, None] - base[None, :]
    body = _uniform_envelope_integral(c, ell, offsets, slope, worst)
    return atom * ends + dist.lam * atom * body


def agent_expected_costs(outcome: EcOutcome, locations: Sequence[float]) -> np.ndarray:
    """Expected nearest-facility cost for agents truly at ``locations``."""
    pts = np.atleast_1d(np.asarray(locations, dtype=np.float64))
    return np.asarray(_point_costs(outcome, pts, worst=False))


def agent_expected_cost(outcome: EcOutcome, location: float) -> float:
    return float(agent_expected_costs(outcome, [location])[0])


def expected_max_cost(outcome: EcOutcome, locations: Sequence[float]) -> float:
    pts = np.asarray(locations, dtype=np.float64)
    return float(_point_costs(outcome, pts, worst=True))


def expected_social_cost(outcome: EcOutcome, locations: Sequence[float]) -> float:
    return float(agent_expected_costs(outcome, locations).sum())


def expected_costs(instance: Instance, truth: Sequence[float]) -> np.ndarray:
    """Expected cost of each agent at its true location when ``instance`` is reported."""
    return agent_expected_costs(run(instance), truth)


# ---------------------------------------------------------------------------


def radius_variant(instance: Instance, r: Optional[float] = None) -> Optional[Tuple[float, ...]]:
    """Facility at each interval midpoint when l <= 2r, otherwise no facility (None)."""
    if r is None:
        if not isinstance(instance.cost, Radius):
            raise ValueError("radius variant needs a radius cost or an explicit r")
        r = instance.cost.r
    cov = min_cover(instance.locations, instance.k)
    if instance.bound is not None:
        cov = fit_bounded(cov, instance.bound, instance.locations)
    if cov.length > 2 * r:
        return None
    return tuple(a + 0.5 * cov.length for a in cov.starts)


def radius_costs(instance: Instance, truth: Sequence[float], r: Optional[float] = None) -> np.ndarray:
    facilities = radius_variant(instance, r)
    truth = np.asarray(truth, dtype=np.float64)
    if facilities is None:
        return np.ones_like(truth)
    r = instance.cost.r if r is None else r
    d = np.abs(truth[:, None] - np.asarray(facilities)[None, :]).min(axis=1)
    return (d >= r).astype(np.float64)
