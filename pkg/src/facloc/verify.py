"""Ground-truth optima and the property harness.

Oracles here are deliberately independent of the mechanism code paths they
check: brute force over set partitions rather than contiguous blocks, grids
rather than candidate restriction, enumeration of misreports rather than
case analysis.
"""

from dataclasses import dataclass, field
import hashlib
import itertools
import json
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import equal_cost, pick_the_loser
from .cost import CostFunction, Exponential, Linear, PiecewiseLinear
from .covering import min_cover
from .distribution import distribution, expected_cost_at
from .instance import Instance

DEFAULT_TOL = 1e-9


# ---------------------------------------------------------------------------
# optima


def opt_max_cost(instance: Instance) -> float:
    """Midpoints of a minimum covering are optimal: MC* = c(l / 2)."""
    return float(instance.cost(0.5 * min_cover(instance.locations, instance.k).length))


def opt_social_cost(instance: Instance) -> float:
    """Exact optimum by DP over contiguous blocks of sorted agents.

    With c concave, a block's total cost is concave between consecutive
    agents, so its best single facility sits at one of the block's agents.
    """
    xs = np.sort(instance.x)
    n, k = xs.size, instance.k
    if n <= k:
        return 0.0
    D = instance.cost(np.abs(xs[:, None] - xs[None, :]))  # D[t, y]
    prefix = np.vstack((np.zeros(n), np.cumsum(D, axis=0)))
    block = np.full((n, n), np.inf)
    for i in range(n):
        for j in range(i, n):
            block[i, j] = (prefix[j + 1, i:j + 1] - prefix[i, i:j + 1]).min()
    best = np.full(n + 1, np.inf)  # best[j]: first j agents, f facilities
    best[0] = 0.0
    for _ in range(k):
        nxt = best.copy()
        for j in range(1, n + 1):
            nxt[j] = min(best[j], min(best[i] + block[i, j - 1] for i in range(j)))
        best = nxt
    return float(best[n])


def set_partitions(items: Sequence[int], max_blocks: int):
    """All partitions of ``items`` into at most ``max_blocks`` blocks."""
    items = list(items)
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for part in set_partitions(rest, max_blocks):
        for b in range(len(part)):
            yield part[:b] + [[head] + part[b]] + part[b + 1:]
        if len(part) < max_blocks:
            yield [[head]] + part


def brute_force_social_cost(instance: Instance, grid_points: int = 10_000) -> float:
    """Min over all set partitions, each block served by its best grid point.

    The grid is uniform over the agents' range, plus the agent locations
    themselves (a uniform grid alone cannot hit optimal points exactly).
    """
    x = instance.x
    if np.unique(x).size <= instance.k:
        return 0.0
    grid = np.union1d(np.linspace(x.min(), x.max(), grid_points), x)
    C = instance.cost(np.abs(x[:, None] - grid[None, :]))
    cache: Dict[Tuple[int, ...], float] = {}
    best = np.inf
    for part in set_partitions(range(x.size), instance.k):
        total = 0.0
        for blk in part:
            key = tuple(sorted(blk))
            if key not in cache:
                cache[key] = float(C[list(key)].sum(axis=0).min())
            total += cache[key]
        best = min(best, total)
    return best


def brute_force_cover_length(locations: Sequence[float], k: int) -> float:
    """Smallest pairwise-distance candidate feasible for some set partition."""
    x = np.asarray(locations, dtype=np.float64)
    spans = []
    for part in set_partitions(range(x.size), k):
        spans.append(max(x[b].max() - x[b].min() for b in part))
    best = min(spans)
    cands = np.unique(np.abs(x[:, None] - x[None, :]))
    feasible = cands[cands >= best]
    return float(feasible[0])


def brute_force_max_cost(instance: Instance) -> float:
    """Every block served at its midpoint; minimized over set partitions."""
    x = instance.x
    worst = []
    for part in set_partitions(range(x.size), instance.k):
        worst.append(max(0.5 * (x[b].max() - x[b].min()) for b in part))
    return float(instance.cost(min(worst)))


# ---------------------------------------------------------------------------
# equal-cost property


def check_equal_cost(c: CostFunction, length: float, points: int = 100,
                     rng: Optional[np.random.Generator] = None) -> float:
    """Max |E[c(|x - X|)] - C(l)| over sampled x in [0, l] (endpoints included)."""
    rng = np.random.default_rng(0) if rng is None else rng
    dist = distribution(c, length)
    xs = np.concatenate(([0.0, length], rng.uniform(0.0, length, max(points - 2, 0))))
    return float(np.abs(expected_cost_at(dist, c, xs) - dist.equal_cost).max())


# ---------------------------------------------------------------------------
# mechanisms as exact expected-cost evaluators

Evaluator = Callable[[Instance, np.ndarray], np.ndarray]


def mean_mechanism_costs(instance: Instance, truth: Sequence[float]) -> np.ndarray:
    """Every facility at the mean report.  Manipulable; a negative control."""
    y = float(np.mean(instance.x))
    return instance.cost(np.abs(np.asarray(truth, dtype=np.float64) - y))


MECHANISMS: Dict[str, Evaluator] = {
    "ec": equal_cost.expected_costs,
    "ptl": pick_the_loser.expected_costs,
    "mean": mean_mechanism_costs,
}


def _evaluator(mechanism) -> Evaluator:
    if callable(mechanism):
        return mechanism
    try:
        return MECHANISMS[mechanism]
    except KeyError:
        raise ValueError(f"unknown mechanism {mechanism!r}") from None


# ---------------------------------------------------------------------------
# deviation search


@dataclass
class DeviationFinding:
    agents: Tuple[int, ...] = ()
    misreport: Tuple[float, ...] = ()
    truthful_costs: Tuple[float, ...] = ()
    deviated_costs: Tuple[float, ...] = ()
    gain: float = -np.inf  # best individual gain among the deviators
    score: float = -np.inf  # quantity compared against tol
    tol: float = DEFAULT_TOL
    evaluated: int = 0

    @property
    def violation(self) -> bool:
        return self.score > self.tol

    def to_dict(self) -> dict:
        return {
            "agents": list(self.agents),
            "misreport": list(self.misreport),
            "truthful_costs": list(self.truthful_costs),
            "deviated_costs": list(self.deviated_costs),
            "gain": self.gain,
            "score": self.score,
            "violation": self.violation,
            "evaluated": self.evaluated,
        }


def misreport_grid(instance: Instance, agent: int, resolution: int) -> np.ndarray:
    x = instance.x
    ell = min_cover(x, instance.k).length
    span = x.max() - x.min()
    pad = 2 * ell if ell > 0 else max(span, 1.0)
    grid = np.linspace(x.min() - pad, x.max() + pad, resolution)
    others = np.sort(np.delete(x, agent))
    extra = np.concatenate((others, 0.5 * (others[1:] + others[:-1])))
    grid = np.union1d(grid, extra)
    if instance.bound is not None:
        grid = np.unique(np.clip(grid, 0.0, instance.bound))
    # the truthful report is the baseline, not a deviation
    return grid[grid != x[agent]]


def deviation_search(mechanism, instance: Instance, resolution: int = 200,
                     tol: float = DEFAULT_TOL) -> DeviationFinding:
    """Best unilateral gain over every agent and every grid misreport."""
    evaluate = _evaluator(mechanism)
    x = instance.x
    truthful = evaluate(instance, x)
    best = DeviationFinding(tol=tol)
    count = 0
    for i in range(x.size):
        truth_i = x[i:i + 1]
        reports = x.copy()
        for y in misreport_grid(instance, i, resolution):
            reports[i] = y
            cost = float(evaluate(instance.with_reports(reports), truth_i)[0])
            gain = truthful[i] - cost
            count += 1
            if gain > best.score:
                best = DeviationFinding((i,), (float(y),), (float(truthful[i]),), (cost,), gain, gain, tol)
    best.evaluated = count
    return best


def coalition_search(mechanism, instance: Instance, coalition_size: int = 2, resolution: int = 50,
                     tol: float = DEFAULT_TOL, criterion: Optional[str] = None) -> DeviationFinding:
    """Joint misreports by every pair of agents.

    criterion "weak": flag when every member strictly gains (score = min gain).
    criterion "strong": flag when some member strictly gains and none loses
    (score = max gain over deviations where no member loses more than tol).
    Default: strong for ptl, weak otherwise.
    """
    if coalition_size > 2:
        raise ValueError("coalitions larger than 2 are not supported")
    if coalition_size < 1:
        raise ValueError("coalition size must be positive")
    if criterion is None:
        criterion = "strong" if mechanism == "ptl" else "weak"
    if criterion not in ("weak", "strong"):
        raise ValueError("criterion must be 'weak' or 'strong'")
    evaluate = _evaluator(mechanism)
    x = instance.x
    truthful = evaluate(instance, x)
    best = DeviationFinding(tol=tol)
    count = 0
    for members in itertools.combinations(range(x.size), coalition_size):
        members = list(members)
        truth = x[members]
        grids = [misreport_grid(instance, i, resolution) for i in members]
        grids = [np.union1d(g, [x[i]]) for g, i in zip(grids, members)]
        reports = x.copy()
        for ys in itertools.product(*grids):
            if all(y == x[i] for y, i in zip(ys, members)):
                continue
            reports[members] = ys
            costs = evaluate(instance.with_reports(reports), truth)
            gains = truthful[members] - costs
            count += 1
            if criterion == "weak":
                score = float(gains.min())
            else:
                score = float(gains.max()) if gains.min() >= -tol else -np.inf
            if score > best.score:
                best = DeviationFinding(tuple(members), tuple(float(y) for y in ys),
                                        tuple(float(v) for v in truthful[members]),
                                        tuple(float(v) for v in costs), float(gains.max()), score, tol)
    best.evaluated = count
    return best


# ---------------------------------------------------------------------------
# ratios


def instance_digest(instance: Instance) -> str:
    blob = json.dumps({"k": instance.k, "locations": list(instance.locations),
                       "cost": instance.cost.to_dict(), "bound": instance.bound}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class RatioReport:
    value: float
    optimum: float
    objective: str
    bound: float
    digest: str
    tol: float = DEFAULT_TOL

    @property
    def ratio(self) -> float:
        if self.optimum == 0:
            return 1.0 if self.value <= self.tol else np.inf
        return self.value / self.optimum

    @property
    def ok(self) -> bool:
        return self.value <= self.bound * self.optimum + self.tol

    def to_dict(self) -> dict:
        return {"value": self.value, "optimum": self.optimum, "ratio": self.ratio,
                "objective": self.objective, "bound": self.bound, "ok": self.ok, "digest": self.digest}


def mechanism_value(mechanism: str, instance: Instance, objective: str) -> float:
    if mechanism == "ec":
        out = equal_cost.run(instance)
        if objective == "max":
            return equal_cost.expected_max_cost(out, instance.x)
        return equal_cost.expected_social_cost(out, instance.x)
    if mechanism == "ptl":
        if objective == "max":
            return pick_the_loser.expected_max_cost(instance)
        return pick_the_loser.expected_social_cost(instance)
    raise ValueError(f"unknown mechanism {mechanism!r}")


def ratio_bound(mechanism: str, objective: str, instance: Instance) -> float:
    table = {("ec", "max"): 2.0, ("ec", "social"): float(instance.n),
             ("ptl", "social"): 2.0, ("ptl", "max"): 4.0}
    return table[(mechanism, objective)]


def ratio_report(mechanism: str, instances: Iterable[Instance], objective: str,
                 tol: float = DEFAULT_TOL) -> List[RatioReport]:
    if objective not in ("max", "social"):
        raise ValueError("objective must be 'max' or 'social'")
    reports = []
    for inst in instances:
        opt = opt_max_cost(inst) if objective == "max" else opt_social_cost(inst)
        reports.append(RatioReport(mechanism_value(mechanism, inst, objective), opt, objective,
                                   ratio_bound(mechanism, objective, inst), instance_digest(inst), tol))
    return reports


# ---------------------------------------------------------------------------
# random instances (locations uniform on [0, 100])

COST_KINDS = ("linear", "two_piece", "piecewise", "exponential")


def random_cost(rng: np.random.Generator, kinds: Sequence[str] = COST_KINDS) -> CostFunction:
    kind = kinds[int(rng.integers(len(kinds)))]
    if kind == "linear":
        return Linear(float(rng.uniform(0.5, 2.0)))
    if kind == "two_piece":
        b1 = float(rng.uniform(1.0, 3.0))
        return PiecewiseLinear((b1, b1 / float(rng.uniform(1.2, 5.0))), float(rng.uniform(4.0, 25.0)))
    if kind == "piecewise":
        m = int(rng.integers(2, 9))
        slopes = np.sort(rng.uniform(0.1, 3.0, m))[::-1]
        return PiecewiseLinear(tuple(slopes), float(rng.uniform(4.0, 25.0)))
    if kind == "exponential":
        return Exponential(float(rng.uniform(0.01, 0.5)))
    raise ValueError(f"unknown cost kind {kind!r}")


def random_instance(rng: np.random.Generator, n_max: int = 10, k_max: int = 5, n_min: int = 2,
                    kinds: Sequence[str] = COST_KINDS, bound: Optional[float] = None) -> Instance:
    n = int(rng.integers(n_min, n_max + 1))
    k = int(rng.integers(1, min(k_max, n - 1) + 1))
    hi = 100.0 if bound is None else bound
    x = rng.uniform(0.0, hi, n)
    return Instance(tuple(x), k, random_cost(rng, kinds), bound)


def random_ptl_instance(rng: np.random.Generator, n_max: int = 6, n_min: int = 2,
                        kinds: Sequence[str] = COST_KINDS) -> Instance:
    n = int(rng.integers(n_min, n_max + 1))
    return Instance(tuple(rng.uniform(0.0, 100.0, n)), n - 1, random_cost(rng, kinds))


def trial_generators(seed: int, trials: int) -> List[np.random.Generator]:
    """Independent per-trial streams spawned from one root seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]
