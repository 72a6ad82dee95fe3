"""Pick the Loser, for n = k + 1 agents.

Agents are numbered 1..n by reported location.  Odd-numbered agents always
get a facility.  Each even agent i draws s_i ~ U(0, 1); the one with the
smallest kappa_i / s_i loses, where kappa_i is its cost to the nearest other
report, and every other agent gets a facility at its report.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .cost import require_concave
from .instance import Instance


@dataclass(frozen=True, eq=False)
class LoserReport:
    """Per-agent arrays are in input (agent) order.

    ``kappa`` is filled for every agent but only even agents compete.  When
    two reports coincide ``served_all`` is set and ``q`` is all zero.
    """

    order: np.ndarray
    even: np.ndarray
    kappa: np.ndarray
    q: np.ndarray
    served_all: bool = False

    @property
    def even_agents(self) -> np.ndarray:
        """Agent indices of the even-numbered agents, left to right."""
        return self.order[1::2]


def _check(instance: Instance) -> None:
    if instance.n != instance.k + 1:
        raise ValueError(f"pick the loser needs n = k + 1 agents (got n={instance.n}, k={instance.k})")
    require_concave(instance.cost)


def loser_probabilities(instance: Instance) -> LoserReport:
    _check(instance)
    x = instance.x
    n = x.size
    order = np.argsort(x, kind="stable")
    xs = x[order]
    even = np.zeros(n, dtype=bool)
    even[order[1::2]] = True
    gaps = np.diff(xs)
    near = np.minimum(np.concatenate(([np.inf], gaps)), np.concatenate((gaps, [np.inf])))
    kappa = np.empty(n)
    kappa[order] = instance.cost(near)
    q = np.zeros(n)
    if np.any(gaps == 0):
        return LoserReport(order, even, kappa, q, served_all=True)
    contenders = order[1::2]
    q[contenders] = kernels.loser_probs(np.ascontiguousarray(kappa[contenders]))
    return LoserReport(order, even, kappa, q)


def sample_loser(instance: Instance, rng) -> Tuple[Optional[int], Tuple[float, ...]]:
    """Draw the loser; returns (agent index or None, facility locations).

    ``rng`` is a Generator or a seed.
    """
    rng = np.random.default_rng(rng)
    report = loser_probabilities(instance)
    x = instance.x
    if report.served_all:
        return None, tuple(np.unique(x).tolist())
    contenders = report.even_agents
    s = 1.0 - rng.random(contenders.size)  # in (0, 1]
    # argmin returns the first minimum: ties go to the leftmost agent
    loser = int(contenders[np.argmin(report.kappa[contenders] / s)])
    served = np.delete(np.arange(x.size), loser)
    return loser, tuple(np.sort(x[served]).tolist())


def sample_losers(instance: Instance, rng: np.random.Generator, draws: int) -> np.ndarray:
    """Vectorized repeated draws of the loser index (no served-all case)."""
    report = loser_probabilities(instance)
    if report.served_all:
        raise ValueError("coincident reports: no loser is drawn")
    contenders = report.even_agents
    s = 1.0 - rng.random((draws, contenders.size))
    return contenders[np.argmin(report.kappa[contenders][None, :] / s, axis=1)]


def expected_social_cost(instance: Instance) -> float:
    """Only the loser pays, and it pays its kappa."""
    report = loser_probabilities(instance)
    return float(report.q @ report.kappa) if not report.served_all else 0.0


def expected_max_cost(instance: Instance) -> float:
    return expected_social_cost(instance)


def expected_costs(instance: Instance, truth: Sequence[float]) -> np.ndarray:
    """Exact expected cost of agents truly at ``truth`` under the reports in ``instance``.

    Enumerates the possible losers; an agent's cost is c of its distance to
    the nearest served report, so facilities other than its own count too.
    """
    report = loser_probabilities(instance)
    x = instance.x
    truth = np.asarray(truth, dtype=np.float64)
    d = np.abs(truth[:, None] - x[None, :])
    c = instance.cost
    if report.served_all:
        return c(d.min(axis=1))
    out = np.zeros(truth.size)
    for loser in report.even_agents:
        ql = report.q[loser]
        if ql == 0.0:
            continue
        masked = d.copy()
        masked[:, loser] = np.inf
        out += ql * c(masked.min(axis=1))
    return out


def agent_expected_cost_under_report(instance: Instance, agent: int, reported: float) -> float:
    """Cost of ``agent`` (true location taken from ``instance``) when it reports ``reported``."""
    reports = list(instance.locations)
    truth = reports[agent]
    reports[agent] = reported
    return float(expected_costs(instance.with_reports(reports), [truth])[0])
