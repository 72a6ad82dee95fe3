from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from .cost import CostFunction, validate


@dataclass(frozen=True)
class Instance:
    """Reported agent locations, facility count, shared cost, optional domain [0, bound]."""

    locations: Tuple[float, ...]
    k: int
    cost: CostFunction
    bound: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "locations", tuple(float(x) for x in self.locations))
        if len(self.locations) == 0:
            raise ValueError("locations must be nonempty")
        if not all(np.isfinite(self.locations)):
            raise ValueError("locations must be finite")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("k must be a positive integer")
        object.__setattr__(self, "k", int(self.k))
        problem = validate(self.cost)
        if problem is not None:
            raise ValueError(f"invalid cost function: {problem}")
        if self.bound is not None:
            L = float(self.bound)
            if not (np.isfinite(L) and L > 0):
                raise ValueError("domain length must be positive")
            object.__setattr__(self, "bound", L)
            if min(self.locations) < 0 or max(self.locations) > L:
                raise ValueError("location outside [0,L]")

    @property
    def n(self) -> int:
        return len(self.locations)

    @property
    def x(self) -> np.ndarray:
        return np.asarray(self.locations)

    def with_reports(self, reports: Sequence[float]) -> "Instance":
        return replace(self, locations=tuple(reports))
