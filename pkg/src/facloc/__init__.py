"""Randomized strategyproof mechanisms for k-facility location on the line."""

from .cost import Exponential, Linear, PiecewiseLinear, Radius
from .instance import Instance
from .covering import Covering, min_cover, fit_bounded
from .distribution import distribution, expected_cost_at, equal_cost_value
from . import equal_cost, pick_the_loser, verify

__all__ = [
    "Exponential", "Linear", "PiecewiseLinear", "Radius", "Instance", "Covering",
    "min_cover", "fit_bounded", "distribution", "expected_cost_at", "equal_cost_value",
    "equal_cost", "pick_the_loser", "verify",
]
__version__ = "0.1.0"
