"""Connection-cost functions c(d) with c(0) = 0.

All cost objects are frozen dataclasses, so they hash and can key caches.
Calling one evaluates it on a scalar or an array of nonnegative distances.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Tuple, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]


def _as_distance(d):
    arr = np.asarray(d, dtype=np.float64)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("distance must be nonnegative")
    return arr


def _out(arr):
    return float(arr) if arr.ndim == 0 else arr


class CostFunction:
    """Base class.  Subclasses implement ``_eval`` and ``_integral``."""

    kind = ""
    concave = True

    def __call__(self, d: ArrayLike) -> ArrayLike:
        return _out(self._eval(_as_distance(d)))

    def integral(self, d: ArrayLike) -> ArrayLike:
        """Antiderivative F(d) = int_0^d c(z) dz."""
        return _out(self._integral(_as_distance(d)))

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Linear(CostFunction):
    slope: float = 1.0

    kind = "linear"

    def _eval(self, d):
        return self.slope * d

    def _integral(self, d):
        return 0.5 * self.slope * d * d

    def as_piecewise(self, width: float = 1.0) -> "PiecewiseLinear":
        return PiecewiseLinear((float(self.slope),), width)

    def to_dict(self):
        return {"kind": self.kind, "slope": self.slope}


@dataclass(frozen=True)
class PiecewiseLinear(CostFunction):
    """Concave piecewise-linear cost; piece i covers [i*width, (i+1)*width).

    The last slope continues to infinity.
    """

    slopes: Tuple[float, ...]
    width: float = 1.0

    kind = "piecewise_linear"

    def __post_init__(self):
        object.__setattr__(self, "slopes", tuple(float(b) for b in self.slopes))
        object.__setattr__(self, "width", float(self.width))

    @cached_property
    def _knots(self):
        b = np.asarray(self.slopes)
        w = self.width
        values = np.concatenate(([0.0], np.cumsum(b[:-1] * w)))
        areas = np.concatenate(([0.0], np.cumsum(values[:-1] * w + 0.5 * b[:-1] * w * w)))
        return b, values, areas

    def _piece(self, d):
        p = np.floor(d / self.width)
        return np.minimum(p, len(self.slopes) - 1).astype(np.int64)

    def _eval(self, d):
        b, values, _ = self._knots
        p = self._piece(d)
        return values[p] + b[p] * (d - p * self.width)

    def _integral(self, d):
        b, values, areas = self._knots
        p = self._piece(d)
        r = d - p * self.width
        return areas[p] + values[p] * r + 0.5 * b[p] * r * r

    def to_dict(self):
        return {"kind": self.kind, "slopes": list(self.slopes), "width": self.width}


@dataclass(frozen=True)
class Exponential(CostFunction):
    lam: float = 1.0

    kind = "exponential"

    def _eval(self, d):
        return -np.expm1(-self.lam * d)

    def _integral(self, d):
        return d + np.expm1(-self.lam * d) / self.lam

    def to_dict(self):
        return {"kind": self.kind, "lambda": self.lam}


@dataclass(frozen=True)
class Radius(CostFunction):
    """Step cost: 0 within distance r, 1 from r on.  Not concave."""

    r: float = 1.0

    kind = "radius"
    concave = False

    def _eval(self, d):
        return (d >= self.r).astype(np.float64)

    def _integral(self, d):
        return np.maximum(d - self.r, 0.0)

    def to_dict(self):
        return {"kind": self.kind, "r": self.r}


def validate(c: CostFunction) -> Optional[str]:
    """Return None if ``c`` is a well-formed cost function, else a description."""
    if isinstance(c, Linear):
        if not (np.isfinite(c.slope) and c.slope > 0):
            return "slope not positive"
        return None
    if isinstance(c, PiecewiseLinear):
        if len(c.slopes) == 0:
            return "no slopes given"
        if not (np.isfinite(c.width) and c.width > 0):
            return "piece width not positive"
        for i, b in enumerate(c.slopes):
            if not np.isfinite(b) or b <= 0:
                return f"slope not positive at index {i}"
            if i > 0 and b > c.slopes[i - 1]:
                return f"slopes not nonincreasing at index {i}"
        return None
    if isinstance(c, Exponential):
        if not (np.isfinite(c.lam) and c.lam > 0):
            return "lambda not positive"
        return None
    if isinstance(c, Radius):
        if not (np.isfinite(c.r) and c.r > 0):
            return "radius not positive"
        return None
    return f"unknown cost type {type(c).__name__}"


def require_concave(c: CostFunction) -> None:
    problem = validate(c)
    if problem is not None:
        raise ValueError(f"invalid cost function: {problem}")
    if not c.concave:
        raise ValueError(f"{c.kind} cost is not concave; use the radius variant")


def to_unit_pieces(c: PiecewiseLinear) -> Tuple[Tuple[float, ...], float]:
    """Rescale distances so pieces have unit width.

    Returns ``(unit_slopes, scale)`` with ``c(d) == unit(d / scale)`` where
    ``unit`` has the returned slopes on width-1 pieces.
    """
    if isinstance(c, Linear):
        return (float(c.slope),), 1.0
    w = c.width
    return tuple(b * w for b in c.slopes), w


def piecewise_from_function(f: Callable[[float], float], width: float, pieces: int) -> PiecewiseLinear:
    """Interpolate a concave increasing ``f`` (with f(0) = 0) on a uniform grid."""
    grid = np.arange(pieces + 1) * width
    values = np.array([f(x) for x in grid], dtype=np.float64)
    slopes = np.diff(values) / width
    # concave input gives nonincreasing slopes up to rounding
    slopes = np.minimum.accumulate(slopes)
    return PiecewiseLinear(tuple(slopes), width)


def from_dict(descriptor: dict) -> CostFunction:
    kind = descriptor.get("kind")
    if kind == "linear":
        return Linear(float(descriptor["slope"]))
    if kind == "piecewise_linear":
        return PiecewiseLinear(tuple(float(b) for b in descriptor["slopes"]), float(descriptor.get("width", 1.0)))
    if kind == "exponential":
        return Exponential(float(descriptor["lambda"]))
    if kind == "radius":
        return Radius(float(descriptor["r"]))
    raise ValueError(f"unknown cost kind {kind!r}")
