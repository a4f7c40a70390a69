"""Parameter types, validity table, error taxonomy and the tagged result type."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

# alpha within this distance of 2 is routed to the exact alpha=2 branch
ALPHA2_SNAP = 1e-8


class FracGreenError(Exception):
    """Base class for all evaluation errors."""


class OutOfDomain(FracGreenError, ValueError):
    """A parameter lies outside the validity region of the requested method."""

    def __init__(self, parameter: str, allowed: str, value=None):
        self.parameter = parameter
        self.allowed = allowed
        self.value = value
        got = "" if value is None else f" (got {value!r})"
        super().__init__(f"OutOfDomain: {parameter} must satisfy {allowed}{got}")


class Divergent(FracGreenError, ValueError):
    """The requested quantity is infinite, e.g. G(0) for alpha <= 1."""


class ToleranceUnreachable(FracGreenError, RuntimeError):
    """An iteration cap was hit before the target tolerance was certified."""


class NumericalInstability(FracGreenError, RuntimeError):
    """A quadrature failed to converge."""


class Method(str, enum.Enum):
    SERIES = "Series"
    PERIODIZED = "Periodized"
    ML_INTEGRAL = "MlIntegral"
    CLOSED_FORM2 = "ClosedForm2"
    MC_JTP = "McJtp"
    MC_POISSON = "McPoisson"

    @classmethod
    def parse(cls, name: str) -> "Method":
        key = name.strip().lower().replace("-", "").replace("_", "")
        aliases = {
            "series": cls.SERIES,
            "periodized": cls.PERIODIZED,
            "ml": cls.ML_INTEGRAL,
            "mlintegral": cls.ML_INTEGRAL,
            "closed": cls.CLOSED_FORM2,
            "closedform2": cls.CLOSED_FORM2,
            "jtp": cls.MC_JTP,
            "mcjtp": cls.MC_JTP,
            "poisson": cls.MC_POISSON,
            "mcpoisson": cls.MC_POISSON,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown method {name!r}; choose from {sorted(aliases)}") from None


# (lo, hi, lo_inclusive) for alpha, per method; hi is always inclusive
_ALPHA_RANGE = {
    Method.SERIES: (0.0, 4.0),
    Method.PERIODIZED: (0.0, 2.0),
    Method.ML_INTEGRAL: (0.0, 2.0),
    Method.MC_JTP: (0.0, 2.0),
    Method.MC_POISSON: (0.0, 1.0),
}


@dataclass(frozen=True)
class KernelParams:
    """Stability index ``alpha`` and killing rate ``c`` of ``c + (-Laplacian)^(alpha/2)``.

    ``alpha`` values within ``ALPHA2_SNAP`` of 2 are stored as exactly 2.0 so
    that the closed-form branch is taken.
    """

    alpha: float
    c: float

    def __post_init__(self):
        alpha = float(self.alpha)
        c = float(self.c)
        if not math.isfinite(c) or c <= 0:
            raise OutOfDomain("c", "c > 0", self.c)
        if not math.isfinite(alpha) or alpha <= 0 or alpha > 4 + ALPHA2_SNAP:
            raise OutOfDomain("alpha", "0 < alpha <= 4", self.alpha)
        if abs(alpha - 2.0) <= ALPHA2_SNAP:
            alpha = 2.0
        elif abs(alpha - 4.0) <= ALPHA2_SNAP:
            alpha = 4.0
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "c", c)

    @property
    def beta(self) -> float:
        """Index of the subordinator in the heat-kernel representation."""
        return self.alpha / 2.0

    @property
    def gamma(self) -> float:
        # only descriptive: the sine-weighted representation for alpha in (2, 4] is not implemented
        return self.alpha / 4.0

    @property
    def is_alpha2(self) -> bool:
        return self.alpha == 2.0


def validate(params: KernelParams, method: Method) -> None:
    """Raise :class:`OutOfDomain` unless ``params`` is valid for ``method``."""
    method = Method(method)
    a = params.alpha
    if method is Method.CLOSED_FORM2:
        if a != 2.0:
            raise OutOfDomain("alpha", "alpha == 2 for ClosedForm2", a)
        return
    lo, hi = _ALPHA_RANGE[method]
    if not (lo < a <= hi):
        raise OutOfDomain("alpha", f"{lo:g} < alpha <= {hi:g} for {method.value}", a)


@dataclass(frozen=True)
class GreenValue:
    """A value with an absolute error bound and the route that produced it.

    ``rigorous`` is True only when ``error_bound`` is a proven bound (series
    tail bounds, closed forms); quadrature bounds are estimates.
    """

    value: float
    error_bound: float
    method: Method
    rigorous: bool = False

    def __post_init__(self):
        if not self.error_bound >= 0:
            raise ValueError("error_bound must be >= 0")

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class Grid:
    """Strictly increasing abscissae in ``(0, pi]``; ``spacing`` is None when irregular."""

    points: tuple
    spacing: Optional[float] = None

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points)
        if not pts:
            raise ValueError("grid is empty")
        arr = np.asarray(pts)
        if np.any(arr <= 0) or np.any(arr > math.pi):
            raise ValueError("grid points must lie in (0, pi]")
        if np.any(np.diff(arr) <= 0):
            raise ValueError("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @classmethod
    def interior(cls, n: int) -> "Grid":
        """``n`` equispaced points strictly inside ``(0, pi)``."""
        h = math.pi / (n + 1)
        return cls(tuple(h * k for k in range(1, n + 1)), h)

    @classmethod
    def from_points(cls, points: Sequence[float]) -> "Grid":
        pts = tuple(float(p) for p in points)
        d = np.diff(pts)
        spacing = float(d[0]) if len(d) and np.allclose(d, d[0], rtol=1e-12, atol=0) else None
        return cls(pts, spacing)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)
