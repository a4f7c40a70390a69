"""Double-exponential quadrature on finite and semi-infinite intervals.

Both rules are trapezoidal sums in a transformed variable ``tau``; halving the
step ``h = 2**-level`` roughly doubles the number of correct digits, so the
difference between consecutive levels is used as the error estimate.
Integrands must be vectorized over numpy arrays.
"""

from __future__ import annotations

import math
from typing import Callable, Tuple

import numpy as np

from .core import NumericalInstability

_HALF_PI = 0.5 * math.pi
# at |tau| = 6.5 node distances to a finite endpoint fall below 1e-300
_TAU_MAX = 6.5
# exp-sinh upper cut: nodes reach scale * e^70
_TAU_UPPER_INF = 4.5


def _tau(level: int, upper: float = _TAU_MAX) -> np.ndarray:
    h = 2.0 ** -level
    # even counts keep tau = 0 on the coarser sub-rule
    n = 2 * int(math.ceil(_TAU_MAX / (2 * h)))
    m = 2 * int(math.ceil(upper / (2 * h)))
    return np.arange(-n, m + 1) * h


def tanh_sinh_rule(a, b, level: int):
    """Nodes and weights of the tanh-sinh rule on ``[a, b]``.

    ``a`` and ``b`` may be arrays of equal shape; the node axis is prepended.
    Nodes are computed as distances from the nearer endpoint so that
    integrable endpoint singularities at ``a`` are resolved.
    """
    tau = _tau(level)
    h = 2.0 ** -level
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    width = b - a
    u = _HALF_PI * np.sinh(np.abs(tau))
    with np.errstate(over="ignore"):
        # distance to the nearer endpoint, as a fraction of the width
        frac = 1.0 / (1.0 + np.exp(2.0 * u))
        w = h * _HALF_PI * np.cosh(tau) / np.cosh(u) ** 2 * 0.5
    shape = (-1,) + (1,) * width.ndim
    frac = frac.reshape(shape)
    left = (tau < 0).reshape(shape)
    x = np.where(left, a + width * frac, b - width * frac)
    return x, w.reshape(shape) * width


def exp_sinh_rule(a, scale, level: int):
    """Nodes and weights of the exp-sinh rule on ``[a, inf)`` with length scale ``scale``."""
    tau = _tau(level, _TAU_UPPER_INF)
    h = 2.0 ** -level
    a = np.asarray(a, dtype=float)
    scale = np.asarray(scale, dtype=float)
    e = np.exp(_HALF_PI * np.sinh(tau))
    w = h * _HALF_PI * np.cosh(tau) * e
    shape = (-1,) + (1,) * np.broadcast(a, scale).ndim
    x = a + scale * e.reshape(shape)
    return x, w.reshape(shape) * scale


def _apply(f, x, w):
    with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
        y = f(x)
    y = np.where(w > 0, y, 0.0)
    bad = ~np.isfinite(y)
    if np.any(bad):
        # only tolerated at nodes whose weight underflowed
        if np.any(bad & (w > 1e-300)):
            raise NumericalInstability("integrand returned non-finite values at interior nodes")
        y = np.where(bad, 0.0, y)
    return y * w


def _sum_levels(terms: np.ndarray):
    """Integral at the finest level and at the next coarser one (every other node)."""
    fine = terms.sum(axis=0)
    # the coarser rule is every other node, starting from the (even) first index
    coarse = 2.0 * terms[::2].sum(axis=0)
    return fine, coarse


def _adaptive(rule, f, abs_tol, rel_tol, min_level, max_level):
    for level in range(min_level, max_level + 1):
        x, w = rule(level)
        terms = _apply(f, x, w)
        fine, coarse = _sum_levels(terms)
        err = abs(fine - coarse)
        if err <= max(abs_tol, rel_tol * abs(fine)):
            return float(fine), float(err)
    raise NumericalInstability(
        f"double-exponential quadrature did not reach tolerance {abs_tol:g} "
        f"(estimate {err:.3g} at level {max_level})"
    )


def tanh_sinh(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    abs_tol: float = 1e-12,
    rel_tol: float = 1e-13,
    min_level: int = 3,
    max_level: int = 10,
) -> Tuple[float, float]:
    """Integrate ``f`` over ``[a, b]``. Returns ``(value, error_estimate)``."""
    if a == b:
        return 0.0, 0.0
    return _adaptive(lambda lv: tanh_sinh_rule(a, b, lv), f, abs_tol, rel_tol, min_level, max_level)


def exp_sinh(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    scale: float = 1.0,
    abs_tol: float = 1e-12,
    rel_tol: float = 1e-13,
    min_level: int = 3,
    max_level: int = 10,
) -> Tuple[float, float]:
    """Integrate ``f`` over ``[a, inf)``; ``scale`` should match the decay length."""
    return _adaptive(lambda lv: exp_sinh_rule(a, scale, lv), f, abs_tol, rel_tol, min_level, max_level)


def batch(rule_nodes, f, level: int):
    """Fixed-level rule applied to a batch of integrals.

    ``rule_nodes`` is ``(x, w)`` from one of the rule functions with array
    endpoints; returns ``(values, error_estimates)`` along the batch axes.
    """
    x, w = rule_nodes
    terms = _apply(f, x, np.broadcast_to(w, x.shape))
    fine, coarse = _sum_levels(terms)
    return fine, np.abs(fine - coarse)
