"""Green function ``H`` of ``c + (-Laplacian)^(alpha/2)`` on the real line.

For ``0 < alpha < 2`` and ``x > 0``::

    H(x) = (sin(phi)/pi) * int_0^inf e^{-t x} t^alpha / D(t) dt,
    D(t) = c^2 + 2 c cos(phi) t^alpha + t^(2 alpha),    phi = pi alpha / 2,

a Laplace transform of a positive function, hence completely monotone.  As
``alpha -> 2`` the denominator develops a narrow spike at ``t^alpha = c`` while
the prefactor vanishes, so every integral here is split at the minimizer of
``D`` and done with double-exponential rules on both sides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import quadrature
from .core import GreenValue, KernelParams, Method, NumericalInstability, OutOfDomain

P_MAX = 8


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    # finest double-exponential level (step 2**-level) before giving up
    max_subdivisions: int = 10
    split_point_policy: Union[str, float] = "AtPeak"

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be > 0")
        if self.max_subdivisions < 8:
            raise ValueError("max_subdivisions must be >= 8")
        if self.split_point_policy != "AtPeak" and not float(self.split_point_policy) > 0:
            raise ValueError("split_point_policy must be 'AtPeak' or a positive number")


DEFAULT_QUAD = QuadratureConfig()


@dataclass(frozen=True)
class XAlphaLaw:
    """Law on ``(0, inf)`` with density ``(2 sin(phi)/pi) t^(a-1) / (1 + 2 cos(phi) t^a + t^(2a))``.

    At ``alpha = 2`` it degenerates to the point mass at 1.
    """

    alpha: float

    def __post_init__(self):
        if not (0 < self.alpha <= 2):
            raise OutOfDomain("alpha", "0 < alpha <= 2", self.alpha)


def _require_line_params(params: KernelParams):
    if not (0 < params.alpha < 2):
        raise OutOfDomain("alpha", "0 < alpha < 2 for the Laplace representation", params.alpha)


def split_point(params: KernelParams, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Where the Laplace integrals are split: the minimizer of ``D`` (or ``c^(1/alpha)``)."""
    if cfg.split_point_policy != "AtPeak":
        return float(cfg.split_point_policy)
    a, c = params.alpha, params.c
    cphi = math.cos(0.5 * math.pi * a)
    if cphi < 0:
        return (-c * cphi) ** (1.0 / a)
    return c ** (1.0 / a)


def kernel(params: KernelParams, t):
    """``(sin(phi)/pi) t^alpha / D(t)``: the density of the Laplace measure of ``H``."""
    a, c = params.alpha, params.c
    phi = 0.5 * math.pi * a
    ta = t ** a
    # D written as a sum of squares to avoid cancellation when cos(phi) -> -1
    den = (ta + c * math.cos(phi)) ** 2 + (c * math.sin(phi)) ** 2
    return (math.sin(phi) / math.pi) * ta / den


def laplace_integral(
    params: KernelParams,
    weight: Callable[[np.ndarray], np.ndarray],
    scale: float,
    cfg: QuadratureConfig = DEFAULT_QUAD,
):
    """``int_0^inf weight(t) * kernel(t) dt``; returns ``(value, error_estimate)``.

    ``scale`` is the decay length of ``weight`` beyond the split point.
    """
    _require_line_params(params)
    tstar = split_point(params, cfg)

    def f(t):
        return weight(t) * kernel(params, t)

    kw = dict(abs_tol=0.5 * cfg.abs_tol, rel_tol=cfg.rel_tol, max_level=cfg.max_subdivisions)
    left, el = quadrature.tanh_sinh(f, 0.0, tstar, **kw)
    right, er = quadrature.exp_sinh(f, tstar, scale=scale, **kw)
    return left + right, el + er


def h_closed_alpha2(c: float, x: float) -> GreenValue:
    """``e^{-sqrt(c) x} / (2 sqrt(c))``, the line Green function at ``alpha = 2``."""
    if not c > 0:
        raise OutOfDomain("c", "c > 0", c)
    if not x >= 0:
        raise OutOfDomain("x", "x >= 0", x)
    r = math.sqrt(c)
    v = math.exp(-r * x) / (2.0 * r)
    return GreenValue(v, 4.0 * np.finfo(float).eps * v, Method.CLOSED_FORM2, rigorous=True)


def h_eval(params: KernelParams, x: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> GreenValue:
    """Line Green function ``H(x)`` for ``x > 0``.

    Values from the Laplace integral carry the ``Periodized`` tag, since they
    are the summands of that route; ``alpha = 2`` goes to the closed form.
    """
    if not x > 0:
        raise OutOfDomain("x", "x > 0", x)
    if params.is_alpha2:
        return h_closed_alpha2(params.c, x)
    _require_line_params(params)
    v, e = laplace_integral(params, lambda t: np.exp(-t * x), 1.0 / x, cfg)
    if not v > 0:
        raise NumericalInstability(f"H({x}) evaluated to non-positive {v}")
    return GreenValue(v, e, Method.PERIODIZED, rigorous=False)


def h_deriv(params: KernelParams, x: float, p: int, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """``p``-th derivative of ``H`` at ``x > 0`` (sign ``(-1)^p``)."""
    p = int(p)
    if not 0 <= p <= P_MAX:
        raise OutOfDomain("p", f"0 <= p <= {P_MAX}", p)
    if not x > 0:
        raise OutOfDomain("x", "x > 0", x)
    if params.is_alpha2:
        r = math.sqrt(params.c)
        return (-r) ** p * math.exp(-r * x) / (2.0 * r)
    v, _ = laplace_integral(params, lambda t: t ** p * np.exp(-t * x), max(p, 1) / x, cfg)
    return (-1) ** p * v


def h_cdf(params: KernelParams, y, level: int = 7, tol: float = 1e-10):
    """CDF of the symmetric density ``c H(|y|)`` on the real line (vectorized).

    Uses ``int_0^y H = int_0^inf (1 - e^{-t y}) / t * kernel(t) dt``.
    """
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    if params.is_alpha2:
        r = math.sqrt(params.c)
        half = 0.5 * -np.expm1(-r * np.abs(y_arr))
    else:
        _require_line_params(params)
        ay = np.abs(y_arr)
        pos = ay > 0
        yy = ay[pos]
        tstar = split_point(params)

        def f(t):
            return -np.expm1(-t * yy) / t * kernel(params, t)

        left, el = quadrature.batch(
            quadrature.tanh_sinh_rule(np.zeros_like(yy), np.full_like(yy, tstar), level), f, level
        )
        right, er = quadrature.batch(
            quadrature.exp_sinh_rule(np.full_like(yy, tstar), np.maximum(tstar, 1.0 / np.maximum(yy, 1e-300)), level),
            f,
            level,
        )
        if np.any(el + er > tol):
            raise NumericalInstability("H antiderivative quadrature did not converge")
        half = np.zeros_like(ay)
        half[pos] = params.c * (left + right)
    out = 0.5 + np.sign(y_arr) * half
    return float(out[0]) if np.ndim(y) == 0 else out


def x_alpha_density(law: XAlphaLaw, t):
    a = law.alpha
    if a >= 2:
        raise OutOfDomain("alpha", "alpha < 2 (X_2 is a point mass)", a)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise OutOfDomain("t", "t > 0", t)
    phi = 0.5 * math.pi * a
    ta = t ** a
    out = (2.0 * math.sin(phi) / math.pi) * t ** (a - 1.0) / (1.0 + 2.0 * math.cos(phi) * ta + ta * ta)
    return float(out) if out.ndim == 0 else out


def x_alpha_cdf(law: XAlphaLaw, t):
    """Closed-form CDF, obtained from the density after substituting ``u = t^alpha``."""
    a = law.alpha
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise OutOfDomain("t", "t > 0", t)
    if a == 2:
        out = (t >= 1.0).astype(float)
    else:
        phi = 0.5 * math.pi * a
        out = (2.0 / (math.pi * a)) * (np.arctan((t ** a + math.cos(phi)) / math.sin(phi)) - (0.5 * math.pi - phi))
    return float(out) if out.ndim == 0 else out
