"""Periodic Green function ``G(x) = (1/2pi) sum_n cos(n x) / (c + |n|^alpha)``.

Deterministic routes:

``g_series``
    Symmetric partial sum with a certified tail.  The tail
    ``sum_{n>N} a_n q^n`` (``q = e^{ix}``, ``a_n = 1/(c + n^alpha)``) is
    rewritten by ``K`` rounds of summation by parts against the Dirichlet
    kernel; the boundary terms are added exactly and what remains is bounded
    by ``(2 sin(x/2))^-K * D^K a_{N+1} / sin(x/2)``, where ``D`` is the
    backward difference ``a_n - a_{n+1}``.  This needs ``D^K a`` and
    ``D^(K+1) a`` to be nonnegative beyond ``N``, which holds everywhere for
    ``alpha <= 1`` and is checked for ``alpha > 1``.
``g_periodized``
    ``sum_{n>=0} H(x + 2 n pi) + H(2 (n+1) pi - x)``: the first terms directly,
    the remainder summed as a geometric series inside the Laplace integral
    of ``H``.
``g_ml``
    ``1/(2 pi c) + (1/2pi) int_0^inf (P(t, x) - 1) t^(alpha-1) E_{alpha,alpha}(-c t^alpha) dt``
    with the Poisson kernel ``P(t, x) = (1 - e^{-2t}) / (1 - 2 cos(x) e^{-t} + e^{-2t})``.
``g_closed_alpha2``
    ``cosh(sqrt(c)(pi - x)) / (2 sqrt(c) sinh(sqrt(c) pi))``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import comb

from . import quadrature
from .core import (
    Divergent,
    GreenValue,
    KernelParams,
    Method,
    NumericalInstability,
    OutOfDomain,
    ToleranceUnreachable,
    validate,
)
from .line_green import DEFAULT_QUAD, P_MAX, QuadratureConfig, h_closed_alpha2, h_eval, laplace_integral
from .mittag_leffler import DEFAULT_CONFIG as ML_DEFAULT
from .mittag_leffler import MlRegimeConfig, ml_eval_with_error

_EPS = np.finfo(float).eps
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SeriesConfig:
    target_abs_tol: float = 1e-10
    max_terms: int = 10 ** 6
    acceleration: str = "AbelPairing"  # or "None"
    # rounds of summation by parts when accelerating
    abel_passes: int = 3

    def __post_init__(self):
        if not self.target_abs_tol > 0:
            raise ValueError("target_abs_tol must be > 0")
        if self.max_terms < 16:
            raise ValueError("max_terms must be >= 16")
        if self.acceleration not in ("None", "AbelPairing"):
            raise ValueError("acceleration must be 'None' or 'AbelPairing'")
        if not 1 <= self.abel_passes <= 6:
            raise ValueError("abel_passes must be in 1..6")

    @property
    def passes(self) -> int:
        return self.abel_passes if self.acceleration == "AbelPairing" else 0


def reduce_angle(x: float) -> float:
    """Map ``x`` to ``[0, pi]`` using evenness and ``2 pi`` periodicity."""
    return abs(math.remainder(float(x), TWO_PI))


# ---------------------------------------------------------------- series


def _coef(params: KernelParams, n):
    n = np.asarray(n, dtype=float)
    return 1.0 / (params.c + n ** params.alpha)


def _diff(params: KernelParams, m: int, k: int) -> float:
    """``D^k a_m = sum_j (-1)^j C(k, j) a_{m+j}``, nonnegative where the signs are certified."""
    if k == 0:
        return float(_coef(params, m))
    vals = _coef(params, np.arange(m, m + k + 1))
    signs = (-1.0) ** np.arange(k + 1)
    return math.fsum(signs * comb(k, np.arange(k + 1)) * vals)


@functools.lru_cache(maxsize=256)
def _cm_threshold(params: KernelParams, order: int) -> int:
    """Smallest ``n`` from which ``a`` has alternating derivatives up to ``order``.

    For ``alpha <= 1`` this is 1.  Otherwise, writing ``r = c / s^alpha``,
    ``(-1)^k a^(k)(s) > 0`` whenever ``sum_{j>=1} (j+1)^k r^j < 1``.
    """
    if params.alpha <= 1 or order == 0:
        return 1

    def excess(r):
        j = np.arange(1, 400)
        return float(np.sum((j + 1.0) ** order * r ** j)) - 1.0

    lo, hi = 0.0, 0.5
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if excess(mid) < 0:
            lo = mid
        else:
            hi = mid
    r_max = lo * (1 - 1e-9)
    return max(1, int(math.ceil((params.c / r_max) ** (1.0 / params.alpha))))


def _abel_bound(params: KernelParams, s: float, n: int, passes: int) -> float:
    d = abs(_diff(params, n + 1, passes))
    d = d * (1 + 1e-6) + 2 ** passes * 4 * _EPS * float(_coef(params, n + 1))
    return d / ((2.0 * s) ** passes * s) / math.pi


def _comparison_bound(params: KernelParams, n: int) -> float:
    # (1/pi) sum_{k>n} 1/(c + k^a) <= (1/pi) int_n^inf t^-a dt
    a = params.alpha
    return n ** (1.0 - a) / ((a - 1.0) * math.pi)


def _min_n(bound, tol, start, cap):
    """Smallest ``n >= start`` with ``bound(n) <= tol`` (``bound`` decreasing), or None above ``cap``."""
    n = max(start, 16)
    if bound(n) <= tol:
        hi = n
        lo = start - 1
    else:
        lo = n
        while True:
            n *= 2
            if n > 4 * cap:
                return None
            if bound(n) <= tol:
                hi = n
                break
            lo = n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mid >= start and bound(mid) <= tol:
            hi = mid
        else:
            lo = mid
    return hi


def _cos_terms(n: np.ndarray, x: float) -> np.ndarray:
    """``cos(n x)`` without the rounding of the product ``n * x``."""
    # x = hi + lo with hi carrying 26 bits, so n * hi is exact for n < 2^26
    m, e = math.frexp(x)
    hi = math.ldexp(math.floor(m * 2 ** 26), e - 26)
    lo = x - hi
    a = n * hi
    b = n * lo
    return np.cos(a) * np.cos(b) - np.sin(a) * np.sin(b)


def _series_plan(params: KernelParams, x: float, cfg: SeriesConfig):
    """Pick ``(N, passes, bound)`` meeting the tolerance with the fewest terms."""
    tol = 0.5 * cfg.target_abs_tol
    plans = []
    s = math.sin(0.5 * x)
    if x > 0:
        # more passes shrink the bound by D^K a but inflate it by (2 s)^-K
        for k in range(cfg.passes + 1):
            start = _cm_threshold(params, k + 1) if k > 0 else 1
            n = _min_n(lambda m: _abel_bound(params, s, m, k), tol, start, cfg.max_terms)
            if n is not None:
                plans.append((n, k, _abel_bound(params, s, n, k)))
    if params.alpha > 1:
        n = _min_n(lambda m: _comparison_bound(params, m), tol, 1, cfg.max_terms)
        if n is not None:
            plans.append((n, -1, _comparison_bound(params, n)))
    if not plans:
        return None
    return min(plans)


def _tail_integral(params: KernelParams, m: float) -> float:
    """``int_m^inf dt / (c + t^alpha)`` for ``c < m^alpha / 2`` by its alternating expansion."""
    a = params.alpha
    r = -params.c / m ** a
    terms = []
    rk = 1.0
    k = 0
    while True:
        term = rk / (a * (k + 1) - 1.0)
        terms.append(term)
        if abs(term) < 1e-17 * abs(terms[0]):
            break
        rk *= r
        k += 1
    return m ** (1.0 - a) * math.fsum(terms)


def _series_at_zero(params: KernelParams, cfg: SeriesConfig) -> GreenValue:
    """``G(0)`` for ``alpha > 1`` with a midpoint-rule tail.

    With ``f(t) = 1/(c + t^alpha)`` convex and ``f''`` decreasing past
    ``t^alpha = 8c``, each unit cell's midpoint error lies between the cell's
    extreme values of ``f''/24``; summing gives
    ``I - (f''(M) + |f'(M)|)/24 <= sum_{n>N} f(n) <= I - |f'(M+1)|/24``
    with ``M = N + 1/2`` and ``I`` the tail integral from ``M``.
    """
    tol = cfg.target_abs_tol
    a, c = params.alpha, params.c

    def d1(t):
        return a * t ** (a - 1.0) / (c + t ** a) ** 2

    def d2(t):
        ta = t ** a
        return a * t ** (a - 2.0) * ((a + 1.0) * ta - (a - 1.0) * c) / (c + ta) ** 3

    def halfwidth(m):
        t = m + 0.5
        return (d2(t) + d1(t) - d1(t + 1.0)) / 48.0

    start = int(math.ceil((8.0 * c) ** (1.0 / a)))
    # the tail enters G with weight 1/pi
    n_terms = _min_n(lambda m: halfwidth(m) / math.pi, 0.5 * tol, max(start, 1), cfg.max_terms)
    if n_terms is None or n_terms > cfg.max_terms:
        raise ToleranceUnreachable(f"series exceeds max_terms={cfg.max_terms} for tol={tol:g} at x=0")
    n = np.arange(1, n_terms + 1, dtype=float)
    a_n = _coef(params, n)
    body = math.fsum(a_n)
    m = n_terms + 0.5
    tail = _tail_integral(params, m) - (d2(m) + d1(m) + d1(m + 1.0)) / 48.0
    value = (0.5 / math.pi) * (1.0 / c + 2.0 * (body + tail))
    rounding = 8.0 * _EPS * (body + 1.0 / c) / math.pi
    return GreenValue(value, halfwidth(n_terms) / math.pi + rounding, Method.SERIES, rigorous=True)


def g_series(params: KernelParams, x: float, cfg: SeriesConfig = SeriesConfig()) -> GreenValue:
    """Fourier series with a rigorous truncation bound (``0 < alpha <= 4``)."""
    validate(params, Method.SERIES)
    x = reduce_angle(x)
    if x == 0 and params.alpha <= 1:
        raise Divergent("Divergent: G(0) undefined for alpha <= 1")
    if x == 0:
        return _series_at_zero(params, cfg)
    plan = _series_plan(params, x, cfg)
    if plan is None or plan[0] > cfg.max_terms:
        need = "more than" if plan is None else f"{plan[0]} >"
        raise ToleranceUnreachable(
            f"series needs {need} max_terms={cfg.max_terms} terms for tol={cfg.target_abs_tol:g} at x={x:g}"
        )
    n_terms, passes, bound = plan
    n = np.arange(1, n_terms + 1, dtype=float)
    a = _coef(params, n)
    body = math.fsum(a * _cos_terms(n, x))
    tail = 0.0
    if passes > 0:
        q = complex(math.cos(x), math.sin(x))
        ratio = -q / (1 - q)
        qn = complex(math.cos((n_terms + 1) * x), math.sin((n_terms + 1) * x)) / (1 - q)
        acc = 0j
        for k in range(passes):
            acc += ratio ** k * _diff(params, n_terms + 1, k)
        tail = (acc * qn).real
    value = (0.5 / math.pi) * (1.0 / params.c + 2.0 * (body + tail))
    # rounding: a few ulps per term of cos and of the accumulated products
    rounding = 8.0 * _EPS * (float(np.sum(a)) + 1.0 / params.c) / math.pi
    return GreenValue(value, bound + rounding, Method.SERIES, rigorous=True)


# ---------------------------------------------------------------- closed form


def g_closed_alpha2(c: float, x: float) -> GreenValue:
    """``cosh(sqrt(c)(pi - x)) / (2 sqrt(c) sinh(sqrt(c) pi))`` on ``[0, pi]``."""
    if not c > 0:
        raise OutOfDomain("c", "c > 0", c)
    if not 0 <= x <= math.pi:
        raise OutOfDomain("x", "0 <= x <= pi", x)
    r = math.sqrt(c)
    # exponential form; avoids overflow of cosh/sinh for large c
    v = (math.exp(-r * x) + math.exp(-r * (TWO_PI - x))) / (2.0 * r * -math.expm1(-TWO_PI * r))
    return GreenValue(v, 8.0 * _EPS * v, Method.CLOSED_FORM2, rigorous=True)


def _closed_alpha2_deriv(c: float, x: float, p: int) -> float:
    r = math.sqrt(c)
    d = math.pi - x
    # d^p/dx^p cosh(r (pi - x)) = (-r)^p * (cosh or sinh)(r (pi - x))
    if p % 2:
        num = 2.0 * math.exp(-r * math.pi) * math.sinh(r * d)
    else:
        num = math.exp(-r * x) + math.exp(-r * (TWO_PI - x))
    return (-r) ** p * num / (2.0 * r * -math.expm1(-TWO_PI * r))


# ---------------------------------------------------------------- periodization


def _check_open(x):
    if not 0 < x <= math.pi:
        raise OutOfDomain("x", "0 < x <= pi", x)


def g_periodized(
    params: KernelParams,
    x: float,
    tol: float = 1e-10,
    direct_terms: int = 2,
    cfg: Optional[QuadratureConfig] = None,
) -> GreenValue:
    """Periodization of the line Green function (``0 < alpha <= 2``).

    The first ``direct_terms`` pairs ``H(x + 2 n pi) + H(2 (n+1) pi - x)`` are
    evaluated one by one; the rest is the Laplace integral of ``H`` against
    the summed exponentials, which is exact (no truncation).
    """
    validate(params, Method.PERIODIZED)
    _check_open(x)
    if direct_terms < 0:
        raise ValueError("direct_terms must be >= 0")
    m = direct_terms
    if params.is_alpha2:
        r = math.sqrt(params.c)
        parts = []
        for n in range(m):
            parts.append(h_closed_alpha2(params.c, x + TWO_PI * n).value)
            parts.append(h_closed_alpha2(params.c, TWO_PI * (n + 1) - x).value)
        tail = (math.exp(-r * (x + TWO_PI * m)) + math.exp(-r * (TWO_PI * (m + 1) - x))) / (
            2.0 * r * -math.expm1(-TWO_PI * r)
        )
        v = math.fsum(parts) + tail
        return GreenValue(v, 16.0 * _EPS * v, Method.PERIODIZED, rigorous=True)

    if cfg is None:
        cfg = QuadratureConfig(abs_tol=0.1 * tol)
    total, err = [], 0.0
    for n in range(m):
        for y in (x + TWO_PI * n, TWO_PI * (n + 1) - x):
            h = h_eval(params, y, cfg)
            total.append(h.value)
            err += h.error_bound
    near, far = x + TWO_PI * m, TWO_PI * (m + 1) - x

    def weight(t):
        return (np.exp(-t * near) + np.exp(-t * far)) / -np.expm1(-TWO_PI * t)

    tail, tail_err = laplace_integral(params, weight, 1.0 / near, cfg)
    total.append(tail)
    v = math.fsum(total)
    return GreenValue(v, err + tail_err, Method.PERIODIZED, rigorous=False)


def _g_deriv(params: KernelParams, x: float, p: int, cfg: QuadratureConfig):
    """``G^(p)(x)`` and its error estimate, from the term-wise differentiated periodization."""
    if params.is_alpha2:
        v = _closed_alpha2_deriv(params.c, x, p)
        return v, 16.0 * _EPS * abs(v)
    d = math.pi - x

    # sum_n [(-1)^p e^{-t(x+2n pi)} + e^{-t(2(n+1)pi - x)}] written around pi
    # so that the odd orders do not cancel as x -> pi
    if p % 2:

        def weight(t):
            return t ** p * (np.exp(-t * x) * np.expm1(-2.0 * t * d)) / -np.expm1(-TWO_PI * t)

    else:

        def weight(t):
            return t ** p * (np.exp(-t * x) + np.exp(-t * (TWO_PI - x))) / -np.expm1(-TWO_PI * t)

    return laplace_integral(params, weight, max(p, 1) / x, cfg)


def g_deriv(params: KernelParams, x: float, p: int, tol: float = 1e-10) -> float:
    """``p``-th derivative of ``G`` on ``(0, pi)``; ``(-1)^p`` times it is positive.

    Accepts ``0 < alpha <= 2`` (``alpha = 2`` uses the closed form) and
    ``0 <= p <= 8``.
    """
    return g_deriv_with_error(params, x, p, tol)[0]


def g_deriv_with_error(params: KernelParams, x: float, p: int, tol: float = 1e-10):
    """Like :func:`g_deriv` but returns ``(value, error_estimate)``."""
    validate(params, Method.PERIODIZED)
    p = int(p)
    if not 0 <= p <= P_MAX:
        raise OutOfDomain("p", f"0 <= p <= {P_MAX}", p)
    _check_open(x)
    return _g_deriv(params, x, p, QuadratureConfig(abs_tol=tol))


# ---------------------------------------------------------------- Mittag-Leffler integral


def _ml_weight(params: KernelParams, t, cfg: MlRegimeConfig):
    """``t^(alpha-1) E_{alpha,alpha}(-c t^alpha)`` on an array, zero where ``e^-t`` underflows."""
    a, c = params.alpha, params.c
    out = np.zeros_like(t)
    live = t < 740.0
    tl = t[live]
    e, _, _ = ml_eval_with_error(a, a, -c * tl ** a, cfg)
    out[live] = tl ** (a - 1.0) * e
    return out


def _poisson_den(t, x):
    # 1 - 2 cos(x) e^-t + e^-2t as a sum of two nonnegative terms
    return np.expm1(-t) ** 2 + 4.0 * np.exp(-t) * math.sin(0.5 * x) ** 2


def g_ml(params: KernelParams, x: float, tol: float = 1e-10, cfg: MlRegimeConfig = ML_DEFAULT) -> GreenValue:
    """Mittag-Leffler integral route (``0 < alpha <= 2``)."""
    validate(params, Method.ML_INTEGRAL)
    _check_open(x)
    cx = math.cos(x)

    def f(t):
        # P(t, x) - 1 = 2 e^-t (cos x - e^-t) / den
        pk = 2.0 * np.exp(-t) * (cx - np.exp(-t)) / _poisson_den(t, x)
        return pk * _ml_weight(params, t, cfg)

    integral, err = quadrature.exp_sinh(f, 0.0, scale=1.0, abs_tol=tol, rel_tol=0.0, max_level=9)
    v = 1.0 / (TWO_PI * params.c) + integral / TWO_PI
    if not v > 0:
        raise NumericalInstability(f"Mittag-Leffler route returned non-positive {v}")
    # ML values carry ~target_abs_tol error each; the kernel integrates to O(1)
    return GreenValue(v, err / TWO_PI + 10.0 * cfg.target_abs_tol, Method.ML_INTEGRAL, rigorous=False)


def g_prime_ml(params: KernelParams, x: float, tol: float = 1e-10, cfg: MlRegimeConfig = ML_DEFAULT) -> float:
    """``G'(x)`` from the differentiated Mittag-Leffler integral (``0 < alpha < 2``).

    The ``sin(x)`` prefactor is evaluated as ``sin(pi - x)`` on the upper half
    so that it is exactly zero at ``x = pi``.
    """
    validate(params, Method.ML_INTEGRAL)
    if params.is_alpha2:
        raise OutOfDomain("alpha", "0 < alpha < 2 for the derivative formula", params.alpha)
    _check_open(x)
    pref = math.sin(x) if x <= 0.5 * math.pi else math.sin(math.pi - x)
    if pref == 0.0:
        return 0.0

    def f(t):
        # (e^-3t - e^-t) / den^2
        num = np.exp(-t) * np.expm1(-2.0 * t)
        return num / _poisson_den(t, x) ** 2 * _ml_weight(params, t, cfg)

    integral, _ = quadrature.exp_sinh(f, 0.0, scale=1.0, abs_tol=tol, rel_tol=0.0, max_level=9)
    return pref * integral / math.pi


# ---------------------------------------------------------------- dispatcher


def g_eval(
    params: KernelParams,
    x: float,
    method: Optional[Method] = None,
    tol: float = 1e-8,
) -> GreenValue:
    """Evaluate ``G`` at any real ``x`` (reduced to ``[0, pi]``).

    Default routing: closed form at ``alpha = 2``; the series for other
    ``alpha``, falling back to the periodization when the series would exceed
    its term cap (small ``x`` with ``alpha <= 1``).
    """
    xr = reduce_angle(x)
    if xr == 0 and params.alpha <= 1:
        raise Divergent("Divergent: G(0) undefined for alpha <= 1")
    if method is None:
        if params.is_alpha2:
            return g_closed_alpha2(params.c, xr)
        if params.alpha > 2:
            return g_series(params, xr, SeriesConfig(target_abs_tol=tol))
        try:
            return g_series(params, xr, SeriesConfig(target_abs_tol=tol))
        except ToleranceUnreachable:
            if xr == 0:
                raise
            return g_periodized(params, xr, tol)
    method = Method(method)
    validate(params, method)
    if method is Method.SERIES:
        return g_series(params, xr, SeriesConfig(target_abs_tol=tol))
    if method is Method.CLOSED_FORM2:
        return g_closed_alpha2(params.c, xr)
    if xr == 0:
        raise OutOfDomain("x", f"x != 0 (mod 2 pi) for {method.value}", x)
    if method is Method.PERIODIZED:
        return g_periodized(params, xr, tol)
    if method is Method.ML_INTEGRAL:
        return g_ml(params, xr, tol)
    raise OutOfDomain("method", "a deterministic method (Series, Periodized, MlIntegral, ClosedForm2)", method.value)
