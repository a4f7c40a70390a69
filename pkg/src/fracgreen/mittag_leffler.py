"""Two-parameter Mittag-Leffler function on the real axis.

``E_{a,b}(z) = sum_k z^k / Gamma(a k + b)`` for ``0 < a <= 2``, evaluated
mainly for ``z <= 0``.  Three regimes are used:

* power series, when ``|z|`` is below ``series_radius`` and the largest term
  is small enough that cancellation cannot eat the tolerance;
* the large-``|z|`` expansion ``-sum_{k=1}^K z^-k / Gamma(b - a k)`` plus the
  contribution of the poles of ``s^(a-b) / (s^a + x)`` (present for ``a >= 1``);
* the Laplace-inversion integral along the negative real axis plus the same
  pole terms, for the band where neither of the above certifies the tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, rgamma

from . import quadrature
from .core import OutOfDomain, ToleranceUnreachable

_EPS = np.finfo(float).eps
_SERIES_CAP = 1500

REGIME_SERIES = 0
REGIME_ASYMPTOTIC = 1
REGIME_INTEGRAL = 2


@dataclass(frozen=True)
class MlRegimeConfig:
    series_radius: float = 10.0
    asymptotic_terms: int = 6
    target_abs_tol: float = 1e-12
    # tanh-sinh/exp-sinh levels tried, in order, by the integral regime
    quad_levels: tuple = (6, 8)

    def __post_init__(self):
        if not self.series_radius > 0:
            raise ValueError("series_radius must be > 0")
        if self.asymptotic_terms < 2:
            raise ValueError("asymptotic_terms must be >= 2")
        if not self.target_abs_tol > 0:
            raise ValueError("target_abs_tol must be > 0")


DEFAULT_CONFIG = MlRegimeConfig()


def _check(alpha, beta):
    if not (0 < alpha <= 2):
        raise OutOfDomain("alpha", "0 < alpha <= 2", alpha)
    if not beta > 0:
        raise OutOfDomain("beta", "beta > 0", beta)


def _series(alpha, beta, z, tol):
    """Power series on the array ``z``; returns (value, error, ok-mask)."""
    x = np.abs(z)
    k = np.arange(_SERIES_CAP, dtype=float)
    lg = gammaln(alpha * k + beta)
    logterm = k[None, :] * np.log(x)[:, None] - lg[None, :]
    logterm[:, 0] = -lg[0]
    peak = logterm.max(axis=1)
    # rounding in each term is a few ulps of the largest one
    with np.errstate(over="ignore"):
        round_err = 16.0 * _EPS * np.exp(peak)
    cut = math.log(tol) - 4.0
    past_peak = np.arange(_SERIES_CAP)[None, :] >= logterm.argmax(axis=1)[:, None]
    small = (logterm < cut) & past_peak
    has_stop = small.any(axis=1)
    nterms = np.where(has_stop, small.argmax(axis=1), _SERIES_CAP)
    ok = has_stop & (round_err <= 0.5 * tol)

    value = np.zeros_like(x)
    err = np.full_like(x, np.inf)
    idx = np.nonzero(ok)[0]
    if idx.size:
        kmax = int(nterms[idx].max())
        sign = np.where(z[idx] < 0, -1.0, 1.0)
        # Neumaier compensated summation along k
        s = np.zeros(idx.size)
        comp = np.zeros(idx.size)
        for j in range(kmax):
            term = np.where(j < nterms[idx], sign ** j * np.exp(logterm[idx, j]), 0.0)
            t = s + term
            comp += np.where(np.abs(s) >= np.abs(term), (s - t) + term, (term - t) + s)
            s = t
        value[idx] = s + comp
        first_omitted = np.exp(logterm[idx, np.minimum(nterms[idx], _SERIES_CAP - 1)])
        # alternating tail for z < 0, geometric-ish for z > 0
        trunc = np.where(z[idx] < 0, first_omitted, 2.0 * first_omitted)
        err[idx] = trunc + round_err[idx]
    return value, err, ok


def _poles(alpha, beta, x):
    """Residue contribution of ``e^s s^(a-b)/(s^a + x)`` at ``s^a = -x``."""
    if alpha < 1:
        return np.zeros_like(x)
    if alpha == 1:
        # simple pole at s = -x; real only for integer beta
        return np.exp(-x) * (-1.0) ** (1 - int(beta)) * x ** (1.0 - beta)
    s = x.astype(complex) ** (1.0 / alpha) * np.exp(1j * math.pi / alpha)
    return (2.0 / alpha) * (s ** (1.0 - beta) * np.exp(s)).real


def _asymptotic(alpha, beta, x, nterms):
    """Large-argument expansion at z = -x; returns (value, error)."""
    z = -x
    k = np.arange(1, nterms + 1)
    coef = rgamma(beta - alpha * k)
    alg = -(coef[None, :] * z[:, None] ** (-k[None, :].astype(float))).sum(axis=1)
    # first omitted nonzero term as the error estimate
    extra = np.arange(nterms + 1, nterms + 6)
    extra_coef = rgamma(beta - alpha * extra)
    nz = np.nonzero(extra_coef)[0]
    if nz.size:
        j = nz[0]
        err = 2.0 * np.abs(extra_coef[j]) * x ** (-float(extra[j]))
    else:
        err = np.zeros_like(x)
    return alg + _poles(alpha, beta, x), err


def _branch_cut(alpha, beta, x, level):
    """Integral along the negative real axis at z = -x; returns (value, error)."""
    ca, sa = math.cos(math.pi * alpha), math.sin(math.pi * alpha)
    sb, sab = math.sin(math.pi * beta), math.sin(math.pi * (alpha - beta))
    # minimizer of the denominator r^(2a) + 2 x r^a cos(pi a) + x^2
    if ca < 0:
        rstar = (x * -ca) ** (1.0 / alpha)
    else:
        rstar = x ** (1.0 / alpha)

    def f(r):
        ra = r ** alpha
        den = (ra + x * ca) ** 2 + (x * sa) ** 2
        return np.exp(-r) * r ** (alpha - beta) * (ra * sb - x * sab) / den

    left, el = quadrature.batch(quadrature.tanh_sinh_rule(np.zeros_like(rstar), rstar, level), f, level)
    right, er = quadrature.batch(quadrature.exp_sinh_rule(rstar, np.ones_like(rstar), level), f, level)
    return (left + right) / math.pi + _poles(alpha, beta, x), (el + er) / math.pi


def _ml_detail(alpha, beta, z, cfg: MlRegimeConfig):
    """Vectorized evaluation; returns (values, errors, regimes) arrays."""
    alpha = float(alpha)
    beta = float(beta)
    _check(alpha, beta)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    tol = cfg.target_abs_tol
    if np.any(~np.isfinite(z)):
        raise OutOfDomain("z", "finite", z)

    value = np.zeros_like(z)
    err = np.full_like(z, np.inf)
    regime = np.full(z.shape, -1)

    zero = z == 0
    value[zero] = rgamma(beta)
    err[zero] = 0.0
    regime[zero] = REGIME_SERIES

    inside = (np.abs(z) <= cfg.series_radius) & ~zero
    if np.any(inside):
        v, e, ok = _series(alpha, beta, z[inside], tol)
        idx = np.nonzero(inside)[0][ok]
        value[idx], err[idx], regime[idx] = v[ok], e[ok], REGIME_SERIES

    todo = regime < 0
    if np.any(todo & (z > 0)):
        raise OutOfDomain("z", "z <= 0 or 0 < z <= series_radius with a stable series", z[todo & (z > 0)][0])

    if alpha == 1 and beta != int(beta) and np.any(todo):
        raise OutOfDomain("beta", "an integer when alpha == 1 and |z| is outside the series radius", beta)

    far = todo & (z <= -cfg.series_radius)
    if alpha == 1:
        # expansion plus the single pole term is exact for integer beta
        far = todo
    if np.any(far):
        x = -z[far]
        v, e = _asymptotic(alpha, beta, x, cfg.asymptotic_terms)
        ok = e <= tol
        idx = np.nonzero(far)[0][ok]
        value[idx], err[idx], regime[idx] = v[ok], e[ok], REGIME_ASYMPTOTIC

    todo = regime < 0
    if np.any(todo):
        if beta >= alpha + 1:
            raise OutOfDomain("beta", "beta < alpha + 1 outside the series/asymptotic regimes", beta)
        idx = np.nonzero(todo)[0]
        for level in cfg.quad_levels:
            v, e = _branch_cut(alpha, beta, -z[idx], level)
            ok = e <= tol
            value[idx[ok]], err[idx[ok]], regime[idx[ok]] = v[ok], e[ok], REGIME_INTEGRAL
            idx = idx[~ok]
            if not idx.size:
                break
        if idx.size:
            raise ToleranceUnreachable(
                f"Mittag-Leffler E_{{{alpha:g},{beta:g}}}({z[idx[0]]:g}): no regime certifies "
                f"tolerance {tol:g} (best estimate {float(np.max(e[~ok])):.3g})"
            )
    return value, err, regime


def ml_eval(alpha: float, beta: float, z, cfg: MlRegimeConfig = DEFAULT_CONFIG):
    """Mittag-Leffler function ``E_{alpha,beta}(z)``.

    Parameters
    ----------
    alpha : float
        In ``(0, 2]``.
    beta : float
        Positive.
    z : float or array_like
        Real arguments; positive values are supported only inside the series
        radius.
    cfg : MlRegimeConfig
        Regime switch and absolute tolerance.

    Returns
    -------
    float or ndarray
        Same shape as ``z``.
    """
    value, _, _ = _ml_detail(alpha, beta, z, cfg)
    if np.ndim(z) == 0:
        return float(value[0])
    return value.reshape(np.shape(z))


def ml_eval_with_error(alpha: float, beta: float, z, cfg: MlRegimeConfig = DEFAULT_CONFIG):
    """Like :func:`ml_eval` but also returns error estimates and regime codes."""
    value, err, regime = _ml_detail(alpha, beta, z, cfg)
    shape = np.shape(z)
    return value.reshape(shape), err.reshape(shape), regime.reshape(shape)


def y_density(alpha: float, c: float, t, cfg: MlRegimeConfig = DEFAULT_CONFIG):
    """``c t^(alpha-1) E_{alpha,alpha}(-c t^alpha)`` for ``t > 0``.

    For ``alpha <= 1`` this is the density of the subordinator of index
    ``alpha`` stopped at an independent exponential(c) time; for
    ``alpha in (1, 2]`` it is the same function, which changes sign.
    """
    if not c > 0:
        raise OutOfDomain("c", "c > 0", c)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise OutOfDomain("t", "t > 0", t)
    e = ml_eval(alpha, alpha, -c * t_arr ** alpha, cfg)
    out = c * t_arr ** (alpha - 1.0) * e
    return float(out) if np.ndim(t) == 0 else out
