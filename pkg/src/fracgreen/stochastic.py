"""Stable subordinators, killed-time composites and Monte Carlo estimators of G.

With ``tau`` exponential(c) and ``sigma^(b)`` the ``b``-stable subordinator,

* ``X = sigma^(alpha/2)_tau`` satisfies ``E exp(-n^2 X) = c / (c + n^alpha)``,
* ``Y = sigma^(alpha)_tau`` (``alpha <= 1``) satisfies ``E exp(-n Y) = c / (c + n^alpha)``,

so ``2 pi c G(x)`` is the expectation of the theta function ``sum_n e^{inx} e^{-n^2 X}``
and of the Poisson kernel at radius ``e^{-Y}``.

Estimators are deterministic functions of ``(seed, stream_id, n_samples)``:
samples are drawn in fixed-size chunks, chunk ``j`` from its own counter-based
substream, and chunk statistics are merged in chunk order, so the result does
not depend on the number of workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import KernelParams, OutOfDomain

CHUNK = 1 << 15
# below this X the theta function is summed after Poisson summation
JTP_SWITCH_X = 1.0
# e^{-(2n+1) X} below this is dropped from the product
_JTP_FACTOR_EPS = 1e-17
_JTP_MAX_FACTORS = 10**6
_POISSON_K = np.arange(-3, 4)


@dataclass
class RngStream:
    """Counter-based (Philox) random stream keyed by ``(seed, stream_id)``."""

    seed: int
    stream_id: int = 0
    _gen: Optional[np.random.Generator] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = int(getattr(self, name))
            if not 0 <= v < 2**64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer")
            setattr(self, name, v)

    @property
    def generator(self) -> np.random.Generator:
        """The stream's own sequential generator (created on first use)."""
        if self._gen is None:
            self._gen = self.substream(None)
        return self._gen

    def substream(self, chunk: Optional[int]) -> np.random.Generator:
        """A fresh generator for chunk ``chunk``, independent of this stream's state."""
        key = (self.stream_id,) if chunk is None else (self.stream_id, 1, int(chunk))
        ss = np.random.SeedSequence(self.seed, spawn_key=key)
        return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_samples: int
    seed: int

    def __post_init__(self):
        if self.n_samples < 2:
            raise ValueError("n_samples must be >= 2")

    def deviation(self, reference: float) -> float:
        """Standardized deviation ``(mean - reference) / std_error``."""
        if self.std_error == 0:
            return 0.0 if self.mean == reference else math.copysign(math.inf, self.mean - reference)
        return (self.mean - reference) / self.std_error


def _gen(rng) -> np.random.Generator:
    return rng.generator if isinstance(rng, RngStream) else rng


def _unit_stable(beta: float, gen: np.random.Generator, size):
    """Kanter's representation of the unit-time ``beta``-stable subordinator."""
    if beta == 1.0:
        return np.ones(size) if size is not None else 1.0
    u = gen.random(size)
    e = gen.standard_exponential(size)
    pu = math.pi * u
    # log form: the factors overflow separately for small beta
    with np.errstate(divide="ignore", over="ignore"):
        logs = (
            np.log(np.sin(beta * pu))
            - np.log(np.sin(pu)) / beta
            + (1.0 - beta) / beta * (np.log(np.sin((1.0 - beta) * pu)) - np.log(e))
        )
        return np.exp(logs)


def sample_stable_subordinator(beta: float, t: float, rng, size=None):
    """Draw ``sigma^(beta)_t``, with Laplace transform ``exp(-t lambda^beta)``.

    Parameters
    ----------
    beta : float
        Index in ``(0, 1]``; ``beta = 1`` is the deterministic drift ``t``.
    t : float
        Positive time.
    rng : RngStream or numpy Generator
    size : int, optional
        Number of draws; a float is returned when omitted.
    """
    if not 0 < beta <= 1:
        raise OutOfDomain("beta", "0 < beta <= 1", beta)
    if not t > 0:
        raise OutOfDomain("t", "t > 0", t)
    if beta == 1.0:
        return float(t) if size is None else np.full(size, float(t))
    s = _unit_stable(beta, _gen(rng), size)
    out = t ** (1.0 / beta) * s
    return float(out) if size is None else out


def _killed(beta: float, c: float, gen: np.random.Generator, size):
    # sigma_tau = tau^(1/beta) sigma_1 by self-similarity
    tau = gen.standard_exponential(size) / c
    if beta == 1.0:
        return tau
    s = _unit_stable(beta, gen, size)
    with np.errstate(over="ignore"):
        return tau ** (1.0 / beta) * s


def sample_X(params: KernelParams, rng, size=None):
    """Draw ``X = sigma^(alpha/2)`` at an independent exponential(c) time."""
    if not params.alpha <= 2:
        raise OutOfDomain("alpha", "0 < alpha <= 2", params.alpha)
    out = _killed(params.beta, params.c, _gen(rng), size)
    return float(out) if size is None else out


def sample_Y(params: KernelParams, rng, size=None):
    """Draw ``Y = sigma^(alpha)`` at an independent exponential(c) time (``alpha <= 1``)."""
    if not params.alpha <= 1:
        raise OutOfDomain("alpha", "0 < alpha <= 1", params.alpha)
    out = _killed(params.alpha, params.c, _gen(rng), size)
    return float(out) if size is None else out


def sample_x_alpha(alpha: float, rng, size=None):
    """Draw ``X_alpha = sqrt(S / S')`` with ``S, S'`` i.i.d. unit ``alpha/2``-stable."""
    if not 0 < alpha < 2:
        raise OutOfDomain("alpha", "0 < alpha < 2", alpha)
    gen = _gen(rng)
    s1 = _unit_stable(0.5 * alpha, gen, size)
    s2 = _unit_stable(0.5 * alpha, gen, size)
    # ratio in logs: either draw may overflow on its own
    with np.errstate(divide="ignore"):
        out = np.exp(0.5 * (np.log(s1) - np.log(s2)))
    return float(out) if size is None else out


def jtp_theta(X, x: float):
    """``sum_n e^{inx} e^{-n^2 X}`` for ``X >= 0``, ``x`` in ``(0, pi]`` (vectorized in ``X``).

    The Jacobi triple product is used for ``X >= JTP_SWITCH_X``; smaller
    ``X`` use the Poisson-summed Gaussian form, whose first omitted terms
    are below ``exp(-(7 pi)^2 / 4)`` there.
    """
    X = np.asarray(X, dtype=float)
    out = np.empty_like(X)
    big = X >= JTP_SWITCH_X
    if np.any(big):
        out[big] = _jtp_product(X[big], x)
    small = ~big
    if np.any(small):
        xs = X[small]
        pos = xs > 0
        val = np.zeros_like(xs)
        d = (x - 2.0 * math.pi * _POISSON_K)[None, :]
        xp = xs[pos][:, None]
        val[pos] = np.sqrt(math.pi / xp[:, 0]) * np.exp(-d * d / (4.0 * xp)).sum(axis=1)
        out[small] = val
    return out


def _jtp_product(X, x):
    Xmin = float(X.min())
    nf = int(math.ceil((-math.log(_JTP_FACTOR_EPS) / Xmin - 1.0) / 2.0)) + 1
    nf = min(max(nf, 1), _JTP_MAX_FACTORS)
    cx = math.cos(x)
    prod = np.ones_like(X)
    with np.errstate(under="ignore"):
        for n in range(nf):
            q = np.exp(-(2 * n + 1) * X)
            prod *= (1.0 + 2.0 * cx * q + q * q) * -np.expm1(-(2 * n + 2) * X)
    return prod


def poisson_kernel(Y, x: float):
    """``(1 - e^{-2Y}) / (1 - 2 cos(x) e^{-Y} + e^{-2Y})``, stable as ``Y -> 0``."""
    Y = np.asarray(Y, dtype=float)
    em = np.expm1(-Y)
    den = em * em + 4.0 * np.exp(-Y) * math.sin(0.5 * x) ** 2
    return -np.expm1(-2.0 * Y) / den


def _workers(workers: Optional[int]) -> int:
    if workers is None:
        workers = int(os.environ.get("FRACGREEN_THREADS", "1") or 1)
    return max(1, int(workers))


def _chunk_stats(values: np.ndarray):
    n = values.size
    m = float(values.mean())
    d = values - m
    return n, m, float(np.dot(d, d))


def mc_expectation(
    functional: Callable[[np.random.Generator, int], np.ndarray],
    n_samples: int,
    rng: RngStream,
    workers: Optional[int] = None,
) -> McEstimate:
    """Mean and standard error of ``functional(generator, size)`` samples.

    Chunk ``j`` draws from ``rng.substream(j)``; per-chunk ``(n, mean, M2)``
    are merged in chunk order with Chan's update, so the result is
    bit-identical for any number of workers.
    """
    n_samples = int(n_samples)
    if n_samples < 2:
        raise OutOfDomain("n_samples", "n_samples >= 2", n_samples)
    sizes = [CHUNK] * (n_samples // CHUNK)
    if n_samples % CHUNK:
        sizes.append(n_samples % CHUNK)

    def run(j):
        v = np.asarray(functional(rng.substream(j), sizes[j]), dtype=float)
        if not np.all(np.isfinite(v)):
            raise FloatingPointError("Monte Carlo functional produced non-finite samples")
        return _chunk_stats(v)

    nw = _workers(workers)
    if nw == 1 or len(sizes) == 1:
        stats = [run(j) for j in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            stats = list(pool.map(run, range(len(sizes))))

    n, mean, m2 = stats[0]
    for nb, mb, m2b in stats[1:]:
        tot = n + nb
        delta = mb - mean
        mean += delta * nb / tot
        m2 += m2b + delta * delta * n * nb / tot
        n = tot
    sd = math.sqrt(m2 / (n - 1))
    return McEstimate(mean, sd / math.sqrt(n), n, rng.seed)


def _check_x(x):
    if not 0 < x < math.pi:
        raise OutOfDomain("x", "0 < x < pi", x)


def mc_g_jtp(params: KernelParams, x: float, n_samples: int, rng: RngStream, workers: Optional[int] = None) -> McEstimate:
    """Estimate ``G(x)`` as the mean of ``theta(X_i, x) / (2 pi c)``."""
    if not params.alpha <= 2:
        raise OutOfDomain("alpha", "0 < alpha <= 2 for McJtp", params.alpha)
    _check_x(x)
    if n_samples < 100:
        raise OutOfDomain("n_samples", "n_samples >= 100", n_samples)
    scale = 1.0 / (2.0 * math.pi * params.c)

    def f(gen, size):
        return scale * jtp_theta(_killed(params.beta, params.c, gen, size), x)

    return mc_expectation(f, n_samples, rng, workers)


def mc_g_poisson(params: KernelParams, x: float, n_samples: int, rng: RngStream, workers: Optional[int] = None) -> McEstimate:
    """Estimate ``G(x)`` as the mean of the Poisson kernel at ``e^{-Y_i}``, over ``2 pi c``."""
    if not params.alpha <= 1:
        raise OutOfDomain("alpha", "0 < alpha <= 1 for McPoisson", params.alpha)
    _check_x(x)
    if n_samples < 100:
        raise OutOfDomain("n_samples", "n_samples >= 100", n_samples)
    scale = 1.0 / (2.0 * math.pi * params.c)

    def f(gen, size):
        return scale * poisson_kernel(_killed(params.alpha, params.c, gen, size), x)

    return mc_expectation(f, n_samples, rng, workers)


def mc_laplace_X(params: KernelParams, n: int, n_samples: int, rng: RngStream, workers: Optional[int] = None) -> McEstimate:
    """Monte Carlo mean of ``exp(-n^2 X)``; the target is ``c / (c + n^alpha)``."""
    if not params.alpha <= 2:
        raise OutOfDomain("alpha", "0 < alpha <= 2", params.alpha)
    return mc_expectation(
        lambda gen, size: np.exp(-(n * n) * _killed(params.beta, params.c, gen, size)), n_samples, rng, workers
    )


def mc_laplace_Y(params: KernelParams, n: int, n_samples: int, rng: RngStream, workers: Optional[int] = None) -> McEstimate:
    """Monte Carlo mean of ``exp(-n Y)``; the target is ``c / (c + n^alpha)``."""
    if not params.alpha <= 1:
        raise OutOfDomain("alpha", "0 < alpha <= 1", params.alpha)
    return mc_expectation(
        lambda gen, size: np.exp(-n * _killed(params.alpha, params.c, gen, size)), n_samples, rng, workers
    )
