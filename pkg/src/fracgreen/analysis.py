"""Executable checks of the structural properties of ``G`` and ``H``.

Each check returns a :class:`PropertyReport` carrying its thresholds, the
worst margin found and per-point details, so a failing report is
self-explanatory.  Margins are normalized so that a report passes iff
``worst_margin > 0`` (``ZeroScan`` is informational).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from . import stochastic
from .core import (
    Grid,
    KernelParams,
    Method,
    OutOfDomain,
    ToleranceUnreachable,
)
from .line_green import XAlphaLaw, h_cdf
from .periodic_green import (
    g_closed_alpha2,
    g_deriv_with_error,
    g_eval,
    g_ml,
    g_periodized,
    g_prime_ml,
    g_series,
    SeriesConfig,
)

_EPS = np.finfo(float).eps


class Property(str, enum.Enum):
    POSITIVITY = "Positivity"
    MONOTONE_DECREASE = "MonotoneDecrease"
    COMPLETE_MONOTONICITY = "CompleteMonotonicity"
    BOUNDARY_DERIVATIVE_ZERO = "BoundaryDerivativeZero"
    CROSS_METHOD_CONSISTENCY = "CrossMethodConsistency"
    NORMALIZATION = "Normalization"
    H_FACTORIZATION = "HFactorization"
    ZERO_SCAN = "ZeroScan"


@dataclass
class PropertyReport:
    property: Property
    params: KernelParams
    grid: Optional[Grid]
    passed: bool
    worst_margin: float
    details: List[Dict] = field(default_factory=list)
    thresholds: Dict = field(default_factory=dict)
    witness: Optional[Dict] = None
    informational: bool = False

    @property
    def name(self) -> str:
        if self.property is Property.COMPLETE_MONOTONICITY:
            return f"{self.property.value}({self.thresholds.get('p_max')})"
        return self.property.value

    def summary(self) -> str:
        head = f"{self.name} alpha={self.params.alpha:g} c={self.params.c:g}: "
        head += "pass" if self.passed else "FAIL"
        head += f" (worst margin {self.worst_margin:.3g})"
        if not self.passed and self.witness is not None:
            head += f"; witness {self.witness}"
        return head

    def to_dict(self) -> Dict:
        return {
            "property": self.name,
            "alpha": self.params.alpha,
            "c": self.params.c,
            "grid": None if self.grid is None else list(self.grid.points),
            "pass": bool(self.passed),
            "worst_margin": _json_float(self.worst_margin),
            "thresholds": self.thresholds,
            "witness": self.witness,
            "informational": self.informational,
            "details": self.details,
        }


def _json_float(v):
    v = float(v)
    if math.isfinite(v):
        return v
    return "inf" if v > 0 else ("-inf" if v < 0 else "nan")


@dataclass
class ZeroScanResult:
    alpha: float
    c: float
    sign_changes: int
    bracketing_intervals: List[Tuple[float, float]]
    refined_roots: List[float]
    resolution: int = 0
    first_certified_x: Optional[float] = None
    uncertified_points: int = 0

    def to_dict(self) -> Dict:
        return {
            "alpha": self.alpha,
            "c": self.c,
            "sign_changes": self.sign_changes,
            "bracketing_intervals": [list(b) for b in self.bracketing_intervals],
            "refined_roots": self.refined_roots,
            "resolution": self.resolution,
            "first_certified_x": self.first_certified_x,
            "uncertified_points": self.uncertified_points,
        }


def _require_le2(params: KernelParams, what: str):
    if not params.alpha <= 2:
        raise OutOfDomain("alpha", f"0 < alpha <= 2 for {what}", params.alpha)


def _open_grid(grid: Grid):
    if max(grid.points) >= math.pi:
        raise OutOfDomain("grid", "points in the open interval (0, pi)", max(grid.points))


def _finish(report: PropertyReport, margins: List[Tuple[float, Dict]]) -> PropertyReport:
    if margins:
        worst, where = min(margins, key=lambda m: m[0])
        report.worst_margin = worst
        report.passed = worst > 0
        if not report.passed:
            report.witness = where
    else:
        report.worst_margin = math.inf
        report.passed = True
    return report


def check_complete_monotonicity(params: KernelParams, grid: Grid, p_max: int = 6, tol: float = 1e-10) -> PropertyReport:
    """``(-1)^p G^(p)(x) > 0`` for ``p <= p_max`` on the grid.

    The margin at each point is ``((-1)^p G^(p) - err) / |G^(p)|``, the
    signed value less its error estimate, relative to its size.
    """
    _require_le2(params, "the complete monotonicity check")
    if not 0 <= p_max <= 8:
        raise OutOfDomain("p_max", "0 <= p_max <= 8", p_max)
    _open_grid(grid)
    rep = PropertyReport(
        Property.COMPLETE_MONOTONICITY, params, grid, False, math.nan,
        thresholds={"p_max": p_max, "margin": "> 0", "quadrature_tol": tol},
    )
    margins = []
    for p in range(p_max + 1):
        for x in grid:
            v, err = g_deriv_with_error(params, x, p, tol)
            signed = (-1) ** p * v
            m = (signed - err) / abs(v) if v != 0 else -math.inf
            rec = {"p": p, "x": x, "value": v, "error": err, "margin": m}
            rep.details.append(rec)
            margins.append((m, rec))
    return _finish(rep, margins)


def check_positivity(params: KernelParams, grid: Grid, tol: float = 1e-10) -> PropertyReport:
    """``G > 0`` on the grid (the ``p = 0`` row of the complete monotonicity check)."""
    rep = PropertyReport(Property.POSITIVITY, params, grid, False, math.nan, thresholds={"margin": "> 0"})
    margins = []
    for x in grid:
        g = g_eval(params, x, tol=tol)
        m = (g.value - g.error_bound) / abs(g.value)
        rec = {"x": x, "value": g.value, "error": g.error_bound, "method": g.method.value, "margin": m}
        rep.details.append(rec)
        margins.append((m, rec))
    return _finish(rep, margins)


def check_unimodality(params: KernelParams, grid: Grid, tol: float = 1e-10) -> PropertyReport:
    """``G`` positive and decreasing along the grid.

    A step whose decrease is within the combined error bounds is recorded as
    inconclusive and does not fail the check; a certified increase does.
    """
    _require_le2(params, "the unimodality check")
    _open_grid(grid)
    rep = PropertyReport(
        Property.MONOTONE_DECREASE, params, grid, False, math.nan,
        thresholds={"positivity_margin": "> 0", "step_margin": "> 0", "tol": tol},
    )
    vals = [g_eval(params, x, tol=tol) for x in grid]
    scale = max(abs(g.value) for g in vals)
    margins = []
    inconclusive = 0
    for x, g in zip(grid, vals):
        m = (g.value - g.error_bound) / scale
        rec = {"kind": "positive", "x": x, "value": g.value, "error": g.error_bound, "margin": m}
        rep.details.append(rec)
        margins.append((m, rec))
    pts = list(grid)
    for i in range(len(vals) - 1):
        a, b = vals[i], vals[i + 1]
        drop = a.value - b.value
        bound = a.error_bound + b.error_bound
        status = "decrease" if drop > bound else ("inconclusive" if drop >= -bound else "increase")
        inconclusive += status == "inconclusive"
        # only a certified increase gives a nonpositive margin
        m = (drop + bound) / scale
        if status != "increase":
            m = max(m, math.ulp(1.0))
        rec = {"kind": "step", "x0": pts[i], "x1": pts[i + 1], "drop": drop, "bound": bound, "status": status, "margin": m}
        rep.details.append(rec)
        margins.append((m, rec))
    rep.thresholds["inconclusive_steps"] = inconclusive
    return _finish(rep, margins)


def _g_prime_at_pi(params: KernelParams) -> float:
    if params.is_alpha2:
        return g_deriv_with_error(params, math.pi, 1)[0]
    return g_prime_ml(params, math.pi)


def check_boundary_derivative(params: KernelParams, epsilons: Sequence[float] = (0.1, 0.01, 0.001)) -> PropertyReport:
    """``G'(pi) = 0`` exactly, and ``|G'(pi - eps)|`` decreasing as ``eps`` decreases."""
    _require_le2(params, "the boundary derivative check")
    eps = [float(e) for e in epsilons]
    if any(not 0 < e < 0.5 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise OutOfDomain("epsilons", "strictly decreasing values in (0, 0.5)", eps)
    rep = PropertyReport(
        Property.BOUNDARY_DERIVATIVE_ZERO, params, Grid.from_points(sorted(math.pi - e for e in eps)), False, math.nan,
        thresholds={"g_prime_at_pi": "== 0 exactly", "relative_drop": "> 0"},
    )
    at_pi = _g_prime_at_pi(params)
    rec0 = {"x": math.pi, "g_prime": at_pi}
    rep.details.append(rec0)
    margins = [(1.0 if at_pi == 0.0 else -math.inf, rec0)]
    mags = []
    for e in eps:
        v, err = g_deriv_with_error(params, math.pi - e, 1)
        mags.append(abs(v))
        rep.details.append({"eps": e, "g_prime": v, "error": err})
    for i in range(len(eps) - 1):
        drop = (mags[i] - mags[i + 1]) / mags[i] if mags[i] > 0 else -math.inf
        rec = {"eps0": eps[i], "eps1": eps[i + 1], "relative_drop": drop}
        margins.append((drop, rec))
    return _finish(rep, margins)


def _methods_for(params: KernelParams) -> List[Method]:
    ms = [Method.SERIES, Method.PERIODIZED, Method.ML_INTEGRAL]
    if params.is_alpha2:
        ms.append(Method.CLOSED_FORM2)
    return ms


def _eval_method(params, x, m: Method, tol):
    if m is Method.SERIES:
        return g_series(params, x, SeriesConfig(target_abs_tol=tol))
    if m is Method.PERIODIZED:
        return g_periodized(params, x, tol)
    if m is Method.ML_INTEGRAL:
        return g_ml(params, x, tol)
    return g_closed_alpha2(params.c, x)


def _minority(values: Dict[Method, float], allowed: Dict[Tuple[Method, Method], float]) -> Optional[str]:
    """The single method disagreeing with every other, all others agreeing."""
    ms = list(values)
    for m in ms:
        rest = [o for o in ms if o is not m]
        if len(rest) < 2:
            continue
        ok = lambda a, b: abs(values[a] - values[b]) <= allowed[(a, b) if (a, b) in allowed else (b, a)]
        if all(not ok(m, o) for o in rest) and all(ok(a, b) for a, b in combinations(rest, 2)):
            return m.value
    return None


def check_cross_method(params: KernelParams, grid: Grid, tol: float = 1e-6) -> PropertyReport:
    """Pairwise agreement of the deterministic evaluators.

    Each pair must agree within ``tol`` and within the sum of the two error
    bounds (plus a rounding floor).  A failing point names the minority
    method when the vote is three or more to one.
    """
    _require_le2(params, "the cross-method check")
    methods = _methods_for(params)
    eval_tol = min(1e-10, 0.01 * tol)
    rep = PropertyReport(
        Property.CROSS_METHOD_CONSISTENCY, params, grid, False, math.nan,
        thresholds={"tol": tol, "eval_tol": eval_tol, "methods": [m.value for m in methods]},
    )
    margins = []
    for x in grid:
        res = {m: _eval_method(params, x, m, eval_tol) for m in methods}
        vals = {m: r.value for m, r in res.items()}
        allowed = {}
        rec = {"x": x, "values": {m.value: r.value for m, r in res.items()},
               "errors": {m.value: r.error_bound for m, r in res.items()}, "pairs": []}
        worst = math.inf
        for a, b in combinations(methods, 2):
            d = abs(vals[a] - vals[b])
            floor = 64.0 * _EPS * max(abs(vals[a]), abs(vals[b]))
            lim = min(tol, res[a].error_bound + res[b].error_bound + floor)
            allowed[(a, b)] = lim
            m = (lim - d) / tol
            worst = min(worst, m)
            rec["pairs"].append({"a": a.value, "b": b.value, "diff": d, "allowed": lim})
        rec["margin"] = worst
        if worst <= 0:
            rec["minority"] = _minority(vals, allowed)
        rep.details.append(rec)
        margins.append((worst, rec))
    return _finish(rep, margins)


def check_normalization(params: KernelParams, n_nodes: int = 128, tol: Optional[float] = None, grading: int = 4) -> PropertyReport:
    """``int_{-pi}^{pi} G = 1/c`` by Gauss-Legendre in ``u`` with ``x = pi u^grading``.

    The grading turns the ``x^(alpha-1)`` behavior at the origin into a
    smooth enough power of ``u``.
    """
    if tol is None:
        tol = 1e-4 if params.alpha > 1 else 1e-3
    u, w = np.polynomial.legendre.leggauss(int(n_nodes))
    u = 0.5 * (u + 1.0)
    w = 0.5 * w
    xs = math.pi * u ** grading
    jac = grading * math.pi * u ** (grading - 1)
    vals = np.array([g_eval(params, x, tol=1e-12).value for x in xs])
    integral = 2.0 * float(np.sum(w * jac * vals))
    err = abs(integral - 1.0 / params.c)
    rep = PropertyReport(
        Property.NORMALIZATION, params, None, False, math.nan,
        thresholds={"tol": tol, "n_nodes": int(n_nodes), "grading": grading},
    )
    rec = {"integral": integral, "target": 1.0 / params.c, "abs_error": err}
    rep.details.append(rec)
    return _finish(rep, [((tol - err) / tol, rec)])


def sample_h_factorization(params: KernelParams, n_samples: int, rng: stochastic.RngStream) -> np.ndarray:
    """Draws of ``c^(-1/alpha) E X_alpha`` with ``E`` standard Laplace."""
    gen = rng.generator
    e = gen.standard_exponential(n_samples) * np.where(gen.random(n_samples) < 0.5, -1.0, 1.0)
    if params.is_alpha2:
        xa = np.ones(n_samples)
    else:
        xa = stochastic.sample_x_alpha(params.alpha, gen, n_samples)
    return params.c ** (-1.0 / params.alpha) * e * xa


def check_h_factorization(params: KernelParams, n_samples: int, rng: stochastic.RngStream, ks_threshold: float = 0.02) -> PropertyReport:
    """KS distance between the product draws and the CDF of ``c H(|y|)``."""
    _require_le2(params, "the factorization check")
    if n_samples < 10_000:
        raise OutOfDomain("n_samples", "n_samples >= 10000", n_samples)
    XAlphaLaw(params.alpha)
    y = sample_h_factorization(params, n_samples, rng)
    res = stats.kstest(y, lambda t: h_cdf(params, t))
    rep = PropertyReport(
        Property.H_FACTORIZATION, params, None, False, math.nan,
        thresholds={"ks_threshold": ks_threshold, "n_samples": n_samples, "seed": rng.seed, "stream_id": rng.stream_id},
    )
    rec = {"ks_statistic": float(res.statistic), "p_value": float(res.pvalue), "median": float(np.median(y))}
    rep.details.append(rec)
    return _finish(rep, [((ks_threshold - res.statistic) / ks_threshold, rec)])


def _certified(params, x, tol):
    """Series value with its rigorous bound, tightening the tolerance near zeros."""
    t = tol
    while True:
        g = g_series(params, x, SeriesConfig(target_abs_tol=t))
        if abs(g.value) > g.error_bound or t <= 1e-14:
            return g
        t *= 1e-2


def scan_zeros(params: KernelParams, resolution: int = 2000, tol: float = 1e-10, width: float = 1e-8) -> ZeroScanResult:
    """Certified sign changes of ``G`` on ``(0, pi]`` for ``2 <= alpha <= 4``.

    Points ``x_k = pi k / resolution`` are evaluated with the rigorous series
    bound; a point counts only if ``|G| > bound``.  Points where the series
    cannot certify the tolerance (near 0) are skipped and counted.  Each
    bracket is bisected on certified signs down to ``width``.
    """
    if not 2 <= params.alpha <= 4:
        raise OutOfDomain("alpha", "2 < alpha <= 4 (or exactly 2) for the zero scan", params.alpha)
    if resolution < 100:
        raise OutOfDomain("resolution", "resolution >= 100", resolution)
    if params.is_alpha2:
        return ZeroScanResult(2.0, params.c, 0, [], [], resolution, math.pi / resolution, 0)

    xs = math.pi * np.arange(1, resolution + 1) / resolution
    signs = []
    skipped = 0
    for x in xs:
        try:
            g = _certified(params, float(x), tol)
        except ToleranceUnreachable:
            skipped += 1
            continue
        if abs(g.value) > g.error_bound:
            signs.append((float(x), 1 if g.value > 0 else -1))
        else:
            skipped += 1

    brackets = []
    for (x0, s0), (x1, s1) in zip(signs, signs[1:]):
        if s0 != s1:
            brackets.append((x0, x1))

    roots = []
    for x0, x1 in brackets:
        lo, hi = x0, x1
        s_lo = next(s for x, s in signs if x == x0)
        while hi - lo > width:
            mid = 0.5 * (lo + hi)
            g = _certified(params, mid, tol)
            if abs(g.value) <= g.error_bound:
                break
            if (g.value > 0) == (s_lo > 0):
                lo = mid
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    first = signs[0][0] if signs else None
    return ZeroScanResult(params.alpha, params.c, len(brackets), brackets, roots, resolution, first, skipped)
