import math

import numpy as np
import pytest

from fracgreen import analysis
from fracgreen.analysis import (
    Property,
    check_boundary_derivative,
    check_complete_monotonicity,
    check_cross_method,
    check_h_factorization,
    check_normalization,
    check_positivity,
    check_unimodality,
    sample_h_factorization,
    scan_zeros,
)
from fracgreen.core import Grid, GreenValue, KernelParams, Method, OutOfDomain
from fracgreen.periodic_green import SeriesConfig, g_series
from fracgreen.stochastic import RngStream

G20 = Grid.interior(20)


def test_cm_examples():
    rep = check_complete_monotonicity(KernelParams(1, 1), G20, 6)
    assert rep.passed and rep.worst_margin > 0
    assert rep.name == "CompleteMonotonicity(6)"
    assert check_complete_monotonicity(KernelParams(2, 1), G20, 6).passed


def test_cm_row_zero_is_positivity():
    p = KernelParams(1.5, 0.5)
    cm = check_complete_monotonicity(p, G20, 0)
    pos = check_positivity(p, G20)
    assert cm.passed and pos.passed
    for a, b in zip(cm.details, pos.details):
        assert a["value"] == pytest.approx(b["value"], abs=1e-9)


def test_cm_domain():
    with pytest.raises(OutOfDomain):
        check_complete_monotonicity(KernelParams(2.5, 1), G20, 6)
    with pytest.raises(OutOfDomain):
        check_complete_monotonicity(KernelParams(1, 1), G20, 9)
    with pytest.raises(OutOfDomain):
        check_complete_monotonicity(KernelParams(1, 1), Grid.from_points([1.0, math.pi]), 2)


def test_boundary_examples():
    rep = check_boundary_derivative(KernelParams(1, 1), [0.1, 0.01, 0.001])
    assert rep.passed
    mags = [abs(d["g_prime"]) for d in rep.details if "eps" in d]
    assert mags[0] > mags[1] > mags[2]
    rep2 = check_boundary_derivative(KernelParams(2, 1))
    assert rep2.passed and rep2.details[0]["g_prime"] == 0.0
    with pytest.raises(OutOfDomain):
        check_boundary_derivative(KernelParams(1, 1), [0.01, 0.1])


@pytest.mark.parametrize("alpha,c", [(1.5, 1.0), (0.5, 0.25), (2.0, 4.0)])
def test_cross_method_examples(alpha, c):
    rep = check_cross_method(KernelParams(alpha, c), Grid.interior(10), 1e-6)
    assert rep.passed
    if alpha == 2:
        for d in rep.details:
            v = d["values"]
            assert abs(v["Series"] - v["ClosedForm2"]) <= 1e-10


def test_cross_method_names_minority(monkeypatch):
    real = analysis._eval_method

    def broken(params, x, m, tol):
        g = real(params, x, m, tol)
        if m is Method.ML_INTEGRAL:
            return GreenValue(g.value + 1e-3, g.error_bound, g.method)
        return g

    monkeypatch.setattr(analysis, "_eval_method", broken)
    rep = check_cross_method(KernelParams(1.0, 1.0), Grid.interior(3), 1e-6)
    assert not rep.passed
    assert rep.witness["minority"] == "MlIntegral"
    assert "witness" in rep.summary()


def test_unimodality_examples():
    assert check_unimodality(KernelParams(0.5, 1), Grid.interior(100)).passed
    assert check_unimodality(KernelParams(2, 4), Grid.interior(100)).passed
    assert check_unimodality(KernelParams(1, 0.25), Grid.interior(100)).passed


@pytest.mark.parametrize("alpha,c", [(1.5, 1), (2, 4), (0.8, 1), (0.5, 2)])
def test_normalization(alpha, c):
    rep = check_normalization(KernelParams(alpha, c))
    assert rep.passed
    assert rep.details[0]["abs_error"] < 1e-8


@pytest.mark.parametrize("alpha", [1.0, 2.0])
def test_factorization_examples(alpha):
    p = KernelParams(alpha, 1)
    rep = check_h_factorization(p, 10_000, RngStream(42), 0.02)
    assert rep.passed and rep.property is Property.H_FACTORIZATION
    assert abs(rep.details[0]["median"]) < 0.05


def test_factorization_reproducible():
    p = KernelParams(0.7, 2.0)
    a = sample_h_factorization(p, 1000, RngStream(5))
    b = sample_h_factorization(p, 1000, RngStream(5))
    assert np.array_equal(a, b)
    with pytest.raises(OutOfDomain):
        check_h_factorization(p, 100, RngStream(5))


def test_zero_scan_alpha2():
    assert scan_zeros(KernelParams(2, 1), 2000).sign_changes == 0
    r = scan_zeros(KernelParams(2.0 + 1e-9, 1), 500)
    assert r.alpha == 2.0 and r.sign_changes == 0
    with pytest.raises(OutOfDomain):
        scan_zeros(KernelParams(1.5, 1), 500)
    with pytest.raises(OutOfDomain):
        scan_zeros(KernelParams(3, 1), 50)


def test_zero_scan_brackets_are_certified():
    p = KernelParams(3, 4)
    r = scan_zeros(p, 400)
    assert r.sign_changes == 1
    for (lo, hi), root in zip(r.bracketing_intervals, r.refined_roots):
        a = g_series(p, lo, SeriesConfig(1e-10))
        b = g_series(p, hi, SeriesConfig(1e-10))
        assert abs(a.value) > a.error_bound and abs(b.value) > b.error_bound
        assert a.value * b.value < 0
        assert lo < root < hi
        left = g_series(p, root - 1e-7, SeriesConfig(1e-12)).value
        right = g_series(p, root + 1e-7, SeriesConfig(1e-12)).value
        assert left * right < 0


def test_report_serialization():
    rep = check_boundary_derivative(KernelParams(1, 1))
    d = rep.to_dict()
    assert d["property"] == "BoundaryDerivativeZero" and d["pass"] is True
