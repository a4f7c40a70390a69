import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from fracgreen.core import OutOfDomain
from fracgreen.mittag_leffler import (
    DEFAULT_CONFIG,
    REGIME_ASYMPTOTIC,
    REGIME_INTEGRAL,
    REGIME_SERIES,
    MlRegimeConfig,
    ml_eval,
    ml_eval_with_error,
    y_density,
)

# E_{a,b}(z) from the defining series summed at 60 digits with mpmath
MPMATH_VALUES = [
    (0.5, 0.5, -3.0, 0.02718613000358644),
    (0.8, 0.8, -15.0, 0.0009223128515477956),
    (1.5, 1.5, -7.0, -0.06494421720286599),
    (1.7, 1.7, -40.0, 0.01532622726527064),
    (0.3, 0.3, -2.0, 0.03206239921884749),
    (1.2, 1.0, -25.0, -0.007549365133334412),
]


def test_unit_examples():
    assert ml_eval(1, 1, -1) == pytest.approx(math.exp(-1), abs=1e-14)
    assert abs(ml_eval(2, 2, -math.pi ** 2)) < 1e-12
    assert ml_eval(0.5, 0.5, 0.0) == pytest.approx(1 / math.sqrt(math.pi), abs=1e-15)


@pytest.mark.parametrize("a,b,z,expected", MPMATH_VALUES)
def test_against_high_precision_series(a, b, z, expected):
    assert ml_eval(a, b, z) == pytest.approx(expected, abs=1e-12)


def test_exponential_identity():
    z = np.linspace(-30, 0, 601)
    assert np.max(np.abs(ml_eval(1, 1, z) - np.exp(z))) < 1e-12


def test_sine_identity():
    x = np.linspace(0.01, 10, 1000)
    assert np.max(np.abs(ml_eval(2, 2, -x * x) * x - np.sin(x))) < 1e-10


def test_all_regimes_reached():
    z = np.array([-1.0, -8.0, -50.0])
    _, _, reg = ml_eval_with_error(0.5, 0.5, z)
    assert reg.tolist() == [REGIME_SERIES, REGIME_INTEGRAL, REGIME_ASYMPTOTIC]


@pytest.mark.parametrize("alpha", [0.5, 0.8, 1.0])
def test_regime_consistency(alpha):
    z = -np.logspace(-1, 2, 40)
    small = MlRegimeConfig(series_radius=1.0)
    big = MlRegimeConfig(series_radius=40.0)
    a = ml_eval(alpha, alpha, z, small)
    b = ml_eval(alpha, alpha, z, big)
    assert np.max(np.abs(a - b)) <= 10 * DEFAULT_CONFIG.target_abs_tol


@given(st.floats(0.3, 2.0), st.floats(-60.0, -0.01))
def test_error_estimates_are_small(alpha, z):
    _, err, _ = ml_eval_with_error(alpha, alpha, np.array([z]))
    assert err[0] <= DEFAULT_CONFIG.target_abs_tol


def test_domain_errors():
    with pytest.raises(OutOfDomain):
        ml_eval(2.5, 1, -1)
    with pytest.raises(OutOfDomain):
        ml_eval(1, 0, -1)
    with pytest.raises(OutOfDomain):
        ml_eval(0.5, 0.5, 50.0)


def test_y_density_examples():
    assert y_density(1, 2, 1.0) == pytest.approx(2 * math.exp(-2), abs=1e-14)
    t = 1e-10
    assert math.sqrt(t) * y_density(0.5, 1, t) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-4)
    assert np.all(y_density(0.7, 1.3, np.logspace(-3, 3, 50)) > 0)


def _laplace(alpha, c, n):
    # y_density = t^(alpha-1) * smooth(t); the power goes into the algebraic weight
    smooth = lambda t: math.exp(-n * t) * c * ml_eval(alpha, alpha, -c * t ** alpha)
    head, _ = integrate.quad(smooth, 0, 1, weight="alg", wvar=(alpha - 1, 0), epsabs=1e-13, epsrel=1e-12)
    tail, _ = integrate.quad(lambda t: math.exp(-n * t) * y_density(alpha, c, t), 1, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
    return head + tail


@pytest.mark.parametrize("alpha", [0.5, 1.5])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_laplace_identity(alpha, n):
    # y_density / c integrates against e^{-nt} to 1/(c + n^alpha)
    assert _laplace(alpha, 1.0, n) == pytest.approx(1 / (1 + n ** alpha), abs=1e-7)


def test_y_density_is_probability_density():
    head, _ = integrate.quad(lambda t: ml_eval(0.5, 0.5, -math.sqrt(t)), 0, 1, weight="alg", wvar=(-0.5, 0))
    # algebraic tail ~ t^{-3/2}: integrate in u = t^{-1/2}
    tail, _ = integrate.quad(lambda u: y_density(0.5, 1, u ** -2) * 2 * u ** -3, 0, 1, epsabs=1e-12, limit=200)
    assert head + tail == pytest.approx(1.0, abs=1e-7)
