import math

import numpy as np
import pytest
from scipy.special import gamma

from fracgreen import quadrature
from fracgreen.core import NumericalInstability


@pytest.mark.parametrize(
    "f,a,b,exact",
    [
        (lambda x: x ** -0.5, 0.0, 1.0, 2.0),
        (lambda x: x ** -0.9, 0.0, 1.0, 10.0),
        (lambda x: np.log(x), 0.0, 1.0, -1.0),
        (lambda x: np.sqrt(1 - x * x), -1.0, 1.0, 0.5 * math.pi),
    ],
)
def test_tanh_sinh_endpoint_singularities(f, a, b, exact):
    v, err = quadrature.tanh_sinh(f, a, b)
    assert abs(v - exact) < 1e-11 * max(1.0, abs(exact))
    assert err < 1e-10


@pytest.mark.parametrize(
    "f,scale,exact",
    [
        (lambda t: t ** -0.7 * np.exp(-t), 1.0, gamma(0.3)),
        (lambda t: 1.0 / (1.0 + t * t), 1.0, 0.5 * math.pi),
        (lambda t: np.exp(-t / 50.0), 50.0, 50.0),
    ],
)
def test_exp_sinh(f, scale, exact):
    v, _ = quadrature.exp_sinh(f, 0.0, scale=scale)
    assert v == pytest.approx(exact, rel=1e-11)


def test_batch_matches_scalar():
    b = np.array([0.5, 1.0, 2.0])
    vals, errs = quadrature.batch(quadrature.tanh_sinh_rule(np.zeros(3), b, 7), lambda x: x ** 2, 7)
    np.testing.assert_allclose(vals, b ** 3 / 3, rtol=1e-13)
    assert np.all(errs < 1e-12)


def test_failure_raises():
    with pytest.raises(NumericalInstability):
        quadrature.tanh_sinh(lambda x: np.sin(1.0 / x), 0.0, 1.0, max_level=6)
