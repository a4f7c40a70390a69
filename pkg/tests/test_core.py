import math

import pytest
from hypothesis import given, strategies as st

from fracgreen.core import (
    ALPHA2_SNAP,
    GreenValue,
    Grid,
    KernelParams,
    Method,
    OutOfDomain,
    validate,
)


def test_validate_examples():
    with pytest.raises(OutOfDomain):
        validate(KernelParams(2.5, 1), Method.PERIODIZED)
    validate(KernelParams(2.5, 1), Method.SERIES)
    with pytest.raises(OutOfDomain):
        validate(KernelParams(1.2, 1), Method.MC_POISSON)


def test_validity_table():
    ranges = {
        Method.SERIES: 4.0,
        Method.PERIODIZED: 2.0,
        Method.ML_INTEGRAL: 2.0,
        Method.MC_JTP: 2.0,
        Method.MC_POISSON: 1.0,
    }
    for m, hi in ranges.items():
        validate(KernelParams(hi, 1), m)
        if hi < 4:
            with pytest.raises(OutOfDomain):
                validate(KernelParams(hi + 0.01, 1), m)
    validate(KernelParams(2, 3), Method.CLOSED_FORM2)
    with pytest.raises(OutOfDomain):
        validate(KernelParams(1.99, 3), Method.CLOSED_FORM2)


@given(st.floats(0.01, 4.0), st.floats(0.01, 100.0), st.sampled_from(list(Method)))
def test_validate_is_total_and_pure(alpha, c, method):
    p = KernelParams(alpha, c)
    outcomes = []
    for _ in range(2):
        try:
            validate(p, method)
            outcomes.append(None)
        except OutOfDomain as exc:
            outcomes.append(str(exc))
    assert outcomes[0] == outcomes[1]


@pytest.mark.parametrize("alpha,c", [(0, 1), (-1, 1), (4.1, 1), (1, 0), (1, -2), (math.nan, 1), (1, math.inf)])
def test_params_rejected(alpha, c):
    with pytest.raises(OutOfDomain):
        KernelParams(alpha, c)


def test_alpha_snaps_to_exact_two():
    assert KernelParams(2.0 + 1e-9, 1).alpha == 2.0
    assert KernelParams("2", 1).is_alpha2
    assert KernelParams(2.0 - 0.5 * ALPHA2_SNAP, 1).is_alpha2
    assert not KernelParams(2.0 - 2 * ALPHA2_SNAP, 1).is_alpha2
    p = KernelParams(1.5, 2)
    assert p.beta == 0.75 and p.gamma == 0.375


def test_method_parse_aliases():
    assert Method.parse("ml") is Method.ML_INTEGRAL
    assert Method.parse("Closed-Form2") is Method.CLOSED_FORM2
    with pytest.raises(ValueError):
        Method.parse("bogus")


def test_green_value_invariants():
    with pytest.raises(ValueError):
        GreenValue(1.0, -1e-3, Method.SERIES)
    assert float(GreenValue(0.25, 0.0, Method.SERIES, True)) == 0.25


def test_grid():
    g = Grid.interior(4)
    assert len(g) == 4 and g.spacing == pytest.approx(math.pi / 5)
    assert max(g) < math.pi
    assert Grid.from_points([0.5, 1.0, math.pi]).spacing is None
    for bad in ([], [0.0, 1.0], [1.0, 0.5], [1.0, 4.0]):
        with pytest.raises(ValueError):
            Grid(tuple(bad))
