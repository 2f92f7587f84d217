import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gibbsbound.klscalar import binary_kl, binary_kl_inverse


def test_identity_is_zero():
    assert binary_kl(0.5, 0.5) == 0.0
    assert binary_kl(0.0, 0.0) == 0.0
    assert binary_kl(1.0, 1.0) == 0.0


def test_p_zero_collapses_to_log_survival():
    assert math.isclose(binary_kl(0.0, 0.5), math.log(2.0), rel_tol=1e-14)


def test_two_term_formula_value():
    # 0.1 ln(1/3) + 0.9 ln(9/7), evaluated directly
    expected = 0.1 * math.log(0.1 / 0.3) + 0.9 * math.log(0.9 / 0.7)
    assert math.isclose(binary_kl(0.1, 0.3), expected, rel_tol=1e-15)
    assert math.isclose(expected, 0.116322, abs_tol=5e-7)


def test_boundary_disagreement_is_infinite():
    assert binary_kl(0.3, 0.0) == math.inf
    assert binary_kl(0.3, 1.0) == math.inf
    assert binary_kl(0.0, 1.0) == math.inf


def test_domain_validation():
    with pytest.raises(ValueError):
        binary_kl(-0.1, 0.5)
    with pytest.raises(ValueError):
        binary_kl_inverse(0.5, -1.0)


def test_inverse_at_zero_budget_returns_p():
    for p in (0.0, 0.25, 0.9, 1.0):
        assert binary_kl_inverse(p, 0.0) == p


def test_inverse_analytic_branch():
    # kl(0, q) = -ln(1 - q), so the inverse of ln 2 is exactly 1/2
    assert math.isclose(binary_kl_inverse(0.0, math.log(2.0)), 0.5, abs_tol=1e-11)


def test_inverse_round_trips_the_forward_example():
    t = binary_kl(0.1, 0.3)
    assert math.isclose(binary_kl_inverse(0.1, t), 0.3, abs_tol=1e-9)


def test_huge_budget_saturates_to_one():
    assert binary_kl_inverse(0.5, 1e6) == 1.0
    assert binary_kl_inverse(1.0, 0.5) == 1.0


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 0.99), st.floats(0.0, 3.0))
def test_round_trip_property(p, t):
    q = binary_kl_inverse(p, t)
    if q < 1.0:
        assert abs(binary_kl(p, q) - t) <= 1e-9


def test_monotone_in_both_arguments_on_grid():
    ps = np.linspace(0.0, 0.99, 100)
    ts = np.linspace(0.0, 3.0, 100)
    table = np.array([[binary_kl_inverse(p, t) for t in ts] for p in ps])
    assert np.all(np.diff(table, axis=0) >= 0.0)
    assert np.all(np.diff(table, axis=1) >= 0.0)


def test_convex_in_q_for_fixed_p():
    # finite-difference second derivative stays nonnegative on (0, 1)
    qs = np.linspace(0.01, 0.99, 197)
    h = qs[1] - qs[0]
    for p in (0.0, 0.2, 0.5, 0.93):
        vals = np.array([binary_kl(p, q) for q in qs])
        second = (vals[2:] - 2.0 * vals[1:-1] + vals[:-2]) / h**2
        assert second.min() >= -1e-9
