import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from annealbench.errors import UsageError
from annealbench.schedules import (
    check_flatness,
    compose,
    cosine_sq,
    grover_optimal,
    parse_schedule,
    polynomial,
)

ALL_NAMES = ["f1", "f2", "f3", "f4", "cossq", "opt:64", "opt2:64", "opt3:16", "opt4:256"]
unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


def central_difference(f, s, order, h=1e-3):
    """Higher-order central differences, evaluated inside [0, 1]."""
    stencils = {
        1: ([-2, -1, 1, 2], [1 / 12, -2 / 3, 2 / 3, -1 / 12]),
        2: ([-2, -1, 0, 1, 2], [-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12]),
        3: ([-3, -2, -1, 1, 2, 3], [1 / 8, -1, 13 / 8, -13 / 8, 1, -1 / 8]),
        4: ([-3, -2, -1, 0, 1, 2, 3], [-1 / 6, 2, -13 / 2, 28 / 3, -13 / 2, 2, -1 / 6]),
    }
    offs, w = stencils[order]
    return sum(c * f(s + k * h) for k, c in zip(offs, w)) / h**order


@pytest.mark.parametrize("name", ALL_NAMES)
@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_derivatives_match_finite_differences(name, order):
    sched = parse_schedule(name)
    for s in (0.2, 0.37, 0.5, 0.81):
        analytic = sched.deriv(s, order)
        numeric = central_difference(sched, s, order)
        assert abs(analytic - numeric) <= 1e-4 * max(1.0, abs(analytic)) * 10**order


@pytest.mark.parametrize(
    "name,s,order,expected",
    [
        ("f1", 0.0, 1, 1.0),
        ("f2", 0.0, 2, 6.0),
        ("f2", 1.0, 2, -6.0),
        ("f3", 0.0, 3, 60.0),
        ("f3", 1.0, 3, 60.0),
        ("f4", 0.0, 4, 840.0),
        ("f4", 1.0, 4, -840.0),
        ("f2", 0.5, 1, 1.5),
        ("f3", 0.5, 1, 1.875),
        ("f4", 0.5, 1, 2.1875),
        ("cossq", 0.0, 2, 0.0),
        ("cossq", 0.0, 4, 6 * math.pi**2),
        ("cossq", 1.0, 1, 0.0),
        ("cossq", 1.0, 2, -2 * math.pi**2),
        ("opt:64", 0.0, 1, 64.0),
        ("opt:64", 0.5, 1, 0.125),
        ("opt2:64", 0.0, 2, 384.0),
        ("opt2:64", 0.5, 1, 0.1875),
    ],
)
def test_derivative_table(name, s, order, expected):
    assert parse_schedule(name).deriv(s, order) == pytest.approx(expected, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_flatness_order(m):
    f = polynomial(m)
    assert check_flatness(f, m)
    assert not check_flatness(f, m + 1)


def test_flatness_of_other_families():
    # f' vanishes at both ends, f'' only at s = 0
    assert check_flatness(cosine_sq(), 2)
    assert not check_flatness(cosine_sq(), 3)
    assert not check_flatness(grover_optimal(64), 2)
    for m in (2, 3, 4):
        assert check_flatness(parse_schedule(f"opt{m}:64"), m)


@pytest.mark.parametrize("name", ALL_NAMES)
def test_endpoints_and_monotone(name):
    f = parse_schedule(name)
    assert f(0.0) == pytest.approx(0.0, abs=1e-15)
    assert f(1.0) == pytest.approx(1.0, abs=1e-15)
    vals = f(np.linspace(0, 1, 2001))
    assert np.all(np.diff(vals) >= -1e-15)


@settings(max_examples=200, deadline=None)
@given(unit, st.sampled_from([1, 2, 3, 4]))
def test_polynomial_symmetry(s, m):
    f = polynomial(m)
    assert f(s) + f(1 - s) == pytest.approx(1.0, abs=1e-13)


@settings(max_examples=100, deadline=None)
@given(unit, st.sampled_from([16, 64, 256]))
def test_grover_schedule_symmetry(s, n):
    f = grover_optimal(n)
    assert f(s) + f(1 - s) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(unit, st.sampled_from([2, 3, 4]))
def test_composition_chain_rule(s, m):
    outer, inner = grover_optimal(64), polynomial(m)
    comp = compose(outer, inner)
    assert comp(s) == pytest.approx(outer(inner(s)), abs=1e-13)
    expect = outer.deriv(inner(s), 1) * inner.deriv(s, 1)
    assert comp.deriv(s, 1) == pytest.approx(expect, rel=1e-10, abs=1e-10)
    expect2 = outer.deriv(inner(s), 2) * inner.deriv(s, 1) ** 2 + outer.deriv(inner(s), 1) * inner.deriv(s, 2)
    assert comp.deriv(s, 2) == pytest.approx(expect2, rel=1e-9, abs=1e-8)


def test_grover_optimal_satisfies_gap_relation():
    n = 64
    f = grover_optimal(n)
    s = np.linspace(0, 1, 101)
    gap = np.sqrt(1 - 4 * (n - 1) / n * f(s) * (1 - f(s)))
    np.testing.assert_allclose(f.deriv(s, 1), n * gap**3, rtol=1e-12)


def test_out_of_range_and_order_errors():
    f = polynomial(2)
    with pytest.raises(UsageError):
        f(1.5)
    with pytest.raises(UsageError):
        f(np.array([0.5, -0.1]))
    with pytest.raises(UsageError):
        f.deriv(0.5, 0)
    with pytest.raises(UsageError):
        f.deriv(0.5, 7)
    with pytest.raises(UsageError):
        check_flatness(f, 7)


def test_invalid_constructor_arguments():
    with pytest.raises(UsageError):
        polynomial(5)
    with pytest.raises(UsageError):
        grover_optimal(1)


@pytest.mark.parametrize("bad", ["f5", "opt", "opt:x", "opt9:64", "cos", ""])
def test_parse_rejects(bad):
    with pytest.raises(UsageError):
        parse_schedule(bad)


def test_parse_names_round_trip():
    for name in ALL_NAMES:
        assert parse_schedule(name).name == name


def test_vectorized_matches_scalar():
    f = parse_schedule("opt3:64")
    s = np.linspace(0, 1, 17)
    np.testing.assert_allclose(f(s), [f(float(x)) for x in s], rtol=0, atol=0)
