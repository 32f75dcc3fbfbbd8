import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helmfds.errors import DomainError
from helmfds.specfun import bessel_j, bessel_j01, bessel_jy01, bessel_y, hankel01, hankel1
from oracles import bessel_reference


def test_values_at_origin():
    assert bessel_j(0, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert bessel_j(1, 0.0) == 0.0


@pytest.mark.parametrize("order, func, x, expected", [
    (0, bessel_j, 1.0, 0.7651976865579666),
    (0, bessel_y, 1.0, 0.0882569642156769),
    (1, bessel_y, 1.0, -0.7812128213002887),
    (1, bessel_j, 1.0, 0.4400505857449335),
])
def test_tabulated_values(order, func, x, expected):
    assert abs(func(order, x) - expected) <= 1e-14 * max(1.0, abs(expected))


def test_tabulated_values_match_series_oracle():
    ref = bessel_reference(1.0)
    assert ref[0] == pytest.approx(0.7651976865579666, abs=1e-16)
    assert ref[2] == pytest.approx(0.0882569642156769, abs=1e-16)
    assert ref[3] == pytest.approx(-0.7812128213002887, abs=1e-16)


def test_hankel_examples():
    h0 = hankel1(0, 1.0)
    h1 = hankel1(1, 1.0)
    assert abs(h0 - (0.7651976865579666 + 0.0882569642156769j)) < 1e-14
    assert abs(h1 - (0.4400505857449335 - 0.7812128213002887j)) < 1e-14


@pytest.mark.parametrize("x", [1e-3, 0.3, 2.0, 7.99, 8.0, 8.01, 15.0, 77.7, 500.0])
def test_hankel_is_j_plus_iy(x):
    for order in (0, 1):
        h = hankel1(order, x)
        assert h.real == bessel_j(order, x)
        assert h.imag == bessel_y(order, x)


def test_wronskian_example():
    x = 2.5
    w = bessel_j(1, x) * bessel_y(0, x) - bessel_j(0, x) * bessel_y(1, x)
    assert abs(w - 2.0 / (math.pi * x)) < 1e-13


def test_wronskian_on_log_grid():
    x = np.geomspace(1e-6, 1e3, 2001)
    j0, j1, y0, y1 = bessel_jy01(x)
    w = j1 * y0 - j0 * y1
    ref = 2.0 / (np.pi * x)
    assert np.max(np.abs(w - ref) / ref) < 1e-12


def test_derivative_of_j0_is_minus_j1():
    x = np.linspace(0.1, 50.0, 997)
    h = 1e-6
    j0p, _ = bessel_j01(x + h)
    j0m, _ = bessel_j01(x - h)
    _, j1 = bessel_j01(x)
    assert np.max(np.abs((j0p - j0m) / (2 * h) + j1)) < 1e-8


def _check_against_oracle(x):
    ref = np.array(bessel_reference(x))
    got = np.array([v[0] for v in bessel_jy01(np.array([x]))])
    # Pointwise bound of the functions' accuracy contract.
    assert np.all(np.abs(got - ref) <= 1e-14 * np.maximum(1.0, np.abs(ref)))
    # Relative to the Hankel modulus |H_nu| (plain relative error is
    # meaningless at the zeros of J and Y).
    h0, h1 = math.hypot(ref[0], ref[2]), math.hypot(ref[1], ref[3])
    env = np.array([h0, h1, h0, h1])
    assert np.all(np.abs(got - ref) <= 1e-13 * env)


@pytest.mark.parametrize("x", np.concatenate([np.geomspace(1e-6, 1e3, 61),
                                              [7.999999, 8.0, 8.000001, 12.0, 30.0, 30.5]]))
def test_against_series_oracle_grid(x):
    _check_against_oracle(float(x))


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=1e-6, max_value=1e3, allow_nan=False))
def test_against_series_oracle_random(x):
    _check_against_oracle(x)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=1e-3, max_value=200.0))
def test_array_and_scalar_paths_agree(x):
    arr = np.array([x, 2 * x])
    h0, h1 = hankel01(arr)
    assert h0[0] == hankel1(0, x)
    assert h1[1] == hankel1(1, 2 * x)


def test_shapes_are_preserved():
    x = np.linspace(0.5, 20, 12).reshape(3, 4)
    assert bessel_j(0, x).shape == (3, 4)
    assert isinstance(bessel_j(0, 1.0), float)
    assert isinstance(hankel1(1, 1.0), complex)


@pytest.mark.parametrize("bad", [-1.0, float("nan"), float("inf")])
def test_domain_errors_j(bad):
    with pytest.raises(DomainError):
        bessel_j(0, bad)


@pytest.mark.parametrize("bad", [0.0, -2.0, float("nan")])
def test_domain_errors_y_and_h(bad):
    with pytest.raises(DomainError):
        bessel_y(0, bad)
    with pytest.raises(DomainError):
        hankel1(1, bad)


def test_unsupported_order():
    with pytest.raises(DomainError):
        bessel_j(2, 1.0)


def test_y0_diverges_logarithmically():
    assert bessel_y(0, 1e-300) < -400.0
