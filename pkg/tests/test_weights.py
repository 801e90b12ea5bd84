from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wpoincare import profiles as P
from wpoincare import warped as W
from wpoincare import weights as Wt
from wpoincare.errors import DegenerateError, DomainError, NoGreenFunctionError
from wpoincare.reproduce import euclidean_model, hyperbolic_model


@pytest.mark.parametrize("n", [3, 4, 5, 7])
def test_hardy_constant(n):
    w = Wt.hardy_weight(n)
    assert w(2.0) == pytest.approx((n - 2) ** 2 / 16.0, rel=1e-15)
    assert w.source == "hardy"


def test_hardy_rejects_low_dimension():
    with pytest.raises(DegenerateError):
        Wt.hardy_weight(2)


@pytest.mark.parametrize("n", [3, 4, 6])
@pytest.mark.parametrize("r", [0.1, 1.0, 30.0])
def test_hardy_certificate_is_exact(n, r):
    # h = r^{-(n-2)/2} solves Delta h + rho h = 0 on R^n
    h = P.power(-(n - 2) / 2.0)
    res = Wt.certificate_residual(h, Wt.hardy_weight(n), euclidean_model(n), r)
    scale = Wt.hardy_weight(n)(r) * h(r)
    assert abs(res) <= 1e-12 * scale


@pytest.mark.parametrize("n", [3, 4, 5])
def test_hardy_certificate_fails_for_scaled_weight(n):
    h = P.power(-(n - 2) / 2.0)
    res = Wt.certificate_residual(h, Wt.hardy_weight(n).scaled(1.2), euclidean_model(n), 1.0)
    assert res > 0


def test_certificate_needs_positive_function():
    with pytest.raises(DomainError):
        Wt.certificate_residual(P.constant(-1.0, 0.0), Wt.hardy_weight(3), euclidean_model(3), 1.0)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_cartan_hadamard_limit_and_monotone(n):
    w = Wt.cartan_hadamard_weight(n)
    r = np.linspace(0.05, 40.0, 400)
    v = w.rho.values(r)
    assert np.all(np.diff(v) <= 0)
    assert np.all(v >= (n - 1) ** 2 / 4.0)
    assert v[-1] == pytest.approx((n - 1) ** 2 / 4.0, rel=1e-12)
    np.testing.assert_allclose(w.rho.derivative_values(r[:50]),
                               [P.derivative(P.ScalarProfile(w.rho.fn, 0.0), float(t)) for t in r[:50]],
                               rtol=1e-6)


@pytest.mark.parametrize("r", [0.3, 1.0, 4.0])
def test_green_weight_on_h3_closed_form(r):
    # A = 4 pi sinh^2, int_r^inf A^-1 = (coth r - 1) / 4 pi
    expected = math.sinh(r) ** -4 / (4.0 * (1.0 / math.tanh(r) - 1.0) ** 2)
    got = Wt.green_weight_model(hyperbolic_model(3))(r)
    assert got == pytest.approx(expected, rel=1e-8)


def test_green_weight_on_parabolic_model_raises():
    m = W.WarpedModel(3, P.constant(1.0))
    with pytest.raises(NoGreenFunctionError):
        Wt.green_weight_model(m)


@pytest.mark.parametrize("n", [3, 5])
def test_minimal_weight_with_radial_distance_is_hardy(n):
    mw = Wt.minimal_weight(n, P.identity())
    hw = Wt.hardy_weight(n)
    r = np.linspace(0.1, 10.0, 25)
    np.testing.assert_allclose(mw.rho.values(r), hw.rho.values(r), rtol=1e-14)
    np.testing.assert_allclose(mw.rho.derivative_values(r, 2), hw.rho.derivative_values(r, 2), rtol=1e-12)


def test_minimal_weight_rejects_zero_distance():
    w = Wt.minimal_weight(3, P.identity())
    with pytest.raises(DomainError):
        w.rho.fn(np.array([0.0, 1.0]))


@settings(max_examples=50, deadline=None)
@given(c=st.floats(0.01, 100.0), r=st.floats(0.01, 100.0))
def test_scaling_is_linear(c, r):
    w = Wt.hardy_weight(4)
    assert w.scaled(c)(r) == pytest.approx(c * w(r), rel=1e-14)
    assert w.scaled(c).sqrt_profile()(r) == pytest.approx(math.sqrt(c * w(r)), rel=1e-14)
