from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wpoincare import profiles as P
from wpoincare.errors import DomainError


def test_evaluate_outside_domain_raises():
    p = P.power(2.0, t_lo=1.0, t_hi=2.0)
    with pytest.raises(DomainError):
        p(3.0)


@pytest.mark.parametrize("t", [0.3, 1.0, 2.5])
def test_finite_difference_matches_analytic(t):
    exact = P.exponential(0.7)
    fd = P.ScalarProfile(lambda s: np.exp(0.7 * np.asarray(s)))
    assert fd.derivative_mode == "finite-difference"
    assert math.isclose(P.derivative(fd, t, 1), P.derivative(exact, t, 1), rel_tol=1e-8)
    assert math.isclose(P.derivative(fd, t, 2), P.derivative(exact, t, 2), rel_tol=1e-5)


def test_integrate_against_closed_form():
    assert math.isclose(P.integrate(P.cosh(), 0.0, 2.0), math.sinh(2.0), rel_tol=1e-12)
    assert math.isclose(P.integrate(P.power(-2.0), 1.0, 10.0), 0.9, rel_tol=1e-12)


@pytest.mark.parametrize("p", [2.0, 3.0])
def test_improper_tail_converges_power(p):
    # int_{1000}^inf t^-p dt = 1000^(1-p) / (p - 1)
    res = P.improper_tail(P.power(-p), 1000.0)
    assert res.status == "converges"
    assert math.isclose(res.value, 1000.0 ** (1 - p) / (p - 1), rel_tol=1e-6)


def test_improper_tail_converges_exponential():
    res = P.improper_tail(P.exponential(-1.0), 1.0)
    assert res.converges
    assert math.isclose(res.value, math.exp(-1.0), rel_tol=1e-8)


@pytest.mark.parametrize("p", [P.power(-1.0), P.constant(1.0, 0.0), P.power(-0.5)])
def test_improper_tail_diverges(p):
    assert P.improper_tail(p, 1.0).status == "diverges"


def test_improper_tail_log_borderline_is_not_called_convergent():
    # 1/(t log^2 t) converges, 1/(t log t) diverges; neither may be misreported
    slow = P.ScalarProfile(lambda t: 1.0 / (np.asarray(t) * np.log(t)), 2.0)
    assert P.improper_tail(slow, 3.0).status in ("diverges", "inconclusive")
    fast = P.ScalarProfile(lambda t: 1.0 / (np.asarray(t) * np.log(t) ** 2), 2.0)
    res = P.improper_tail(fast, 3.0)
    assert res.status in ("converges", "inconclusive")
    if res.converges:
        assert math.isclose(res.value, 1.0 / math.log(3.0), rel_tol=1e-2)


def test_from_samples_and_csv_roundtrip(tmp_path):
    ts = np.linspace(0.0, 2.0, 81)
    path = tmp_path / "eta.csv"
    path.write_text("t,eta\n" + "".join(f"{t:.17g},{math.sinh(t):.17g}\n" for t in ts))
    prof = P.from_csv(path)
    x = np.linspace(0.01, 1.99, 37)
    np.testing.assert_allclose(prof.values(x), np.sinh(x), rtol=1e-4, atol=1e-6)


def test_from_csv_reports_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,v\n0,1\n1,2\n1,3\n")
    with pytest.raises(ValueError, match=r"bad.csv:4"):
        P.from_csv(path)


def test_from_hermite_reproduces_cubic():
    ts = np.linspace(-1.0, 1.0, 5)
    prof = P.from_hermite(ts, ts**3, 3 * ts**2)
    x = np.linspace(-1.0, 1.0, 17)
    np.testing.assert_allclose(prof.values(x), x**3, atol=1e-14)


def test_builtin_lookup():
    assert P.builtin("cosh")(0.0) == 1.0
    assert P.builtin("constant", c=2.5)(3.0) == 2.5
    with pytest.raises(ValueError, match="unknown builtin"):
        P.builtin("tanh")


def test_grid_geometric_is_log_uniform():
    x = P.GridSpec(11, 1.0, 1e10, "geometric").nodes()
    np.testing.assert_allclose(np.diff(np.log10(x)), 1.0, rtol=1e-12)
    assert x[0] == 1.0 and x[-1] == 1e10


@settings(max_examples=40, deadline=None)
@given(c=st.floats(-5, 5), a=st.floats(-3, 0), width=st.floats(0.1, 3))
def test_integral_is_linear_in_scale(c, a, width):
    base = P.cosh()
    lhs = P.integrate(base.scaled(c), a, a + width)
    rhs = c * P.integrate(base, a, a + width)
    assert math.isclose(lhs, rhs, rel_tol=1e-10, abs_tol=1e-12)


@settings(max_examples=30, deadline=None)
@given(lo=st.floats(0.1, 1.0), mid=st.floats(1.0, 5.0), hi=st.floats(5.0, 9.0))
def test_integral_is_additive(lo, mid, hi):
    p = P.power(-1.5)
    whole = P.integrate(p, lo, hi)
    assert math.isclose(whole, P.integrate(p, lo, mid) + P.integrate(p, mid, hi), rel_tol=1e-10)


def test_improper_tail_overflowing_integrand_diverges():
    res = P.improper_tail(P.exponential(1.0), 0.0)
    assert res.status == "diverges"
    assert "overflow" in res.reason
