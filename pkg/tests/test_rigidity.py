from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wpoincare import profiles as P
from wpoincare import rho_metric as RM
from wpoincare import rigidity as Rg
from wpoincare import warped as W
from wpoincare import weights as Wt
from wpoincare.errors import DegenerateError, ZeroCrossingError


# -- eta'' = tau eta ---------------------------------------------------------

@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
def test_integrate_warp_exponential(c):
    b = Rg.WarpBuilder(P.constant(c * c), 1.0, c, (-2.0, 2.0), 1e-3, t0=0.0)
    eta = Rg.integrate_warp(b)
    t = np.linspace(-2.0, 2.0, 41)
    np.testing.assert_allclose(eta.values(t), np.exp(c * t), rtol=1e-10)
    np.testing.assert_allclose(eta.derivative_values(t), c * np.exp(c * t), rtol=1e-10)


def test_integrate_warp_rational():
    # eta = 1 + t^2 has tau = 2 / (1 + t^2)
    tau = P.ScalarProfile(lambda t: 2.0 / (1.0 + np.asarray(t) ** 2))
    eta = Rg.integrate_warp(Rg.WarpBuilder(tau, 1.0, 0.0, (-3.0, 3.0), 1e-3, t0=0.0))
    t = np.linspace(-3.0, 3.0, 61)
    np.testing.assert_allclose(eta.values(t), 1 + t**2, rtol=1e-11)


def test_integrate_warp_fourth_order():
    errs = []
    for h in (0.02, 0.01):
        eta = Rg.integrate_warp(Rg.WarpBuilder(P.constant(1.0), 1.0, 0.0, (0.0, 5.0), h))
        errs.append(abs(eta(5.0) - math.cosh(5.0)))
    assert math.log2(errs[0] / errs[1]) == pytest.approx(4.0, abs=0.2)


def test_integrate_warp_zero_crossing():
    with pytest.raises(ZeroCrossingError) as exc:
        Rg.integrate_warp(Rg.WarpBuilder(P.constant(-1.0), 1.0, 0.0, (0.0, 3.0)))
    assert exc.value.t == pytest.approx(math.pi / 2, abs=2e-3)


@pytest.mark.parametrize("kw", [{"eta0": 0.0}, {"step": -1.0}, {"domain": (1.0, 0.0)}, {"t0": 9.0}])
def test_warp_builder_validation(kw):
    with pytest.raises(ValueError):
        Rg.WarpBuilder(P.constant(1.0), **kw)


# -- eta = cosh u ------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(t=st.floats(0.0, 50.0), alpha=st.floats(1.0, 3.0), c1=st.floats(0.1, 3.0))
def test_odd_profile_parity(t, alpha, c1):
    u = Rg.OddProfile(alpha, c1)
    assert u(-t) == -u(t)
    assert u(-t, 1) == u(t, 1)
    assert u(-t, 2) == -u(t, 2)


@pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("knot", [0.9, 1.1])
def test_odd_profile_is_c2_at_the_blend(alpha, knot):
    u = Rg.OddProfile(alpha, 1.0)
    for order in (0, 1, 2):
        lo, hi = u(knot - 1e-10, order), u(knot + 1e-10, order)
        assert lo == pytest.approx(hi, abs=1e-7)


def test_odd_profile_derivatives_match_differences():
    u = Rg.OddProfile(2.0, 1.3)
    t = np.array([0.3, 0.95, 1.02, 4.0])
    h = 1e-6
    np.testing.assert_allclose(u(t, 1), (u(t + h) - u(t - h)) / (2 * h), rtol=1e-6)
    np.testing.assert_allclose(u(t, 2), (u(t + h, 1) - u(t - h, 1)) / (2 * h), rtol=1e-5, atol=1e-7)


def test_example62_linear_case_tends_to_constant():
    # alpha = 1: u = C1 t far out and rho -> (n-2) C1^2
    m, w, rep = Rg.example62_generate(1.0, 2.0, 0.0, 4)
    assert w(80.0) == pytest.approx(8.0, rel=1e-12)
    assert rep.extra["asymptote_coefficient"] == 8.0
    assert rep.extra["fitted_exponent"] == pytest.approx(0.0, abs=1e-8)


def test_example62_weight_is_natural_weight():
    m, w, _ = Rg.example62_generate(2.0, 1.0, 0.5, 4)
    t = np.array([-3.0, -0.5, 0.2, 1.0, 7.0])
    nat = W.natural_weight(m, check_points=t)
    np.testing.assert_allclose(w.rho.values(t), nat.rho.values(t), rtol=1e-10)


@pytest.mark.parametrize(
    "args",
    [(0.5, 1.0, 0.0, 4), (2.0, 1.0, -1.0, 4), (2.0, 1.0, 2.0, 4), (2.0, 1.0, 0.0, 2)],
)
def test_example62_parameter_errors(args):
    with pytest.raises(Rg.ParameterError):
        Rg.example62_generate(*args)


def test_example62_boundary_c1():
    # C1 must exceed sqrt(C/(n-2)) strictly
    with pytest.raises(Rg.ParameterError):
        Rg.example62_generate(2.0, 1.0, 2.0, 4)
    _, _, rep = Rg.example62_generate(2.0, 1.01, 2.0, 4)
    assert rep.extra["slope_ok"]


# -- conditions and liminf ---------------------------------------------------

def test_condition_check_exponential_model():
    m = W.WarpedModel(4, P.exponential(0.7), W.FiberData(ricci_lower=0.0))
    rep = Rg.condition_check(m)
    assert rep.passed
    assert rep.extra["ricci_identity_ok"]


def test_condition_check_detects_negative_fiber():
    m = W.WarpedModel(4, P.cosh(), W.FiberData(ricci_lower=-5.0))
    rep = Rg.condition_check(m)
    assert rep.condition_67["passed"]
    assert not rep.condition_68["passed"]


def test_condition_check_space_form_boundary():
    # H^3: (n-2)(log sinh)'' + sinh^-2 vanishes identically
    m = W.WarpedModel(3, P.sinh(), W.unit_sphere_fiber(3), "pole_model")
    assert Rg.condition_check(m).passed


@pytest.mark.parametrize("n,a", [(4, 1.0), (5, 0.5)])
def test_liminf_exponential(n, a):
    m = W.WarpedModel(n, P.exponential(a), W.FiberData(ricci_lower=0.0))
    rep = Rg.theorem63_liminf(m, horizon=60.0)
    assert rep.liminf_rho == pytest.approx((n - 2) * a * a, rel=1e-8)
    assert rep.extra["verdict"] == "PASS"
    assert rep.extra["liminf_positive"]


def test_liminf_incomplete_rho_metric():
    # tau = (1+t)^-3: int t rho and int sqrt(rho) both converge
    n = 4
    tau = P.ScalarProfile(lambda t: (1.0 + np.asarray(t)) ** -3.0, 0.0)
    eta = Rg.integrate_warp(Rg.WarpBuilder(tau, 1.0, 1.0, (0.0, 200.0), 1e-2))
    m = W.WarpedModel(n, eta, W.FiberData(ricci_lower=0.0))
    w = Wt.user_weight(P.ScalarProfile(lambda t: (n - 2) * (1.0 + np.asarray(t)) ** -3.0, 0.0))
    rep = Rg.theorem63_liminf(m, w, horizon=200.0)
    assert rep.extra["rho_metric"] == "incomplete"
    assert rep.extra["verdict"] == "hypotheses-fail"
    assert any("incomplete" in note for note in rep.notes)


# -- comparison function -----------------------------------------------------

def _table(w, r_max=100.0):
    return RM.build_rho_distance(w, 1.0, P.GridSpec(2001, 1.0, r_max))


def _power_weight(p):
    # (1 + r)^p with analytic derivatives
    return Wt.user_weight(P.ScalarProfile(
        lambda r: (1 + np.asarray(r)) ** p, 0.0, math.inf,
        lambda r: p * (1 + np.asarray(r)) ** (p - 1),
        lambda r: p * (p - 1) * (1 + np.asarray(r)) ** (p - 2)))


@pytest.mark.parametrize(
    "w,verdict",
    [
        (Wt.user_weight(P.constant(1.0, 0.0)), "consistent"),
        (_power_weight(-4.0), "consistent"),
        (_power_weight(4.0), "nonexistence"),
        (Wt.user_weight(P.exponential(1.0, t_lo=0.0)), "nonexistence"),
        (_power_weight(-2.0), "hypothesis-fails"),
    ],
)
def test_comparison_verdicts(w, verdict):
    rep = Rg.theorem81_comparison(w, 4, 1.0, _table(w, 60.0))
    assert rep.extra["verdict"] == verdict


def test_comparison_constant_weight_is_equality():
    w = Wt.user_weight(P.constant(1.0, 0.0))
    rep = Rg.theorem81_comparison(w, 5, 1.0, _table(w))
    assert rep.residuals["max_rel_gap"] <= 1e-12


def test_comparison_against_direct_differentiation():
    # rho = (1+r)^-8 makes rho^-1/4 = (1+r)^2, so (g'' - k^2 rho g) / (k^2 rho g) = 2 (1+r)^6 / k^2;
    # check that against finite differences of g itself
    n, k = 4, 2.0 / 3.0
    w = _power_weight(-8.0)
    tab = _table(w, 3.0)

    def g(r):
        return w(r) ** -0.25 * math.exp(k * tab.distance_exact(r))

    for r in (1.5, 2.0, 2.5):
        h = 1e-4
        g2 = (g(r + h) - 2 * g(r) + g(r - h)) / h**2
        direct = (g2 - k * k * w(r) * g(r)) / (k * k * w(r) * g(r))
        assert direct == pytest.approx(2 * (1 + r) ** 6 / k**2, rel=1e-5)
    rep = Rg.theorem81_comparison(w, n, 1.0, tab, samples=11)
    assert rep.condition_68["min_rel"] == pytest.approx(2 * 2.0**6 / k**2, rel=1e-10)


def test_comparison_needs_dimension_four():
    w = Wt.user_weight(P.constant(1.0, 0.0))
    with pytest.raises(DegenerateError):
        Rg.theorem81_comparison(w, 3, 1.0, _table(w))


# -- constant-weight rigidity ------------------------------------------------

@pytest.mark.parametrize("n,c", [(4, 0.7), (5, 1.0), (6, 0.3)])
def test_rigid_exponential(n, c):
    m = W.WarpedModel(n, P.exponential(c), W.FiberData(ricci_lower=0.0))
    rep = Rg.theorem82_residual(m, Wt.user_weight(P.constant((n - 1) ** 2 * c * c / 4)))
    assert rep.residuals["rigid_residual"] <= 1e-10
    assert rep.residuals["laplacian_identity"] <= 1e-10
    assert rep.extra["rigid"] and rep.extra["rho_matches_rate"]


def test_cosh_is_not_rigid():
    m = W.WarpedModel(4, P.cosh(), W.FiberData(ricci_lower=0.0))
    rep = Rg.theorem82_residual(m, W.natural_weight(m))
    assert not rep.extra["rigid"]
    assert rep.residuals["laplacian_identity"] <= 1e-8
    assert rep.residuals["rigid_residual"] > 0.1


def test_constant_weight_mismatch_note():
    m = W.WarpedModel(4, P.exponential(1.0), W.FiberData(ricci_lower=0.0))
    rep = Rg.theorem82_residual(m, Wt.user_weight(P.constant(1.0)))
    assert not rep.extra["rho_matches_rate"]
    assert any("differs" in note for note in rep.notes)
