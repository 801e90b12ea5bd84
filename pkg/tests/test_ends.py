from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wpoincare import ends as E
from wpoincare import profiles as P
from wpoincare import rho_metric as RM
from wpoincare import weights as Wt
from wpoincare.errors import DomainError


@pytest.mark.parametrize(
    "end,status",
    [
        (E.euclidean_end(2), "parabolic"),
        (E.cylinder_end(), "parabolic"),
        (E.EndProfile(P.power(0.5), 1.0), "parabolic"),
        (E.EndProfile(P.power(1.5), 1.0), "nonparabolic"),
        (E.euclidean_end(3), "nonparabolic"),
        (E.euclidean_end(5), "nonparabolic"),
        (E.hyperbolic_end(3), "nonparabolic"),
    ],
)
def test_classification(end, status):
    assert E.classify_end(end).status == status


@pytest.mark.parametrize("n", [3, 4, 5])
def test_capacity_integral_value(n):
    vol = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
    res = E.classify_end(E.euclidean_end(n)).evidence
    assert res.value == pytest.approx(1.0 / ((n - 2) * vol), rel=1e-6)


def test_end_needs_positive_area():
    with pytest.raises(DomainError):
        E.EndProfile(P.constant(0.0, 0.0, math.inf), 1.0)


@pytest.mark.parametrize(
    "end,passed",
    [(E.euclidean_end(3), True), (E.euclidean_end(4), True), (E.EndProfile(P.power(0.5), 1.0), False),
     (E.cylinder_end(), False)],
)
def test_volume_growth(end, passed):
    rep = E.volume_growth_check(end, 1e6)
    assert rep.passed is passed


def test_volume_slope_matches_exponent():
    rep = E.volume_growth_check(E.EndProfile(P.power(0.5), 1.0), 1e6)
    assert rep.loglog_slope == pytest.approx(1.5, abs=0.01)


def test_annulus_growth_nonparabolic():
    w = Wt.hardy_weight(3)
    tab = RM.build_rho_distance(w, 1.0, P.GridSpec(3000, 1.0, math.exp(22.0), "geometric"))
    rep = E.theorem31_bounds(E.euclidean_end(3), w, tab, "nonparabolic", (2, 9))
    # sqrt(rho) = 1/(2r), so r = e^{2R} and J(R) = pi (e^2 - 1) e^{2R}
    np.testing.assert_allclose(rep.J, math.pi * (math.e**2 - 1) * np.exp(2 * np.array(rep.R)), rtol=1e-8)
    assert rep.passed


def test_tail_decay_parabolic():
    # cylinder of cross-section 1 with rho = 1/(4 r^2): r_rho = log(r)/2 and the
    # rho-mass beyond r_rho = R is exp(-2R)/4
    w = Wt.user_weight(P.power(-2.0, 0.25))
    end = E.cylinder_end(1.0)
    tab = RM.build_rho_distance(w, 1.0, P.GridSpec(2000, 1.0, math.exp(20.0), "geometric"))
    rep = E.theorem31_bounds(end, w, tab, "parabolic", (1, 8))
    np.testing.assert_allclose(rep.J, np.exp(-2 * np.array(rep.R)) / 4, rtol=1e-6)
    assert rep.slope == pytest.approx(-2.0, abs=1e-6)
    assert rep.total == pytest.approx(0.25, rel=1e-6)
    assert rep.passed


def test_theorem31_rejects_undecided_status():
    w = Wt.hardy_weight(3)
    tab = RM.build_rho_distance(w, 1.0, P.GridSpec(50, 1.0, 100.0))
    with pytest.raises(ValueError):
        E.theorem31_bounds(E.euclidean_end(3), w, tab, "inconclusive", (0, 1))


@settings(max_examples=40, deadline=None)
@given(p=st.floats(-3.0, 3.0), q=st.floats(-3.0, 3.0), R=st.floats(1.5, 50.0))
def test_schwarz_gap_nonnegative(p, q, R):
    w = Wt.user_weight(P.power(p, t_lo=0.5))
    end = E.EndProfile(P.power(q, t_lo=0.5), 1.0)
    gap = E.schwarz_gap(w, end, R)
    assert gap >= -1e-10 * (1 + abs(gap))


@pytest.mark.parametrize("q", [0.0, 1.0, 2.0])
def test_schwarz_gap_vanishes_for_green_type_weight(q):
    # equality in Cauchy-Schwarz needs rho A proportional to 1/A
    w = Wt.user_weight(P.power(-2 * q, 3.0, t_lo=0.5))
    end = E.EndProfile(P.power(q, t_lo=0.5), 1.0)
    assert E.schwarz_gap(w, end, 20.0) == pytest.approx(0.0, abs=1e-9)
