from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from wpoincare import profiles as P
from wpoincare import spectral as S
from wpoincare import warped as W
from wpoincare import weights as Wt
from wpoincare.errors import DiagnosticsError, DomainError, FitError
from wpoincare.reproduce import euclidean_model, hyperbolic_model


def cylinder(n: int = 3) -> W.WarpedModel:
    return W.WarpedModel(n, P.constant(1.0))


def test_forms_match_dense_generalized_eigensolver():
    p = S.DirichletProblem(hyperbolic_model(3), (0.5, 4.0), P.GridSpec(120, 0.5, 4.0))
    f = S.assemble_forms(p)
    dense = scipy.linalg.eigh(f.stiffness.dense(), f.mass.dense(), eigvals_only=True)
    res = S.principal_eigenvalue(p, forms=f)
    assert res.lambda1 == pytest.approx(dense[0], rel=1e-10)
    assert res.residual < 1e-8


@pytest.mark.parametrize("lam", [0.5, 3.0, 40.0, 400.0])
def test_sturm_count_matches_dense(lam):
    p = S.DirichletProblem(hyperbolic_model(3), (0.5, 4.0), P.GridSpec(80, 0.5, 4.0))
    f = S.assemble_forms(p)
    dense = scipy.linalg.eigh(f.stiffness.dense(), f.mass.dense(), eigvals_only=True)
    assert S.sturm_count(f.stiffness, f.mass, lam) == int(np.sum(dense < lam))


@pytest.mark.parametrize("L", [1.0, 3.0, 10.0])
def test_cylinder_eigenvalue_exact(L):
    p = S.DirichletProblem(cylinder(), (0.0, L), P.GridSpec(2001, 0.0, L))
    assert S.principal_eigenvalue(p).lambda1 == pytest.approx((math.pi / L) ** 2, rel=1e-6)


@pytest.mark.parametrize("c", [0.0, 1.0, 2.0])
def test_constant_weight_shifts_spectrum(c):
    m = cylinder()
    w = Wt.user_weight(P.constant(c))
    rep = S.verify_weighted_poincare(w, m, (0.0, 2.0), P.GridSpec(2001, 0.0, 2.0))
    assert rep.minimum == pytest.approx((math.pi / 2) ** 2 - c, abs=2e-6)
    assert rep.passed


def test_second_order_convergence():
    exact = (math.pi / 2) ** 2
    errs = []
    for N in (101, 201, 401):
        p = S.DirichletProblem(cylinder(), (0.0, 2.0), P.GridSpec(N, 0.0, 2.0))
        errs.append(S.principal_eigenvalue(p).lambda1 - exact)
    assert errs[0] > 0  # conforming elements approach from above
    rates = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    np.testing.assert_allclose(rates, 2.0, atol=0.05)


@pytest.mark.parametrize("R", [3.0, 6.0])
def test_hyperbolic_annulus_exact(R):
    # u = sinh(r) f turns the radial problem into -u'' + u = lam u; the graded
    # grid resolves the layer at eps so the h^2 term dominates
    eps = 1e-3
    lam = [S.principal_eigenvalue(S.DirichletProblem(hyperbolic_model(3), (eps, R),
                                                     P.GridSpec(N, eps, R, "geometric"))).lambda1
           for N in (2001, 4001)]
    exact = 1 + (math.pi / (R - eps)) ** 2
    assert lam[1] == pytest.approx(exact, rel=2e-5)
    # one Richardson step removes the h^2 term
    assert (4 * lam[1] - lam[0]) / 3 == pytest.approx(exact, rel=1e-7)


def test_domain_monotonicity():
    m = hyperbolic_model(3)
    lams = [S.principal_eigenvalue(S.DirichletProblem(m, (1e-3, R), P.GridSpec(2001, 1e-3, R))).lambda1
            for R in (2.0, 4.0, 8.0)]
    assert lams[0] > lams[1] > lams[2] > 1.0


def test_hardy_grid_refinement_converges_to_zero():
    m, w = euclidean_model(3), Wt.hardy_weight(3)
    mins = [S.verify_weighted_poincare(w, m, (0.01, 100.0), S.default_grid(m, (0.01, 100.0), N)).minimum
            for N in (501, 1001, 2001)]
    assert all(v > 0 for v in mins)
    assert mins[0] > mins[1] > mins[2]
    d = np.diff(mins)
    assert d[0] / d[1] == pytest.approx(4.0, rel=0.1)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_doubled_hardy_weight_fails(n):
    m = euclidean_model(n)
    rep = S.verify_weighted_poincare(Wt.hardy_weight(n).scaled(2.0), m, (0.01, 100.0))
    assert rep.status == "FAIL"
    assert rep.minimum < 0
    assert rep.caveat


def test_bottom_spectrum_h3():
    rep = S.bottom_spectrum(hyperbolic_model(3), [10, 20, 30], node_count=4000)
    assert rep.value == pytest.approx(1.0, abs=0.01)
    assert rep.lambdas == sorted(rep.lambdas, reverse=True)


def test_bottom_spectrum_needs_increasing_radii():
    with pytest.raises(FitError):
        S.bottom_spectrum(hyperbolic_model(3), [10, 5])


def test_bottom_spectrum_flags_nonmonotone(monkeypatch):
    vals = iter([1.0, 2.0])
    real = S.principal_eigenvalue

    def fake(p, *a, **k):
        r = real(p, *a, **k)
        return S.EigenResult(next(vals), r.nodes, r.eigenvector, r.residual, r.grid_size, r.iterations)

    monkeypatch.setattr(S, "principal_eigenvalue", fake)
    with pytest.raises(DiagnosticsError):
        S.bottom_spectrum(hyperbolic_model(3), [2, 3], node_count=100)


def test_interval_outside_model():
    with pytest.raises(DomainError):
        S.DirichletProblem(euclidean_model(3), (-1.0, 1.0))


@pytest.mark.parametrize("interval,negative", [((0.01, 100.0), False), ((1e-4, 1e4), True)])
def test_scaled_hardy_n3_needs_a_long_interval(interval, negative):
    # in s = log r the excess weight 0.2 (n-2)^2/4 = 0.05 must beat the Dirichlet gap
    # (pi / log(b/a))^2 of a unit-weight Laplacian, which happens only when log(b/a) > pi/sqrt(0.05)
    m, w = euclidean_model(3), Wt.hardy_weight(3).scaled(1.2)
    mins = [S.verify_weighted_poincare(w, m, interval, S.default_grid(m, interval, N)).minimum for N in (2001, 8001)]
    assert mins[0] == pytest.approx(mins[1], rel=0.02)
    assert (mins[1] < 0) is negative


@settings(max_examples=25, deadline=None)
@given(n=st.integers(3, 6), frac=st.floats(0.05, 0.95), shrink=st.floats(0.0, 1.0))
def test_certificate_implies_nonnegative_eigenvalue(n, frac, shrink):
    # h = r^-a has Delta h + a (n-2-a) r^-2 h = 0; any smaller weight is certified
    a = frac * (n - 2)
    c = shrink * a * (n - 2 - a)
    m = euclidean_model(n)
    w = Wt.user_weight(P.power(-2.0, c))
    h = P.power(-a)
    for r in (0.05, 1.0, 20.0):
        assert Wt.certificate_residual(h, w, m, r) <= 1e-9 * h(r) / r**2
    rep = S.verify_weighted_poincare(w, m, (0.01, 100.0), S.default_grid(m, (0.01, 100.0), 801))
    assert rep.minimum >= -1e-8
