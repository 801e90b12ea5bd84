"""The fourteen acceptance checks, each a function returning a :class:`Check`.

Used by ``wpoincare report`` and by the acceptance test module.  Every
check measures its own wall time against its budget where one exists.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import decay as D
from . import ends as E
from . import profiles as P
from . import rho_metric as RM
from . import rigidity as Rg
from . import spectral as S
from . import warped as W
from . import weights as Wt


@dataclass
class Check:
    number: int
    title: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.title} ({self.seconds:.2f}s)"

    def to_dict(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "seconds": round(self.seconds, 3), "detail": self.detail}


def euclidean_model(n: int, volume: float | None = None) -> W.WarpedModel:
    fib = W.unit_sphere_fiber(n) if volume is None else W.FiberData(volume=volume)
    return W.WarpedModel(n, P.identity(), fib, "pole_model", name=f"R^{n}")


def hyperbolic_model(n: int) -> W.WarpedModel:
    return W.WarpedModel(n, P.sinh(), W.unit_sphere_fiber(n), "pole_model", name=f"H^{n}")


def _timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def check_hardy_sharpness() -> Check:
    detail, ok = {}, True
    for n in (3, 4, 5):
        m = euclidean_model(n)
        w = Wt.hardy_weight(n)
        base, t1 = _timed(lambda: S.verify_weighted_poincare(w, m, (0.01, 100.0)))
        over, t2 = _timed(lambda: S.verify_weighted_poincare(w.scaled(1.2), m, (0.01, 100.0)))
        good = base.minimum >= -1e-8 and over.minimum < 0 and t1 < 2 and t2 < 2
        detail[f"n={n}"] = {"minimum": base.minimum, "minimum_x1.2": over.minimum,
                            "seconds": [round(t1, 3), round(t2, 3)], "passed": good}
        ok &= good
    return Check(1, "Hardy weight sharp on [0.01, 100]", ok, detail)


def check_decay_sharpness() -> Check:
    def run():
        m = euclidean_model(4, volume=1.0)
        e = D.EndModel(m, Wt.hardy_weight(4), 1.0, math.exp(12.0))
        return D.annulus_integrals(e, P.power(-2.0), 10)

    s, sec = _timed(run)
    R = s.R_values[1:]
    exact = (1 - math.exp(-2)) / 2 * np.exp(-2 * R)
    err = float(np.max(np.abs(s.integrals[1:] / exact - 1)))
    rate, C, res = D.fit_decay_rate(s, (1, 10))
    ok = err <= 1e-6 and abs(rate + 2) <= 1e-4 and sec < 5
    return Check(2, "Decay sharpness on the R^4 end", ok, {"max_rel_err": err, "rate": rate, "C": C, "seconds": sec})


def check_hyperbolic_bottom() -> Check:
    rep, sec = _timed(lambda: S.bottom_spectrum(hyperbolic_model(3), [10, 20, 30], node_count=10_000))
    ok = abs(rep.value - 1.0) <= 0.01 and sec < 10
    return Check(3, "Bottom of spectrum of H^3", ok, {"estimate": rep.value, "lambdas": rep.lambdas, "seconds": sec})


def check_green_is_hardy() -> Check:
    worst = 0.0
    for n in (3, 4, 5):
        g = Wt.green_weight_model(euclidean_model(n))
        h = Wt.hardy_weight(n)
        for r in (0.5, 1.0, 10.0):
            worst = max(worst, abs(g(r) / h(r) - 1))
    return Check(4, "Green weight equals Hardy weight on R^n", worst <= 1e-8, {"max_rel_err": worst})


def check_curvature() -> Check:
    worst = 0.0
    ts = np.linspace(0.1, 5.0, 50)
    for n in (3, 4, 5):
        h, e = hyperbolic_model(n), euclidean_model(n)
        for t in ts:
            t = float(t)
            worst = max(worst,
                        abs(W.sectional_radial(h, t) + 1), abs(W.sectional_fiber(h, t) + 1),
                        abs(W.ricci_radial(h, t) + (n - 1)), abs(W.ricci_fiber(h, t) + (n - 1)),
                        abs(W.sectional_radial(e, t)), abs(W.sectional_fiber(e, t)),
                        abs(W.ricci_radial(e, t)), abs(W.ricci_fiber(e, t)))
    return Check(5, "Curvature of H^n and R^n", worst <= 1e-9, {"max_abs_err": worst})


def builtin_models(n: int = 4) -> dict[str, tuple[W.WarpedModel, np.ndarray]]:
    pole = np.linspace(0.1, 5.0, 100)
    line = np.linspace(-5.0, 5.0, 100)
    return {
        "sinh": (hyperbolic_model(n), pole),
        "r": (euclidean_model(n), pole),
        "cosh": (W.WarpedModel(n, P.cosh()), line),
        "exp": (W.WarpedModel(n, P.exponential(1.0)), line),
        "one": (W.WarpedModel(n, P.constant(1.0)), line),
    }


def check_harmonic_flux() -> Check:
    detail, ok = {}, True
    for name, (m, ts) in builtin_models().items():
        f = W.harmonic_profile(m, float(ts[0]))
        lap = max(abs(W.radial_laplacian(m, f, float(t))) for t in ts)
        flux = np.array([W.level_flux(m, float(t), f) for t in ts])
        var = float((flux.max() - flux.min()) / abs(flux.mean()))
        detail[name] = {"laplacian": lap, "flux_variation": var}
        ok &= lap <= 1e-8 and var <= 1e-8
    return Check(6, "Harmonic profile and level flux", ok, detail)


def check_bochner_equality() -> Check:
    tau = P.ScalarProfile(lambda t: 1.0 + np.asarray(t) ** 2, name="1+t^2")
    warp = Rg.integrate_warp(Rg.WarpBuilder(tau, domain=(-3.0, 3.0), t0=0.0))
    cases = {
        "cosh": (W.WarpedModel(4, P.cosh()), None, np.linspace(-4, 4, 101)),
        "exp": (W.WarpedModel(4, P.exponential(1.0)), None, np.linspace(-4, 4, 101)),
        "integrated": (W.WarpedModel(4, warp), tau, np.linspace(-2.9, 2.9, 101)),
    }
    detail, ok = {}, True
    for name, (m, tp, ts) in cases.items():
        worst = 0.0
        for t in ts:
            t = float(t)
            tv = tp(t) if tp is not None else m.ratio2(t)
            worst = max(worst, abs(W.bochner_residual(m, tv, t)))
        detail[name] = worst
        ok &= worst <= 1e-6
    return Check(7, "Bochner equality for tau = eta''/eta", ok, detail)


def check_end_classes() -> Check:
    expect = {
        "R^2": (E.euclidean_end(2), "parabolic"),
        "cylinder": (E.cylinder_end(), "parabolic"),
        "R^3": (E.euclidean_end(3), "nonparabolic"),
        "R^4": (E.euclidean_end(4), "nonparabolic"),
        "H^3": (E.hyperbolic_end(3), "nonparabolic"),
    }
    got = {k: E.classify_end(e).status for k, (e, _) in expect.items()}
    wrong = [k for k, (_, s) in expect.items() if got[k] != s]
    return Check(8, "End classification", not wrong, {"status": got, "misclassified": wrong})


def check_annulus_growth() -> Check:
    w = Wt.hardy_weight(4)
    tab = RM.build_rho_distance(w, 1.0, P.GridSpec(3000, 1.0, math.exp(10.0), "geometric"))
    rep = E.theorem31_bounds(E.euclidean_end(4), w, tab, "nonparabolic", (2, 9))
    J = np.array(rep.J)
    ratios = J[1:] / J[:-1]
    err = float(np.max(np.abs(ratios / math.e**2 - 1)))
    return Check(9, "Annulus rho-mass grows like e^{2R}", err <= 0.01,
                 {"max_rel_err": err, "slope": rep.slope})


def check_rigidity_ode() -> Check:
    eta = Rg.integrate_warp(Rg.WarpBuilder(P.constant(1.0), 1.0, 0.0, (0.0, 5.0), 1e-3))
    ts = np.linspace(0.0, 5.0, 2001)
    err = float(np.max(np.abs(eta.values(ts) - np.cosh(ts))))
    m = W.WarpedModel(4, eta)
    w = W.natural_weight(m)
    inner = np.linspace(0.05, 4.95, 200)
    trip = float(np.max(np.abs(w.rho.values(inner) / 2.0 - 1.0)))
    return Check(10, "eta'' = tau eta integrator", err <= 1e-8 and trip <= 1e-6,
                 {"max_err_cosh": err, "tau_roundtrip": trip})


def check_example62() -> Check:
    detail, ok = {}, True
    for a in (1.5, 2.0, 3.0):
        _, _, rep = Rg.example62_generate(a, 1.0, 0.0, 4)
        fit = rep.extra["fitted_exponent"]
        rel = abs(fit - (2 * a - 2)) / (2 * a - 2)
        good = rel <= 0.02 and rep.passed
        detail[f"alpha={a}"] = {"fitted": fit, "rel_err": rel, "conditions": rep.passed}
        ok &= good
    return Check(11, "cosh u example: growth exponent 2 alpha - 2", ok, detail)


def check_constant_rigidity() -> Check:
    n, c = 4, 0.7
    m = W.WarpedModel(n, P.exponential(c), W.FiberData(ricci_lower=0.0))
    rigid = Rg.theorem82_residual(m, Wt.user_weight(P.constant((n - 1) ** 2 * c * c / 4)))
    mc = W.WarpedModel(n, P.cosh(), W.FiberData(ricci_lower=0.0))
    soft = Rg.theorem82_residual(mc, W.natural_weight(mc))
    ok = rigid.residuals["rigid_residual"] <= 1e-8 and rigid.extra["rigid"] and not soft.extra["rigid"]
    return Check(12, "eta^-(n-1)/2 residual and rigid case", ok,
                 {"exp": rigid.residuals, "cosh": soft.residuals, "cosh_rigid": soft.extra["rigid"]})


def check_comparison() -> Check:
    one = Wt.user_weight(P.constant(1.0, 0.0, math.inf))
    t1 = RM.build_rho_distance(one, 1.0, P.GridSpec(2001, 1.0, 100.0))
    r1 = Rg.theorem81_comparison(one, 4, 1.0, t1)
    quart = Wt.user_weight(P.ScalarProfile(lambda r: (1 + np.asarray(r)) ** -4.0, 0.0, math.inf,
                                           lambda r: -4 * (1 + np.asarray(r)) ** -5.0,
                                           lambda r: 20 * (1 + np.asarray(r)) ** -6.0, name="(1+r)^-4"))
    t2 = RM.build_rho_distance(quart, 1.0, P.GridSpec(2001, 1.0, 100.0))
    r2 = Rg.theorem81_comparison(quart, 4, 1.0, t2)
    ok = (r1.residuals["max_rel_gap"] <= 1e-10 and r2.condition_67["passed"] and r2.condition_68["passed"])
    return Check(13, "Comparison function rho^-1/4 exp(2 r_rho/(n-1))", ok,
                 {"constant_gap": r1.residuals["max_rel_gap"], "quartic": r2.to_dict()})


def check_honest_limits() -> Check:
    n = 3
    m = hyperbolic_model(n)
    w = Wt.user_weight(P.constant((n - 1) ** 2 / 4, 0.0, math.inf))
    e = D.EndModel(m, w, 1.0, 40.0)
    rep = D.growth_condition_check(e, D.bounded_harmonic_profile(m, 1.0), 30.0)
    ratio = rep.G_over_R[len(rep.G_over_R) // 2:]
    theta = min(ratio) > 0.5 * max(ratio) and rep.loglog_slope > 0.9
    ok = theta and not rep.certificate
    return Check(14, "Bounded harmonic profile on H^3: G(R) grows like R", ok,
                 {"loglog_slope": rep.loglog_slope, "G_over_R_tail": ratio[-3:], "certificate": rep.certificate})


ALL: list[Callable[[], Check]] = [
    check_hardy_sharpness,
    check_decay_sharpness,
    check_hyperbolic_bottom,
    check_green_is_hardy,
    check_curvature,
    check_harmonic_flux,
    check_bochner_equality,
    check_end_classes,
    check_annulus_growth,
    check_rigidity_ode,
    check_example62,
    check_constant_rigidity,
    check_comparison,
    check_honest_limits,
]


def run_all(selected: list[int] | None = None) -> list[Check]:
    out = []
    for number, fn in enumerate(ALL, start=1):
        if selected and number not in selected:
            continue
        t = time.perf_counter()
        c = fn()
        c.seconds = time.perf_counter() - t
        out.append(c)
    return out
