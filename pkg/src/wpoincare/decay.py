"""Decay of solutions of ``(Delta - V) f = 0`` along an end, measured in the rho-metric.

On a radial end with level area ``A`` the equation reads
``(A f')' = V A f``.  The module solves it (closed quadrature when
``V = 0``, RK4 shooting otherwise), integrates ``rho f^2`` over unit
rho-annuli and fits the exponential rate of the resulting series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import profiles as P
from .errors import DomainError, FitError, HypothesisViolation, RangeError, SolverError
from .profiles import GridSpec, ScalarProfile, TailPolicy
from .rho_metric import RhoDistanceTable, build_rho_distance
from .warped import WarpedModel
from .weights import WeightProfile


class ShootingError(SolverError):
    """No sign-definite decaying solution was found."""


@dataclass(frozen=True)
class EndModel:
    """The part ``[r0, t_max]`` of a radial model, with a weight and optional potential."""

    model: WarpedModel
    weight: WeightProfile
    r0: float
    t_max: float
    potential: ScalarProfile | None = None
    table_nodes: int = 4001
    rho_table: RhoDistanceTable | None = field(default=None, repr=False)

    def __post_init__(self):
        lo, hi = self.model.eta.domain
        if not lo <= self.r0 < self.t_max <= hi:
            raise DomainError(f"end [{self.r0}, {self.t_max}] not inside model domain [{lo}, {hi}]")
        if self.rho_table is None:
            if self.r0 > 0 and self.t_max / self.r0 > 100:
                g = GridSpec(self.table_nodes, self.r0, self.t_max, "geometric")
            else:
                g = GridSpec(self.table_nodes, self.r0, self.t_max)
            object.__setattr__(self, "rho_table", build_rho_distance(self.weight, self.r0, g))

    def area(self, r):
        return self.model.area_values(r)


@dataclass(frozen=True)
class BVSpec:
    """Boundary data: ``f(r0) = value`` and either decay at infinity or ``f(far_point) = far_value``."""

    value: float = 1.0
    far: Literal["decay", "value"] = "decay"
    far_point: float | None = None
    far_value: float = 0.0
    step: float = 1e-3
    shoot_length: float = 20.0
    tol: float = 1e-12


def _log_d1_values(m: WarpedModel, ts: np.ndarray) -> np.ndarray:
    if m.log_eta is not None:
        return m.log_eta.derivative_values(ts, 1)
    return m.eta.derivative_values(ts, 1) / m.eta.values(ts)


def _end_grid(r0: float, t_max: float, nodes: int) -> np.ndarray:
    if r0 > 0 and t_max / r0 > 100:
        return np.geomspace(r0, t_max, nodes)
    return np.linspace(r0, t_max, nodes)


def _harmonic_solution(e: EndModel, bv: BVSpec) -> ScalarProfile:
    """Tabulated ``f`` with ``A f' = const``; derivatives are exact at the nodes.

    For decaying data the values are accumulated from the far end,
    ``f(r_i) = c (T(r_N) + sum_{j >= i} cell_j)``, so small values keep
    full relative precision.
    """
    inv_area = e.model.inverse_area_profile()
    r0 = e.r0
    ts = _end_grid(r0, e.t_max, e.table_nodes)
    cells = np.array([P.integrate(inv_area, float(a), float(b), tol=1e-300) for a, b in zip(ts[:-1], ts[1:])])
    if bv.far == "decay":
        if math.isfinite(e.model.eta.t_hi) and e.t_max >= e.model.eta.t_hi:
            raise ShootingError("the end stops at a finite point; decay at infinity is undefined")
        tail = P.improper_tail(inv_area, float(ts[-1]), TailPolicy())
        if not tail.converges:
            raise ShootingError(f"no decaying harmonic solution: integral of 1/A {tail.status}")
        T = np.concatenate([np.cumsum(cells[::-1])[::-1], [0.0]]) + tail.value
        c = bv.value / T[0]
        vals = c * T
        slope = -c
    else:
        if bv.far_point is None or bv.far_point <= r0:
            raise DomainError("far_point must lie beyond r0")
        H = P.integrate(inv_area, r0, bv.far_point, tol=1e-14)
        c = (bv.far_value - bv.value) / H
        vals = bv.value + c * np.concatenate([[0.0], np.cumsum(cells)])
        slope = c
    ia = inv_area.values(ts)
    d1 = slope * ia
    d2 = -(e.model.n - 1) * _log_d1_values(e.model, ts) * d1
    return P._replace(P.from_hermite(ts, vals, d1, d2), name="harmonic_solution")


def _fundamental_pair(e: EndModel, r_end: float, h: float):
    """RK4 for ``f'' = -(n-1)(log eta)' f' + V f`` from the two unit data at ``r0``."""
    r0 = e.r0
    steps = max(1, int(math.ceil((r_end - r0) / h)))
    h = (r_end - r0) / steps
    ts = r0 + h * np.arange(steps + 1)
    half = ts[:-1] + 0.5 * h
    k = e.model.n - 1
    L_full = k * _log_d1_values(e.model, ts)
    L_half = k * _log_d1_values(e.model, half)
    V_full = e.potential.values(ts) if e.potential is not None else np.zeros_like(ts)
    V_half = e.potential.values(half) if e.potential is not None else np.zeros_like(half)

    Y = np.zeros((steps + 1, 4))  # u1, u1', u2, u2'
    Y[0] = (1.0, 0.0, 0.0, 1.0)

    def rhs(y, L, V):
        return np.array([y[1], -L * y[1] + V * y[0], y[3], -L * y[3] + V * y[2]])

    y = Y[0].copy()
    for i in range(steps):
        k1 = rhs(y, L_full[i], V_full[i])
        k2 = rhs(y + 0.5 * h * k1, L_half[i], V_half[i])
        k3 = rhs(y + 0.5 * h * k2, L_half[i], V_half[i])
        k4 = rhs(y + h * k3, L_full[i + 1], V_full[i + 1])
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        Y[i + 1] = y
        if not np.all(np.isfinite(y)):
            raise ShootingError(f"integration overflowed at r = {ts[i + 1]}")
    return ts, Y, L_full, V_full


def _classify(f: np.ndarray, df: np.ndarray) -> tuple[int, int]:
    """(+1 grows, -1 crosses zero, 0 neither) and the index where it was decided."""
    neg = np.flatnonzero(f < 0)
    up = np.flatnonzero((df > 0) & (f > 0))
    i_neg = neg[0] if neg.size else len(f)
    i_up = up[0] if up.size else len(f)
    if i_neg == i_up == len(f):
        return 0, len(f) - 1
    return (-1, int(i_neg)) if i_neg < i_up else (1, int(i_up))


def solve_schrodinger_radial(e: EndModel, boundary: BVSpec | None = None) -> ScalarProfile:
    """Positive solution of ``(A f')' = V A f`` on the end with the given boundary data."""
    bv = boundary or BVSpec()
    if e.potential is None:
        return _harmonic_solution(e, bv)
    if bv.far != "decay":
        raise NotImplementedError("two-point data with a potential is not supported; use decay")
    r_end = min(e.t_max, e.r0 + bv.shoot_length)
    ts, Y, L, V = _fundamental_pair(e, r_end, bv.step)

    def trial(s):
        return Y[:, 0] + s * Y[:, 2], Y[:, 1] + s * Y[:, 3]

    hi = 0.0
    if _classify(*trial(hi))[0] != 1:
        raise ShootingError("zero initial slope does not grow; is V >= 0 on the end?")
    lo = -1.0
    while _classify(*trial(lo))[0] != -1:
        lo *= 2.0
        if lo < -1e12:
            raise ShootingError("could not bracket the decaying slope")
    while hi - lo > bv.tol * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        kind, _ = _classify(*trial(mid))
        if kind == 1:
            hi = mid
        elif kind == -1:
            lo = mid
        else:
            lo = hi = mid
    s = 0.5 * (lo + hi)
    # trust the solution only where the bracketing trajectories still agree
    i_stop = min(_classify(*trial(lo))[1], _classify(*trial(hi))[1])
    fa, dfa = trial(s)
    i_stop = max(i_stop, 8)
    ts, fa, dfa = ts[: i_stop + 1], fa[: i_stop + 1], dfa[: i_stop + 1]
    dd = -L[: i_stop + 1] * dfa + V[: i_stop + 1] * fa
    sol = P.from_hermite(ts, bv.value * fa, bv.value * dfa, bv.value * dd)
    return P._replace(sol, name="decaying_solution")


# ---------------------------------------------------------------------------
# Annulus series
# ---------------------------------------------------------------------------


@dataclass
class AnnulusSeries:
    R_values: np.ndarray
    integrals: np.ndarray
    fitted_rate: float | None = None
    fitted_C: float | None = None
    residual: float | None = None
    width: float = 1.0

    def rows(self) -> list[tuple[float, float, float]]:
        out = []
        for R, I in zip(self.R_values, self.integrals):
            out.append((float(R), float(I), math.log(I) if I > 0 else float("-inf")))
        return out

    def to_dict(self) -> dict:
        return {
            "R": [float(r) for r in self.R_values],
            "I": [float(v) for v in self.integrals],
            "rate": self.fitted_rate,
            "C": self.fitted_C,
            "residual": self.residual,
            "width": self.width,
        }


def _density(e: EndModel, f: ScalarProfile, extra=None) -> ScalarProfile:
    rho, fn, m = e.weight.rho, f.fn, e.model
    vec = rho.vectorized and f.vectorized

    def g(r):
        r = np.asarray(r, dtype=float)
        v = np.asarray(rho.fn(r)) * np.asarray(fn(r)) ** 2 * m.area_values(np.atleast_1d(r)).reshape(r.shape)
        if extra is not None:
            v = v * extra(r)
        return v

    return ScalarProfile(g, f.t_lo, f.t_hi, name="rho f^2 A", vectorized=vec)


def annulus_integrals(e: EndModel, f: ScalarProfile, R_max: float, width: float = 1.0) -> AnnulusSeries:
    """``I(R_k) = int_{R_k <= r_rho <= R_k + width} rho f^2 dV`` for ``R_k = 0, 1, ..., R_max``."""
    tab = e.rho_table
    top = int(math.floor(R_max))
    if top + width > tab.R_range[1] + 1e-12:
        raise RangeError(f"rho table reaches r_rho = {tab.R_range[1]}, need {top + width}")
    dens = _density(e, f)
    Rs = np.arange(0, top + 1, dtype=float)
    out = np.empty(len(Rs))
    for i, R in enumerate(Rs):
        a, b = tab.inverse(R), tab.inverse(R + width)
        out[i] = P.integrate(dens, a, b, tol=1e-300)
    s = AnnulusSeries(Rs, out, width=width)
    if len(Rs) >= 4 and np.all(out > 0):
        s.fitted_rate, s.fitted_C, s.residual = fit_decay_rate(s)
    return s


def fit_decay_rate(s: AnnulusSeries, window: tuple[float, float] | None = None) -> tuple[float, float, float]:
    """Least-squares line through ``(R, log I)``: returns ``(rate, C, rms residual)``."""
    R = np.asarray(s.R_values, dtype=float)
    I = np.asarray(s.integrals, dtype=float)
    if window is not None:
        keep = (R >= window[0]) & (R <= window[1])
        R, I = R[keep], I[keep]
    if len(R) < 4:
        raise FitError(f"need at least 4 points in the window, got {len(R)}")
    if np.any(I <= 0):
        raise FitError("nonpositive annulus integral in the fit window")
    y = np.log(I)
    rate, c0 = np.polyfit(R, y, 1)
    resid = y - (rate * R + c0)
    return float(rate), float(math.exp(c0)), float(np.sqrt(np.mean(resid**2)))


@dataclass
class GrowthReport:
    R: list[float]
    G: list[float]
    G_over_R: list[float]
    loglog_slope: float
    verdict: str
    certificate: bool
    caveat: str = "o(R) cannot be decided on a finite horizon; the verdict reflects the log-log slope of G"

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def growth_condition_check(e: EndModel, f: ScalarProfile, R_max: float, step: float = 1.0,
                           slope_cut: float = 0.5) -> GrowthReport:
    """``G(R) = int_{r_rho <= R} rho f^2 exp(-2 r_rho) dV`` and a horizon verdict on ``G = o(R)``.

    The verdict is based on the slope of ``log G`` against ``log R`` over
    the outer half of the horizon: bounded ``G`` gives slope near 0,
    linear growth gives slope near 1.
    """
    tab = e.rho_table
    if R_max > tab.R_range[1] + 1e-12:
        raise RangeError(f"rho table reaches r_rho = {tab.R_range[1]}, need {R_max}")
    dens = _density(e, f, extra=lambda r: np.exp(-2.0 * np.asarray(tab.distance(r))))
    Rs = np.arange(step, R_max + 0.5 * step, step)
    G = np.empty(len(Rs))
    acc, prev = 0.0, tab.inverse(0.0)
    for i, R in enumerate(Rs):
        r = tab.inverse(R)
        acc += P.integrate(dens, prev, r, tol=1e-300)
        G[i], prev = acc, r
    outer = Rs >= 0.5 * Rs[-1]
    if np.all(G[outer] > 0) and outer.sum() >= 2:
        slope = float(np.polyfit(np.log(Rs[outer]), np.log(G[outer]), 1)[0])
    else:
        slope = 0.0
    ok = slope < slope_cut
    return GrowthReport(Rs.tolist(), G.tolist(), (G / Rs).tolist(), slope,
                        "satisfied-on-horizon" if ok else "fails-on-horizon (G grows like R)", ok)


def bounded_harmonic_profile(m: WarpedModel, r0: float) -> ScalarProfile:
    """``1 - T(r)/T(r0)`` with ``T(r) = int_r^inf A^-1``: harmonic, bounded, not decaying."""
    inv_area = m.inverse_area_profile()
    T0 = P.improper_tail(inv_area, r0, TailPolicy())
    if not T0.converges:
        raise SolverError("model is parabolic; no bounded nonconstant harmonic profile")

    def f(r):
        return P.integrate(inv_area, r0, float(r), tol=1e-14) / T0.value

    return ScalarProfile(f, r0, m.eta.t_hi, lambda r: np.asarray(inv_area.fn(r)) / T0.value,
                         name="bounded_harmonic", vectorized=False)


def corollary22_rescale(lambda1_E: float, mu: float) -> float:
    """``a = sqrt(lambda1(E) - mu)``; the decay metric is then ``a^2 ds^2``."""
    if mu >= lambda1_E:
        raise HypothesisViolation(f"need mu < lambda1(E), got mu = {mu}, lambda1 = {lambda1_E}")
    return math.sqrt(lambda1_E - mu)
