"""Parabolic and nonparabolic ends of radial models, from the level-area profile."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import profiles as P
from .errors import DomainError, FitError
from .profiles import ScalarProfile, TailPolicy, TailResult
from .rho_metric import RhoDistanceTable
from .weights import WeightProfile

Status = Literal["parabolic", "nonparabolic", "inconclusive"]


@dataclass(frozen=True)
class EndProfile:
    A: ScalarProfile
    r0: float = 1.0
    label: str = ""

    def __post_init__(self):
        lo, hi = self.A.domain
        if not lo <= self.r0 < hi:
            raise DomainError(f"r0 = {self.r0} outside area domain [{lo}, {hi}]")
        if float(self.A.fn(self.r0)) <= 0:
            raise DomainError("boundary area must be positive")

    def inverse_area(self) -> ScalarProfile:
        f = self.A.fn
        return ScalarProfile(lambda r: 1.0 / np.asarray(f(r), dtype=float), self.r0, self.A.t_hi,
                             name=f"1/{self.A.name}", vectorized=self.A.vectorized)


@dataclass(frozen=True)
class Classification:
    status: Status
    evidence: TailResult
    label: str = ""

    def to_dict(self) -> dict:
        return {"label": self.label, "status": self.status, "evidence": self.evidence.to_dict()}


def classify_end(e: EndProfile, policy: TailPolicy | None = None) -> Classification:
    """Nonparabolic iff ``int A^-1`` converges along the end."""
    res = P.improper_tail(e.inverse_area(), e.r0, policy)
    status = {"converges": "nonparabolic", "diverges": "parabolic"}.get(res.status, "inconclusive")
    return Classification(status, res, e.label)


# handy area profiles for the standard ends

def euclidean_end(n: int, r0: float = 1.0) -> EndProfile:
    vol = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
    return EndProfile(P.power(float(n - 1), vol), r0, f"R^{n}")


def hyperbolic_end(n: int, r0: float = 1.0) -> EndProfile:
    vol = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
    A = ScalarProfile(lambda r: vol * np.sinh(np.asarray(r, dtype=float)) ** (n - 1), 0.0, math.inf, name="sinh area")
    return EndProfile(A, r0, f"H^{n}")


def cylinder_end(area: float = 2 * math.pi, r0: float = 1.0) -> EndProfile:
    return EndProfile(P.constant(area, 0.0, math.inf), r0, "cylinder")


@dataclass
class VolumeReport:
    R: list[float]
    V: list[float]
    ratio_inf: float
    loglog_slope: float
    passed: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def volume_growth_check(e: EndProfile, R_max: float, samples: int = 40, slope_tol: float = 0.05) -> VolumeReport:
    """``V_E(R) = int_{r0}^R A``; a nonparabolic end needs at least quadratic growth.

    ``inf V/R^2`` over a finite horizon is always positive, so the pass
    decision uses the log-log slope of ``V`` over the outer half.
    """
    Rs = np.geomspace(e.r0 + 1.0, R_max, samples)
    V = np.empty(samples)
    acc, prev = 0.0, e.r0
    for i, R in enumerate(Rs):
        acc += P.integrate(e.A, prev, float(R), tol=1e-300)
        V[i], prev = acc, float(R)
    outer = Rs >= math.sqrt(Rs[0] * Rs[-1])
    slope = float(np.polyfit(np.log(Rs[outer]), np.log(V[outer]), 1)[0])
    return VolumeReport(Rs.tolist(), V.tolist(), float(np.min(V / Rs**2)), slope, slope >= 2.0 - slope_tol)


@dataclass
class BoundsReport:
    status: str
    R: list[float]
    J: list[float]
    slope: float
    C: float
    total: float | None
    passed: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def fit_exponential(R, J) -> tuple[float, float]:
    R, J = np.asarray(R, float), np.asarray(J, float)
    if len(R) < 2 or np.any(J <= 0):
        raise FitError("need positive integrals at two or more radii")
    slope, c0 = np.polyfit(R, np.log(J), 1)
    return float(slope), float(math.exp(c0))


def theorem31_bounds(e: EndProfile, w: WeightProfile, table: RhoDistanceTable, status: Status,
                     R_range: tuple[float, float], tol: float = 0.02) -> BoundsReport:
    """Exponential growth (nonparabolic) or decay (parabolic) of the rho-mass of rho-annuli.

    Nonparabolic: ``J(R) = int_{R <= r_rho <= R+1} rho A`` should grow at
    least like ``e^{2R}``.  Parabolic: ``int_E rho A`` is finite and the
    tail ``int_{r_rho >= R} rho A`` decays at least like ``e^{-2R}``.
    """
    rho, A = w.rho.fn, e.A.fn
    dens = ScalarProfile(lambda r: np.asarray(rho(r)) * np.asarray(A(r)), e.r0, e.A.t_hi,
                         name="rho A", vectorized=w.rho.vectorized and e.A.vectorized)
    Rs = np.arange(math.ceil(R_range[0]), math.floor(R_range[1]) + 1, dtype=float)
    if status == "nonparabolic":
        J = [P.integrate(dens, table.inverse(R), table.inverse(R + 1), tol=1e-300) for R in Rs]
        slope, C = fit_exponential(Rs, J)
        return BoundsReport(status, Rs.tolist(), J, slope, C, None, slope >= 2.0 - tol)
    if status == "parabolic":
        tot = P.improper_tail(dens, e.r0)
        if not tot.converges:
            return BoundsReport(status, Rs.tolist(), [], float("nan"), float("nan"), None, False)
        tails = [P.improper_tail(dens, table.inverse(R)) for R in Rs]
        if not all(t.converges for t in tails):
            raise FitError("tail integral undecided at some radius")
        J = [t.value for t in tails]
        slope, C = fit_exponential(Rs, J)
        return BoundsReport(status, Rs.tolist(), J, slope, C, tot.value, slope <= -2.0 + tol)
    raise ValueError(f"status must be decided, got {status!r}")


def schwarz_gap(w: WeightProfile, e: EndProfile, R: float) -> float:
    """``(int rho A)(int A^-1) - (int sqrt rho)^2`` over ``[r0, R]``; never negative."""
    rho, A = w.rho.fn, e.A.fn
    a = P.integrate(ScalarProfile(lambda r: np.asarray(rho(r)) * np.asarray(A(r)), e.r0, e.A.t_hi,
                                  vectorized=w.rho.vectorized), e.r0, R)
    b = P.integrate(e.inverse_area(), e.r0, R)
    c = P.integrate(w.sqrt_profile(), e.r0, R)
    return a * b - c * c
