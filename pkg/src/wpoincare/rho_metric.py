"""The conformal metric ``rho ds^2`` on radial models.

Distance tables ``r -> r_rho(r) = int_{r0}^r sqrt(rho)``, completeness of
the rho-metric along an end, the sup of ``sqrt(rho)`` over rho-balls and
the growth gauge ``S(R)/F(R)`` used by the two-end rigidity theorems.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq, minimize_scalar

from . import profiles as P
from .errors import DegenerateError, DomainError, RangeError
from .profiles import GridSpec, TailPolicy, TailResult
from .weights import WeightProfile

EndSelector = Literal["outer", "inner"]

__all__ = [
    "RhoDistanceTable",
    "CompletenessVerdict",
    "CriterionReport",
    "build_rho_distance",
    "completeness_check",
    "sup_sqrt_rho",
    "growth_gauge",
    "growth_criterion",
]


@dataclass(frozen=True)
class RhoDistanceTable:
    """Monotone table of ``r_rho`` on a grid, interpolated by cubic Hermite.

    The Hermite slopes are the exact ``sqrt(rho)`` at the nodes, so the
    interpolant reproduces ``|grad r_rho|^2 = rho`` there.
    """

    r0: float
    grid: np.ndarray
    r_rho: np.ndarray
    slope: np.ndarray
    weight: WeightProfile = field(repr=False)

    def __post_init__(self):
        spl = CubicHermiteSpline(self.grid, self.r_rho, self.slope, extrapolate=False)
        object.__setattr__(self, "_spline", spl)

    @property
    def r_range(self) -> tuple[float, float]:
        return float(self.grid[0]), float(self.grid[-1])

    @property
    def R_range(self) -> tuple[float, float]:
        return float(self.r_rho[0]), float(self.r_rho[-1])

    def _in_range(self, r):
        lo, hi = self.r_range
        r = np.asarray(r, dtype=float)
        if np.any(r < lo - 1e-12 * max(1, abs(lo))) or np.any(r > hi + 1e-12 * max(1, abs(hi))):
            raise RangeError(f"r outside table range [{lo}, {hi}]")
        return np.clip(r, lo, hi)

    def distance(self, r):
        """``r_rho(r)``; scalar in, float out; arrays map elementwise."""
        rr = self._in_range(r)
        out = self._spline(rr)
        return float(out) if np.ndim(out) == 0 else out

    def distance_exact(self, r: float) -> float:
        """``r_rho(r)`` by quadrature from the nearest lower node."""
        r = float(self._in_range(r))
        i = int(np.clip(np.searchsorted(self.grid, r, side="right") - 1, 0, len(self.grid) - 1))
        return float(self.r_rho[i]) + P.integrate(self.weight.sqrt_profile(), float(self.grid[i]), r, tol=1e-14)

    def slope_at(self, r):
        rr = self._in_range(r)
        out = self._spline(rr, 1)
        return float(out) if np.ndim(out) == 0 else out

    def inverse(self, R: float) -> float:
        """The ``r`` with ``r_rho(r) = R``."""
        R = float(R)
        lo, hi = self.R_range
        if R < lo - 1e-12 or R > hi + 1e-12 * max(1.0, abs(hi)):
            raise RangeError(f"R = {R} outside table range [{lo}, {hi}]")
        R = min(max(R, lo), hi)
        i = int(np.searchsorted(self.r_rho, R, side="left"))
        if i < len(self.r_rho) and self.r_rho[i] == R:
            return float(self.grid[i])
        a, b = float(self.grid[i - 1]), float(self.grid[i])
        return brentq(lambda r: float(self._spline(r)) - R, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["r", "r_rho"])
            for r, d in zip(self.grid, self.r_rho):
                wr.writerow([repr(float(r)), repr(float(d))])


def build_rho_distance(w: WeightProfile, r0: float, grid: GridSpec) -> RhoDistanceTable:
    """Tabulate ``r_rho(r) = int_{r0}^r sqrt(rho)`` on ``grid`` (``r0`` is inserted)."""
    lo, hi = w.rho.domain
    if not lo <= r0 <= hi:
        raise DomainError(f"base point r0 = {r0} outside weight domain [{lo}, {hi}]")
    nodes = grid.nodes()
    if nodes[0] < lo or nodes[-1] > hi:
        raise DomainError(f"grid [{nodes[0]}, {nodes[-1]}] leaves weight domain [{lo}, {hi}]")
    if not nodes[0] <= r0 <= nodes[-1]:
        raise DomainError(f"r0 = {r0} outside grid [{nodes[0]}, {nodes[-1]}]")
    nodes = np.unique(np.append(nodes, r0))
    sq = w.sqrt_profile()
    cells = np.array([P.integrate(sq, float(a), float(b), tol=1e-14) for a, b in zip(nodes[:-1], nodes[1:])])
    cum = np.concatenate([[0.0], np.cumsum(cells)])
    i0 = int(np.searchsorted(nodes, r0))
    cum -= cum[i0]
    slope = np.asarray(sq.values(nodes), dtype=float)
    if np.any(np.diff(cum) < 0):
        raise DegenerateError("rho-distance is not monotone; is rho negative somewhere?")
    return RhoDistanceTable(float(r0), nodes, cum, slope, w)


@dataclass(frozen=True)
class CompletenessVerdict:
    status: Literal["complete", "incomplete", "inconclusive"]
    evidence: TailResult
    end: str = "outer"

    def to_dict(self) -> dict:
        return {"status": self.status, "end": self.end, "evidence": self.evidence.to_dict()}


def completeness_check(w: WeightProfile, end: EndSelector = "outer", start: float | None = None,
                       policy: TailPolicy | None = None) -> CompletenessVerdict:
    """Complete iff the rho-length of the ray toward ``end`` is infinite."""
    sq = w.sqrt_profile()
    lo, hi = sq.domain
    if end == "outer":
        if math.isfinite(hi):
            raise DomainError(f"no outer end: the domain stops at {hi}")
        a = start if start is not None else (1.0 if lo < 1.0 else lo + 1.0)
        res = P.improper_tail(sq, a, policy)
    elif end == "inner":
        if math.isfinite(lo):
            raise DomainError(f"no inner end: the domain stops at {lo}")
        a = start if start is not None else (-1.0 if hi > -1.0 else hi - 1.0)
        f = sq.fn
        flipped = P.ScalarProfile(lambda s: f(-np.asarray(s, dtype=float)), -hi, math.inf,
                                  name="reflected", vectorized=sq.vectorized)
        res = P.improper_tail(flipped, -a, policy)
    else:
        raise ValueError(f"unknown end selector {end!r}")
    status = {"diverges": "complete", "converges": "incomplete"}.get(res.status, "inconclusive")
    return CompletenessVerdict(status, res, end)


def sup_sqrt_rho(table: RhoDistanceTable, w: WeightProfile, R: float) -> float:
    """``S(R)``: max of ``sqrt(rho)`` over ``{|r_rho| <= R}``, grid scan plus local refinement."""
    if R < 0:
        raise ValueError("R must be >= 0")
    if R > max(abs(table.R_range[0]), abs(table.R_range[1])) + 1e-12:
        raise RangeError(f"R = {R} beyond table range {table.R_range}")
    lo_r = table.inverse(max(-R, table.R_range[0]))
    hi_r = table.inverse(min(R, table.R_range[1]))
    inside = table.grid[(table.grid >= lo_r) & (table.grid <= hi_r)]
    pts = np.unique(np.concatenate([[lo_r, hi_r], inside]))
    sq = w.sqrt_profile()
    vals = sq.values(pts)
    k = int(np.argmax(vals))
    best = float(vals[k])
    a = float(pts[max(k - 1, 0)])
    b = float(pts[min(k + 1, len(pts) - 1)])
    if b > a:
        res = minimize_scalar(lambda r: -float(sq.fn(r)), bounds=(a, b), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, abs(b))})
        if res.success:
            best = max(best, -float(res.fun))
    return best


def growth_gauge(n: int, R):
    """``F(R)``: ``exp((n-3)/(n-2) R)`` for ``n >= 4`` and ``R`` for ``n = 3``."""
    if n < 3:
        raise DegenerateError("growth gauge needs n >= 3")
    R = np.asarray(R, dtype=float)
    return R if n == 3 else np.exp((n - 3) / (n - 2) * R)


@dataclass
class CriterionReport:
    n: int
    R: list[float]
    S: list[float]
    F: list[float]
    ratio: list[float]
    running_min: list[float]
    threshold: float
    verdict: str
    caveat: str = (
        "liminf over an infinite horizon cannot be decided numerically; "
        "the verdict only describes the sampled horizon"
    )

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def growth_criterion(table: RhoDistanceTable, w: WeightProfile, n: int, R_max: float,
                     threshold: float = 0.01, step: float = 0.5) -> CriterionReport:
    """Sample ``S(R)/F(R)`` up to ``R_max`` and report a horizon-qualified verdict.

    The verdict is ``satisfied-on-horizon`` when the running minimum of the
    ratio drops below ``threshold`` times its first value.
    """
    if n < 3:
        raise DegenerateError("growth criterion needs n >= 3")
    Rs = np.arange(step, R_max + 1e-9 * step, step)
    S = np.array([sup_sqrt_rho(table, w, float(R)) for R in Rs])
    F = growth_gauge(n, Rs)
    ratio = S / F
    run = np.minimum.accumulate(ratio)
    verdict = "satisfied-on-horizon" if run[-1] < threshold * ratio[0] else "not-satisfied-on-horizon"
    return CriterionReport(n, Rs.tolist(), S.tolist(), np.asarray(F).tolist(), ratio.tolist(),
                           run.tolist(), threshold, verdict)
