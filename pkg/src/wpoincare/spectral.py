"""Finite-element Dirichlet eigenproblems on radial models.

Piecewise-linear elements on a 1-D grid carry the radial quadratic forms

    K[phi] = int phi'^2 A,   M[phi] = int phi^2 A,   W[phi] = int rho phi^2 A,

with ``A = V_N eta^(n-1)`` the level-set area.  All three are tridiagonal.
The lowest generalized eigenvalue is located by bisection on the Sturm
count of ``K - lam M`` and its vector by shifted inverse iteration.

Every result only certifies the element subspace, not all test
functions; reports carry that caveat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy.linalg import solve_banded

from .errors import AssemblyError, DiagnosticsError, DomainError, FitError, SolverError
from .profiles import GridSpec, ScalarProfile
from .warped import WarpedModel
from .weights import WeightProfile

Operator = Literal["laplacian", "schrodinger"]

SUBSPACE_CAVEAT = (
    "minimum taken over the piecewise-linear element space only; "
    "it bounds the true infimum from above"
)

# 3-point Gauss-Legendre on [0, 1]
_GX = 0.5 + 0.5 * np.array([-math.sqrt(3 / 5), 0.0, math.sqrt(3 / 5)])
_GW = np.array([5 / 18, 8 / 18, 5 / 18])


@dataclass(frozen=True)
class DirichletProblem:
    model: WarpedModel
    interval: tuple[float, float]
    grid: GridSpec | None = None
    weight: WeightProfile | None = None
    potential: ScalarProfile | None = None

    def __post_init__(self):
        a, b = map(float, self.interval)
        if not a < b:
            raise DomainError(f"interval needs a < b, got {self.interval}")
        lo, hi = self.model.eta.domain
        if a < lo or b > hi:
            raise DomainError(f"interval [{a}, {b}] leaves model domain [{lo}, {hi}]")
        object.__setattr__(self, "interval", (a, b))
        if self.grid is None:
            object.__setattr__(self, "grid", GridSpec(2001, a, b))
        elif (self.grid.a, self.grid.b) != (a, b):
            raise DomainError("grid endpoints must coincide with the interval")

    def nodes(self) -> np.ndarray:
        return self.grid.nodes()


@dataclass(frozen=True)
class Tridiag:
    """Symmetric tridiagonal matrix stored as diagonal and off-diagonal."""

    diag: np.ndarray
    off: np.ndarray

    def __add__(self, other: "Tridiag") -> "Tridiag":
        return Tridiag(self.diag + other.diag, self.off + other.off)

    def __sub__(self, other: "Tridiag") -> "Tridiag":
        return Tridiag(self.diag - other.diag, self.off - other.off)

    def __rmul__(self, c: float) -> "Tridiag":
        return Tridiag(c * self.diag, c * self.off)

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        out[:-1] += self.off * v[1:]
        out[1:] += self.off * v[:-1]
        return out


@dataclass(frozen=True)
class Forms:
    stiffness: Tridiag
    mass: Tridiag
    weighted_mass: Tridiag
    potential_mass: Tridiag
    nodes: np.ndarray

    def operator(self, kind: Operator) -> Tridiag:
        if kind == "laplacian":
            return self.stiffness
        if kind == "schrodinger":
            return self.stiffness - self.weighted_mass + self.potential_mass
        raise ValueError(f"unknown operator {kind!r}")


def _coefficient(values: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise AssemblyError(f"{what} is not finite at some quadrature point")
    return values


def assemble_forms(p: DirichletProblem) -> Forms:
    """Assemble stiffness, mass and weighted mass on the interior nodes."""
    x = p.nodes()
    if len(x) < 3:
        raise AssemblyError("need at least one interior node")
    h = np.diff(x)
    q = x[:-1, None] + h[:, None] * _GX[None, :]  # (elements, 3)
    A = _coefficient(p.model.area_values(q.ravel()).reshape(q.shape), "area")
    wA = A * (_GW[None, :] * h[:, None])  # quadrature weights times area
    phi0, phi1 = 1.0 - _GX, _GX

    k_el = wA.sum(axis=1) / h**2
    m00 = (wA * phi0**2).sum(axis=1)
    m11 = (wA * phi1**2).sum(axis=1)
    m01 = (wA * phi0 * phi1).sum(axis=1)

    def element_mass(c):
        cw = wA * c
        return (cw * phi0**2).sum(axis=1), (cw * phi1**2).sum(axis=1), (cw * phi0 * phi1).sum(axis=1)

    def glue(e00, e11, e01) -> Tridiag:
        d = np.zeros(len(x))
        d[:-1] += e00
        d[1:] += e11
        return Tridiag(d[1:-1].copy(), e01[1:-1].copy())

    K = glue(k_el, k_el, -k_el)
    M = glue(m00, m11, m01)
    zero = Tridiag(np.zeros(len(x) - 2), np.zeros(len(x) - 3))
    W = zero
    if p.weight is not None:
        rho = _coefficient(p.weight.rho.values(q.ravel()).reshape(q.shape), "weight")
        W = glue(*element_mass(rho))
    V = zero
    if p.potential is not None:
        pot = _coefficient(p.potential.values(q.ravel()).reshape(q.shape), "potential")
        V = glue(*element_mass(pot))
    return Forms(K, M, W, V, x)


# ---------------------------------------------------------------------------
# Tridiagonal generalized eigenproblem
# ---------------------------------------------------------------------------


def sturm_count(K: Tridiag, M: Tridiag, lam: float) -> int:
    """Number of generalized eigenvalues of ``(K, M)`` below ``lam``.

    Counts the negative pivots of the LDL^T factorisation of ``K - lam M``
    (Sylvester's law of inertia).
    """
    a = (K.diag - lam * M.diag).tolist()
    b2 = ((K.off - lam * M.off) ** 2).tolist()
    tiny = 1e-300
    d = a[0]
    if d == 0.0:
        d = -tiny
    count = 1 if d < 0 else 0
    for i in range(1, len(a)):
        d = a[i] - b2[i - 1] / d
        if d == 0.0:
            d = -tiny
        if d < 0:
            count += 1
    return count


def _banded(T: Tridiag, shift: float, M: Tridiag) -> np.ndarray:
    n = len(T.diag)
    ab = np.zeros((3, n))
    off = T.off - shift * M.off
    ab[0, 1:] = off
    ab[1] = T.diag - shift * M.diag
    ab[2, :-1] = off
    return ab


@dataclass
class EigenResult:
    lambda1: float
    nodes: np.ndarray
    eigenvector: np.ndarray  # includes the two zero boundary values
    residual: float
    grid_size: int
    iterations: int = 0

    def to_dict(self) -> dict:
        return {"lambda1": self.lambda1, "residual": self.residual, "grid": self.grid_size}

    def eigenvector_rows(self) -> list[tuple[float, float]]:
        return [(float(r), float(v)) for r, v in zip(self.nodes, self.eigenvector)]


def lowest_eigenpair(K: Tridiag, M: Tridiag, tol: float = 1e-10, max_iter: int = 200) -> tuple[float, np.ndarray, int]:
    """Lowest eigenpair of the symmetric pencil ``(K, M)`` with ``M`` positive definite."""
    n = len(K.diag)
    # Rayleigh quotient of a positive bump is an upper bound
    v = np.sin(np.pi * (np.arange(n) + 1) / (n + 1))
    hi = float(v @ K.matvec(v) / (v @ M.matvec(v)))
    hi += 1e-12 * max(1.0, abs(hi))
    while sturm_count(K, M, hi) < 1:
        hi += max(1.0, abs(hi))
    width = max(1.0, abs(hi))
    lo = hi - width
    it = 0
    while sturm_count(K, M, lo) > 0:
        width *= 2.0
        lo = hi - width
        it += 1
        if it > max_iter:
            raise SolverError("could not bracket the lowest eigenvalue from below")
    while hi - lo > tol * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if sturm_count(K, M, mid) >= 1:
            hi = mid
        else:
            lo = mid
        it += 1
        if it > max_iter:
            raise SolverError(f"bisection did not reach tolerance {tol} in {max_iter} steps")
    lam = 0.5 * (lo + hi)

    # inverse iteration, shifted just below the bracket
    shift = lo - tol * max(1.0, abs(lo))
    ab = _banded(K, shift, M)
    x = np.ones(n)
    for _ in range(6):
        x = solve_banded((1, 1), ab, M.matvec(x))
        x /= math.sqrt(float(x @ M.matvec(x)))
    if x[int(np.argmax(np.abs(x)))] < 0:
        x = -x
    rq = float(x @ K.matvec(x))  # x is M-normalised
    if lo - tol * max(1.0, abs(lo)) <= rq <= hi + tol * max(1.0, abs(hi)):
        lam = rq
    return lam, x, it


def relative_residual(K: Tridiag, M: Tridiag, lam: float, v: np.ndarray) -> float:
    """``||K v - lam M v|| / (||K v|| + |lam| ||M v||)``, scale free."""
    Kv, Mv = K.matvec(v), M.matvec(v)
    den = np.linalg.norm(Kv) + abs(lam) * np.linalg.norm(Mv)
    return float(np.linalg.norm(Kv - lam * Mv) / den) if den > 0 else 0.0


def principal_eigenvalue(p: DirichletProblem, operator: Operator = "laplacian",
                         tol: float = 1e-10, forms: Forms | None = None) -> EigenResult:
    f = forms or assemble_forms(p)
    T = f.operator(operator)
    lam, v, it = lowest_eigenpair(T, f.mass, tol)
    full = np.concatenate([[0.0], v, [0.0]])
    return EigenResult(lam, f.nodes, full, relative_residual(T, f.mass, lam, v), len(f.nodes), it)


# ---------------------------------------------------------------------------
# Verification and exhaustion
# ---------------------------------------------------------------------------


@dataclass
class VerificationReport:
    minimum: float
    passed: bool
    tolerance: float
    grid_size: int
    nodes: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    residual: float = 0.0
    caveat: str = SUBSPACE_CAVEAT

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "minimum": self.minimum,
            "tolerance": self.tolerance,
            "grid": self.grid_size,
            "residual": self.residual,
            "caveat": self.caveat,
        }


def default_grid(m: WarpedModel, interval: tuple[float, float], node_count: int = 2001) -> GridSpec:
    """Log-uniform grid when the interval spans decades away from 0, else uniform."""
    a, b = interval
    if a > 0 and b / a > 100:
        return GridSpec(node_count, a, b, "geometric")
    return GridSpec(node_count, a, b)


def verify_weighted_poincare(w: WeightProfile, m: WarpedModel, interval: tuple[float, float],
                             grid: GridSpec | None = None, tol: float = 1e-8) -> VerificationReport:
    """Minimum of ``(K - W)[phi] / M[phi]`` over the Dirichlet element space."""
    g = grid or default_grid(m, interval)
    p = DirichletProblem(m, interval, g, weight=w)
    res = principal_eigenvalue(p, "schrodinger")
    return VerificationReport(res.lambda1, res.lambda1 >= -tol, tol, res.grid_size,
                              res.nodes, res.eigenvector, res.residual)


@dataclass
class BottomSpectrumReport:
    value: float
    radii: list[float]
    lambdas: list[float]
    slope: float
    node_count: int
    caveat: str = "Richardson fit lam(R) = lam_inf + c / R^2 over the exhaustion sequence"

    def __float__(self) -> float:
        return self.value

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def exhaustion_interval(m: WarpedModel, R: float, inner: float = 1e-3) -> tuple[float, float]:
    if m.domain_kind == "pole_model":
        return (inner, float(R))
    lo, hi = m.eta.domain
    a, b = max(lo, -float(R)), min(hi, float(R))
    return (a, b)


def bottom_spectrum(m: WarpedModel, R_sequence: Sequence[float], node_count: int = 10_000,
                    inner: float = 1e-3, mono_tol: float = 1e-10) -> BottomSpectrumReport:
    """Extrapolate Dirichlet ``lam_1(B(R))`` to ``R -> inf``."""
    radii = [float(r) for r in R_sequence]
    if len(radii) < 2 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise FitError("need an increasing sequence of at least two radii")
    lams = []
    for R in radii:
        iv = exhaustion_interval(m, R, inner)
        lams.append(principal_eigenvalue(DirichletProblem(m, iv, GridSpec(node_count, *iv))).lambda1)
    for a, b in zip(lams, lams[1:]):
        if b > a + mono_tol * max(1.0, abs(a)):
            raise DiagnosticsError(f"domain monotonicity violated: {lams}")
    X = np.column_stack([np.ones(len(radii)), 1.0 / np.square(radii)])
    (lam_inf, c), *_ = np.linalg.lstsq(X, np.array(lams), rcond=None)
    return BottomSpectrumReport(float(lam_inf), radii, lams, float(c), node_count)
