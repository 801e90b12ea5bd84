"""One-variable real functions: evaluation, derivatives, quadrature, tails.

Every other module consumes :class:`ScalarProfile`.  A profile is an
evaluator on an interval plus optional analytic first and second
derivatives; when those are missing, central differences are used.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Literal, Sequence

import numpy as np
from scipy import integrate as _spi
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from .errors import BoundaryError, DomainError, QuadratureError

Func = Callable[[float], float]
EndKind = Literal["finite", "truncated"]

DEFAULT_TOL = 1e-10
# QUADPACK subdivision cap; plays the role of a recursion-depth cap.
QUAD_LIMIT = 400

__all__ = [
    "ScalarProfile",
    "GridSpec",
    "TailPolicy",
    "TailResult",
    "evaluate",
    "derivative",
    "integrate",
    "improper_tail",
    "from_samples",
    "from_hermite",
    "from_csv",
    "builtin",
    "constant",
    "identity",
    "exponential",
    "cosh",
    "sinh",
    "power",
]


@dataclass(frozen=True)
class ScalarProfile:
    """A real function of one variable on ``[t_lo, t_hi]``.

    ``d1``/``d2`` are analytic derivatives; any that are ``None`` are
    replaced by central differences with step ``fd_step`` (default
    ``1e-5 * max(1, |t|)``).  ``vectorized`` says whether ``fn`` (and the
    derivatives) accept numpy arrays.
    """

    fn: Func
    t_lo: float = -math.inf
    t_hi: float = math.inf
    d1: Func | None = None
    d2: Func | None = None
    lo_kind: EndKind = "truncated"
    hi_kind: EndKind = "truncated"
    fd_step: float | None = None
    name: str = ""
    vectorized: bool = True

    def __post_init__(self):
        if not self.t_lo < self.t_hi:
            raise DomainError(f"empty domain [{self.t_lo}, {self.t_hi}]")
        if self.fd_step is not None and self.fd_step <= 0:
            raise ValueError("fd_step must be positive")
        if math.isinf(self.t_lo):
            object.__setattr__(self, "lo_kind", "truncated")
        if math.isinf(self.t_hi):
            object.__setattr__(self, "hi_kind", "truncated")

    @property
    def domain(self) -> tuple[float, float]:
        return (self.t_lo, self.t_hi)

    @property
    def derivative_mode(self) -> str:
        return "analytic" if self.d1 is not None and self.d2 is not None else "finite-difference"

    def contains(self, t: float) -> bool:
        return self.t_lo <= t <= self.t_hi

    def __call__(self, t: float) -> float:
        return evaluate(self, t)

    def values(self, ts) -> np.ndarray:
        """Evaluate on an array of points (no per-point domain check)."""
        ts = np.asarray(ts, dtype=float)
        return _apply(self.fn, ts, self.vectorized)

    def derivative_values(self, ts, order: int = 1) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        analytic = self.d1 if order == 1 else self.d2
        if analytic is not None:
            return _apply(analytic, ts, self.vectorized)
        return np.array([derivative(self, float(t), order) for t in ts.ravel()]).reshape(ts.shape)

    def restrict(self, t_lo: float, t_hi: float) -> "ScalarProfile":
        if t_lo < self.t_lo or t_hi > self.t_hi:
            raise DomainError(f"[{t_lo}, {t_hi}] not inside {self.domain}")
        return _replace(self, t_lo=t_lo, t_hi=t_hi, lo_kind="finite", hi_kind="finite")

    def scaled(self, c: float) -> "ScalarProfile":
        return ScalarProfile(
            fn=lambda t, f=self.fn: c * f(t),
            t_lo=self.t_lo,
            t_hi=self.t_hi,
            d1=None if self.d1 is None else (lambda t, f=self.d1: c * f(t)),
            d2=None if self.d2 is None else (lambda t, f=self.d2: c * f(t)),
            lo_kind=self.lo_kind,
            hi_kind=self.hi_kind,
            fd_step=self.fd_step,
            name=f"{c:g}*{self.name}" if self.name else "",
            vectorized=self.vectorized,
        )


def _replace(p: ScalarProfile, **kw) -> ScalarProfile:
    return replace(p, **kw)


def _apply(fn: Func, ts: np.ndarray, vectorized: bool) -> np.ndarray:
    if vectorized:
        out = np.asarray(fn(ts), dtype=float)
        if out.shape == ts.shape:
            return out
        return np.broadcast_to(out, ts.shape).astype(float)
    return np.array([float(fn(float(t))) for t in ts.ravel()]).reshape(ts.shape)


def evaluate(p: ScalarProfile, t: float) -> float:
    """Value of ``p`` at ``t``; raises :class:`DomainError` outside the domain."""
    t = float(t)
    if not p.contains(t):
        raise DomainError(f"t = {t!r} outside domain [{p.t_lo}, {p.t_hi}] of {p.name or 'profile'}")
    with np.errstate(all="ignore"):
        v = float(p.fn(t))
    if not math.isfinite(v):
        raise DomainError(f"profile {p.name or ''} is not finite at t = {t!r}")
    return v


def _fd_step(p: ScalarProfile, t: float) -> float:
    return p.fd_step if p.fd_step is not None else 1e-5 * max(1.0, abs(t))


def derivative(p: ScalarProfile, t: float, order: int = 1) -> float:
    """First or second derivative of ``p`` at ``t``.

    Analytic when the profile carries the derivative, otherwise the
    three-point central difference (error O(h^2)).  The finite-difference
    stencil must fit, with a factor-two margin, inside the domain.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    t = float(t)
    analytic = p.d1 if order == 1 else p.d2
    if analytic is not None:
        if not p.contains(t):
            raise DomainError(f"t = {t!r} outside domain {p.domain}")
        with np.errstate(all="ignore"):
            v = float(analytic(t))
        if not math.isfinite(v):
            raise DomainError(f"derivative of order {order} not finite at t = {t!r}")
        return v
    h = _fd_step(p, t)
    if t - 2 * h < p.t_lo or t + 2 * h > p.t_hi:
        raise BoundaryError(f"finite-difference stencil at t = {t!r} (h = {h:g}) leaves {p.domain}")
    f = p.fn
    if order == 1:
        return (float(f(t + h)) - float(f(t - h))) / (2 * h)
    return (float(f(t + h)) - 2.0 * float(f(t)) + float(f(t - h))) / (h * h)


def _quad(fn: Func, a: float, b: float, tol: float, rel: float = 1e-13) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with np.errstate(all="ignore"):
            val, err, info = _spi.quad(
                fn, a, b, epsabs=tol, epsrel=rel, limit=QUAD_LIMIT, full_output=1
            )[:3]
    bound = max(tol, rel * abs(val))
    if not math.isfinite(val) or (err > 10 * bound and info.get("last", 0) >= QUAD_LIMIT):
        raise QuadratureError(f"quadrature on [{a:g}, {b:g}] failed: estimate {val!r}, error {err:.3g}")
    if err > 1e3 * bound:
        raise QuadratureError(f"quadrature on [{a:g}, {b:g}] did not converge (error {err:.3g})")
    return float(val)


def integrate(p: ScalarProfile, a: float, b: float, tol: float = DEFAULT_TOL) -> float:
    """Adaptive estimate of the integral of ``p`` from ``a`` to ``b``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = min(a, b), max(a, b)
    if lo < p.t_lo or hi > p.t_hi:
        raise DomainError(f"[{lo}, {hi}] not inside domain {p.domain}")
    if a == b:
        return 0.0
    sign = 1.0 if b > a else -1.0
    return sign * _quad(p.fn, lo, hi, tol)


# ---------------------------------------------------------------------------
# Improper integrals over [a, infinity)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TailPolicy:
    """Knobs for :func:`improper_tail`.

    Horizons ``H_k = H_0 * 2**k`` run from ``start`` to ``cap``.  The last
    ``window`` increments of the partial integrals decide the verdict:
    ratios all below ``decay_floor`` mean geometric convergence, ratios
    all above ``stall_ratio`` mean divergence, and anything in between is
    fitted against a power of ``log H`` whose exponent must clear 1 by
    ``power_margin`` one way or the other.
    """

    start: float = 1e3
    cap: float = 1e9
    rel_tol: float = 1e-12
    decay_floor: float = 0.9
    stall_ratio: float = 0.99
    power_margin: float = 0.25
    window: int = 4
    tol: float = 1e-13


@dataclass(frozen=True)
class TailResult:
    status: Literal["converges", "diverges", "inconclusive"]
    value: float | None
    horizons: tuple[float, ...] = ()
    partials: tuple[float, ...] = ()
    reason: str = ""

    @property
    def converges(self) -> bool:
        return self.status == "converges"

    @property
    def diverges(self) -> bool:
        return self.status == "diverges"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "value": self.value,
            "reason": self.reason,
            "horizons": list(self.horizons),
            "partials": list(self.partials),
        }


def _log_partition(a: float, b: float) -> list[float]:
    pts = [a]
    step = 1.0
    while pts[-1] + step < b:
        pts.append(pts[-1] + step)
        step *= 2.0
    pts.append(b)
    return pts


def improper_tail(p: ScalarProfile, a: float, policy: TailPolicy | None = None) -> TailResult:
    """Decide whether the integral of ``p >= 0`` over ``[a, inf)`` converges.

    Partial integrals are accumulated over doubled horizons.  On
    convergence the value is extrapolated past the last horizon (a
    geometric series for geometric increments, a power of ``log H`` for
    logarithmic ones).
    """
    pol = policy or TailPolicy()
    if a < p.t_lo:
        raise DomainError(f"a = {a} below domain {p.domain}")
    h0 = max(pol.start, 2.0 * a) if a > 0 else max(pol.start, a + pol.start)
    cap = min(pol.cap, p.t_hi) if p.hi_kind == "finite" else pol.cap
    if math.isfinite(p.t_hi):
        cap = min(cap, p.t_hi)
    if h0 >= cap:
        h0 = cap
    horizons: list[float] = []
    partials: list[float] = []

    def piece(lo: float, hi: float) -> float | None:
        # None flags an integrand that overflows: the partial integral is infinite
        try:
            return _quad(p.fn, lo, hi, pol.tol, 1e-12)
        except QuadratureError:
            with np.errstate(all="ignore"):
                probe = np.asarray(p.fn(np.linspace(lo, hi, 65)), dtype=float)
            if np.any(np.isposinf(probe)) or np.nanmax(probe) > 1e300:
                return None
            raise

    head = 0.0
    pts = _log_partition(a, h0)
    for lo, hi in zip(pts[:-1], pts[1:]):
        v = piece(lo, hi)
        if v is None:
            return TailResult("diverges", None, (hi,), (math.inf,), "integrand overflows")
        head += v
    horizons.append(h0)
    partials.append(head)
    h = h0
    while h * 2.0 <= cap * (1 + 1e-12):
        inc = piece(h, 2.0 * h)
        h *= 2.0
        if inc is None:
            horizons.append(h)
            partials.append(math.inf)
            return TailResult("diverges", None, tuple(horizons), tuple(partials), "integrand overflows")
        horizons.append(h)
        partials.append(partials[-1] + inc)
    hz, ps = tuple(horizons), tuple(partials)
    total = partials[-1]
    incs = np.diff(partials)
    w = pol.window
    if len(incs) < w + 1:
        return TailResult("inconclusive", None, hz, ps, "too few horizon doublings")
    last = incs[-(w + 1):]
    if np.all(np.abs(last) <= pol.rel_tol * max(abs(total), 1e-300)) or np.all(last == 0):
        return TailResult("converges", total, hz, ps, "increments negligible")
    if np.any(last[1:] <= 0) and np.all(last[1:] >= -pol.rel_tol * abs(total)):
        return TailResult("converges", total, hz, ps, "increments vanish")
    if np.any(last <= 0):
        return TailResult("inconclusive", None, hz, ps, "non-positive increments; integrand not >= 0")
    ratios = last[1:] / last[:-1]
    if np.all(ratios <= pol.decay_floor):
        q = float(ratios[-1])
        tail = float(last[-1]) * q / (1.0 - q)
        return TailResult("converges", total + tail, hz, ps, f"geometric increments (ratio {q:.4g})")
    if np.all(ratios >= pol.stall_ratio):
        return TailResult("diverges", None, hz, ps, f"increments do not shrink (ratio {ratios[-1]:.4g})")
    if float(ratios.max() - ratios.min()) < 1e-3 and ratios[-1] < 1.0:
        q = float(ratios[-1])
        tail = float(last[-1]) * q / (1.0 - q)
        return TailResult("converges", total + tail, hz, ps, f"slow geometric increments (ratio {q:.4g})")
    # sub-geometric: increments ~ C * (log H)^(-s)
    logs = np.log(np.asarray(horizons[-(w + 1):]))
    s, logc = np.polyfit(np.log(logs), np.log(last), 1)
    s = -float(s)
    if s >= 1.0 + pol.power_margin:
        ln2 = math.log(2.0)
        lk = float(logs[-1]) + 0.5 * ln2
        tail = math.exp(logc) * lk ** (1.0 - s) / ((s - 1.0) * ln2)
        return TailResult("converges", total + tail, hz, ps, f"logarithmic increments (power {s:.3g})")
    if s <= 1.0 - pol.power_margin:
        return TailResult("diverges", None, hz, ps, f"logarithmic increments (power {s:.3g}) too slow")
    return TailResult("inconclusive", None, hz, ps, f"borderline logarithmic power {s:.3g}")


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Node layout on ``[a, b]``.

    ``grading="geometric"`` grows successive spacings by ``ratio``; with
    ``ratio=None`` the nodes are log-uniform (requires ``a > 0``).
    """

    node_count: int
    a: float
    b: float
    grading: Literal["uniform", "geometric"] = "uniform"
    ratio: float | None = None

    def __post_init__(self):
        if self.node_count < 3:
            raise ValueError("node_count must be >= 3")
        if not self.a < self.b:
            raise ValueError("GridSpec needs a < b")
        if self.grading not in ("uniform", "geometric"):
            raise ValueError(f"unknown grading {self.grading!r}")
        if self.ratio is not None and self.ratio <= 0:
            raise ValueError("geometric ratio must be positive")
        if self.grading == "geometric" and self.ratio is None and self.a <= 0:
            raise ValueError("log-uniform grading needs a > 0")

    def nodes(self) -> np.ndarray:
        n, a, b = self.node_count, self.a, self.b
        if self.grading == "uniform":
            x = np.linspace(a, b, n)
        elif self.ratio is None:
            x = np.geomspace(a, b, n)
        else:
            q = self.ratio
            steps = q ** np.arange(n - 1) if q != 1 else np.ones(n - 1)
            x = a + (b - a) * np.concatenate([[0.0], np.cumsum(steps) / steps.sum()])
        x[0], x[-1] = a, b
        return x


# ---------------------------------------------------------------------------
# Sampled profiles
# ---------------------------------------------------------------------------


def from_samples(ts: Sequence[float], vs: Sequence[float], name: str = "samples") -> ScalarProfile:
    """Monotone cubic (PCHIP) interpolant through the samples."""
    ts = np.asarray(ts, dtype=float)
    vs = np.asarray(vs, dtype=float)
    if ts.ndim != 1 or ts.shape != vs.shape or ts.size < 2:
        raise ValueError("samples must be two equal-length 1-D sequences with >= 2 points")
    if np.any(np.diff(ts) <= 0):
        raise ValueError("sample abscissae must be strictly increasing")
    if not np.all(np.isfinite(vs)):
        raise ValueError("sample values must be finite")
    spl = PchipInterpolator(ts, vs, extrapolate=False)
    s1, s2 = spl.derivative(1), spl.derivative(2)
    return ScalarProfile(
        fn=spl, d1=s1, d2=s2, t_lo=float(ts[0]), t_hi=float(ts[-1]),
        lo_kind="finite", hi_kind="finite", name=name,
    )


def from_hermite(ts, vs, dvs, ddvs=None, name: str = "hermite") -> ScalarProfile:
    """Cubic Hermite interpolant from values and first derivatives.

    When ``ddvs`` (second derivatives at the nodes) is given, the first
    derivative is itself Hermite-interpolated from ``(dvs, ddvs)``.
    """
    ts = np.asarray(ts, dtype=float)
    spl = CubicHermiteSpline(ts, np.asarray(vs, float), np.asarray(dvs, float), extrapolate=False)
    if ddvs is None:
        d1, d2 = spl.derivative(1), spl.derivative(2)
    else:
        dspl = CubicHermiteSpline(ts, np.asarray(dvs, float), np.asarray(ddvs, float), extrapolate=False)
        d1, d2 = dspl, dspl.derivative(1)
    return ScalarProfile(
        fn=spl, d1=d1, d2=d2, t_lo=float(ts[0]), t_hi=float(ts[-1]),
        lo_kind="finite", hi_kind="finite", name=name,
    )


def from_csv(path: str | Path, name: str | None = None) -> ScalarProfile:
    """Read a two-column ``t,value`` CSV (header optional) into a profile."""
    path = Path(path)
    ts: list[float] = []
    vs: list[float] = []
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise ValueError(f"{path}:{lineno}: expected two columns, got {len(row)}")
            try:
                t, v = float(row[0]), float(row[1])
            except ValueError:
                if lineno == 1 and not ts:
                    continue  # header
                raise ValueError(f"{path}:{lineno}: non-numeric entry {row[:2]!r}") from None
            if ts and t <= ts[-1]:
                raise ValueError(f"{path}:{lineno}: t values must be strictly increasing")
            ts.append(t)
            vs.append(v)
    if len(ts) < 2:
        raise ValueError(f"{path}: need at least two samples")
    return from_samples(ts, vs, name=name or path.stem)


# ---------------------------------------------------------------------------
# Closed-form builtins (analytic derivatives)
# ---------------------------------------------------------------------------


def constant(c: float = 1.0, t_lo: float = -math.inf, t_hi: float = math.inf) -> ScalarProfile:
    z = lambda t: np.zeros_like(np.asarray(t, dtype=float))
    return ScalarProfile(
        fn=lambda t: c + z(t), d1=z, d2=z, t_lo=t_lo, t_hi=t_hi, name=f"const({c:g})"
    )


def identity(t_lo: float = 0.0, t_hi: float = math.inf, slope: float = 1.0, offset: float = 0.0) -> ScalarProfile:
    """``offset + slope * t``; the default is eta(r) = r of Euclidean space."""
    z = lambda t: np.zeros_like(np.asarray(t, dtype=float))
    return ScalarProfile(
        fn=lambda t: offset + slope * np.asarray(t, dtype=float),
        d1=lambda t: slope + z(t),
        d2=z,
        t_lo=t_lo,
        t_hi=t_hi,
        lo_kind="finite" if math.isfinite(t_lo) else "truncated",
        name="linear",
    )


def exponential(a: float = 1.0, scale: float = 1.0, t_lo: float = -math.inf, t_hi: float = math.inf) -> ScalarProfile:
    return ScalarProfile(
        fn=lambda t: scale * np.exp(a * np.asarray(t, dtype=float)),
        d1=lambda t: scale * a * np.exp(a * np.asarray(t, dtype=float)),
        d2=lambda t: scale * a * a * np.exp(a * np.asarray(t, dtype=float)),
        t_lo=t_lo,
        t_hi=t_hi,
        name=f"exp({a:g}t)",
    )


def cosh(t_lo: float = -math.inf, t_hi: float = math.inf) -> ScalarProfile:
    return ScalarProfile(fn=np.cosh, d1=np.sinh, d2=np.cosh, t_lo=t_lo, t_hi=t_hi, name="cosh")


def sinh(t_lo: float = 0.0, t_hi: float = math.inf) -> ScalarProfile:
    return ScalarProfile(
        fn=np.sinh, d1=np.cosh, d2=np.sinh, t_lo=t_lo, t_hi=t_hi,
        lo_kind="finite" if math.isfinite(t_lo) else "truncated", name="sinh",
    )


def power(p: float, c: float = 1.0, t_lo: float = 0.0, t_hi: float = math.inf) -> ScalarProfile:
    """``c * t**p`` on ``(t_lo, t_hi]``; ``t_lo`` must be >= 0."""

    def f(t):
        return c * np.power(np.asarray(t, dtype=float), p)

    def f1(t):
        return c * p * np.power(np.asarray(t, dtype=float), p - 1)

    def f2(t):
        return c * p * (p - 1) * np.power(np.asarray(t, dtype=float), p - 2)

    return ScalarProfile(
        fn=f, d1=f1, d2=f2, t_lo=t_lo, t_hi=t_hi,
        lo_kind="finite" if math.isfinite(t_lo) else "truncated", name=f"{c:g}*t^{p:g}",
    )


_BUILTINS: dict[str, Callable[..., ScalarProfile]] = {
    "constant": constant,
    "one": lambda **kw: constant(1.0, **kw),
    "linear": identity,
    "r": identity,
    "exp": exponential,
    "cosh": cosh,
    "sinh": sinh,
    "power": power,
}


def builtin(name: str, **params) -> ScalarProfile:
    """Look up a closed-form profile by name (``constant``, ``r``, ``exp``, ...)."""
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown builtin profile {name!r}; choose from {sorted(_BUILTINS)}") from None
    return factory(**params)
