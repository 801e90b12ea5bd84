"""Warped products ``dt^2 + eta(t)^2 ds_N^2`` and radial models.

Curvature, the radial Laplacian, the explicit harmonic function
``f(t) = int eta^-(n-1)``, the Bochner residual for ``|grad f|`` and the
flux of ``grad f`` through level sets.  The fiber ``N`` is summarised by
a handful of scalars (:class:`FiberData`); it is never meshed.

All log-derivatives go through :meth:`WarpedModel.log_d1` and
:meth:`WarpedModel.log_d2`.  Models whose ``eta`` overflows (``cosh`` of
a fast-growing function, say) can supply ``log_eta`` directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import profiles as P
from .errors import ConfigurationError, DegenerateError, DomainError
from .profiles import ScalarProfile
from .weights import WeightProfile

DomainKind = Literal["full_line", "pole_model"]

__all__ = [
    "FiberData",
    "WarpedModel",
    "sectional_radial",
    "sectional_fiber",
    "ricci_radial",
    "ricci_fiber",
    "natural_weight",
    "radial_laplacian",
    "harmonic_profile",
    "gradient_norm",
    "g_power",
    "bochner_residual",
    "level_flux",
    "unit_sphere_fiber",
]


@dataclass(frozen=True)
class FiberData:
    """Scalar summary of the fiber ``N^(n-1)``.

    ``ricci_lower`` is ``inf Ric_N``; ``sectional`` and ``ricci_value`` are
    the (isotropic) sectional curvature and ``Ric_N(e_a, e_a)`` when the
    fiber is a space form.  ``compact`` is declared by the user, never
    inferred.
    """

    ricci_lower: float = 0.0
    volume: float = 1.0
    sectional: float | None = None
    ricci_value: float | None = None
    compact: bool = True

    def __post_init__(self):
        if not self.volume > 0:
            raise ValueError(f"fiber volume must be positive, got {self.volume}")


def unit_sphere_fiber(n: int) -> FiberData:
    """Round unit ``S^(n-1)``: ``K = 1``, ``Ric = n - 2``, area ``omega_(n-1)``."""
    vol = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
    return FiberData(ricci_lower=n - 2.0, volume=vol, sectional=1.0, ricci_value=n - 2.0)


@dataclass(frozen=True)
class WarpedModel:
    n: int
    eta: ScalarProfile
    fiber: FiberData = FiberData()
    domain_kind: DomainKind = "full_line"
    log_eta: ScalarProfile | None = None
    name: str = ""

    def __post_init__(self):
        if self.n < 3:
            raise DegenerateError(f"dimension must be >= 3, got {self.n}")
        if self.domain_kind not in ("full_line", "pole_model"):
            raise ValueError(f"unknown domain kind {self.domain_kind!r}")
        if self.domain_kind == "pole_model":
            if self.eta.t_lo != 0.0:
                raise ConfigurationError("pole model needs the eta domain to start at the pole t = 0")
            e0 = float(self.eta.fn(0.0))
            if self.eta.d1 is not None:
                d0 = float(self.eta.d1(0.0))
            else:
                h = 1e-6
                d0 = (float(self.eta.fn(h)) - e0) / h
            if abs(e0) > 1e-9 or abs(d0 - 1.0) > 1e-9:
                raise ConfigurationError(f"pole model needs eta(0) = 0 and eta'(0) = 1, got {e0}, {d0}")

    # -- pointwise data ---------------------------------------------------
    def _check(self, t: float) -> float:
        t = float(t)
        lo, hi = self.eta.domain
        if not lo <= t <= hi:
            raise DomainError(f"t = {t} outside model domain [{lo}, {hi}]")
        if self.domain_kind == "pole_model" and t == 0.0:
            raise DomainError("curvature queries at the pole are excluded")
        return t

    def log_eta_value(self, t: float) -> float:
        t = self._check(t)
        if self.log_eta is not None:
            return self.log_eta(t)
        v = self.eta(t)
        if v <= 0:
            raise DomainError(f"eta({t}) = {v} is not positive")
        return math.log(v)

    def log_d1(self, t: float) -> float:
        """``(log eta)'``."""
        t = self._check(t)
        if self.log_eta is not None:
            return P.derivative(self.log_eta, t, 1)
        return P.derivative(self.eta, t, 1) / self.eta(t)

    def log_d2(self, t: float) -> float:
        """``(log eta)''``."""
        t = self._check(t)
        if self.log_eta is not None:
            return P.derivative(self.log_eta, t, 2)
        e = self.eta(t)
        e1 = P.derivative(self.eta, t, 1)
        e2 = P.derivative(self.eta, t, 2)
        return e2 / e - (e1 / e) ** 2

    def ratio2(self, t: float) -> float:
        """``eta'' / eta``."""
        t = self._check(t)
        if self.log_eta is not None:
            return self.log_d2(t) + self.log_d1(t) ** 2
        return P.derivative(self.eta, t, 2) / self.eta(t)

    def eta_power(self, t: float, p: float) -> float:
        """``eta(t)**p`` computed through ``log eta`` (no overflow in ``eta``)."""
        return math.exp(p * self.log_eta_value(t))

    def area(self, t: float) -> float:
        """Area of the level ``{t} x N``: ``V_N eta^(n-1)``."""
        return self.fiber.volume * self.eta_power(t, self.n - 1)

    def _log_eta_values(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        if self.log_eta is not None:
            return self.log_eta.values(ts)
        with np.errstate(divide="ignore"):
            return np.log(self.eta.values(ts))

    def area_values(self, ts) -> np.ndarray:
        return self.fiber.volume * np.exp((self.n - 1) * self._log_eta_values(ts))

    def area_profile(self) -> ScalarProfile:
        lo, hi = self.eta.domain
        return ScalarProfile(self.area_values, lo, hi, lo_kind=self.eta.lo_kind,
                             hi_kind=self.eta.hi_kind, name="area", vectorized=True)

    def inverse_area_profile(self) -> ScalarProfile:
        lo, hi = self.eta.domain
        vn, k = self.fiber.volume, self.n - 1

        def f(ts):
            return np.exp(-k * self._log_eta_values(ts)) / vn

        return ScalarProfile(f, lo, hi, lo_kind=self.eta.lo_kind, hi_kind=self.eta.hi_kind,
                             name="1/area", vectorized=True)


# ---------------------------------------------------------------------------
# Curvature
# ---------------------------------------------------------------------------


def sectional_radial(m: WarpedModel, t: float) -> float:
    """``K(e_1, e_a) = -((log eta)'' + ((log eta)')^2)``."""
    return -(m.log_d2(t) + m.log_d1(t) ** 2)


def sectional_fiber(m: WarpedModel, t: float) -> float:
    """``K(e_a, e_b) = eta^-2 Kbar - ((log eta)')^2``."""
    if m.fiber.sectional is None:
        raise ConfigurationError("fiber sectional curvature (K_bar) is not set")
    return m.fiber.sectional * m.eta_power(t, -2.0) - m.log_d1(t) ** 2


def ricci_radial(m: WarpedModel, t: float) -> float:
    """``Ric_11 = -(n-1) eta''/eta``."""
    return -(m.n - 1) * m.ratio2(t)


def ricci_fiber(m: WarpedModel, t: float) -> float:
    """``Ric_aa = eta^-2 Ricbar_aa - ((log eta)'' + (n-1)((log eta)')^2)``."""
    if m.fiber.ricci_value is None:
        raise ConfigurationError("fiber Ricci value (ric_bar) is not set")
    return m.fiber.ricci_value * m.eta_power(t, -2.0) - (m.log_d2(t) + (m.n - 1) * m.log_d1(t) ** 2)


def natural_weight(m: WarpedModel, check_points: np.ndarray | None = None) -> WeightProfile:
    """``rho = (n-2) eta''/eta``, the weight certified by ``g = eta^-(n-2)``.

    Not a failure when ``eta'' <= 0`` somewhere: the returned weight is
    flagged ``invalid-as-weight`` with the offending points instead.
    """
    lo, hi = m.eta.domain
    k = m.n - 2

    def f(t):
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return k * m.ratio2(float(t))
        return np.array([k * m.ratio2(float(s)) for s in t])

    rho = ScalarProfile(f, lo, hi, lo_kind=m.eta.lo_kind, hi_kind=m.eta.hi_kind,
                        name="natural_weight", vectorized=True)
    if check_points is None:
        a = lo if math.isfinite(lo) else -10.0
        b = hi if math.isfinite(hi) else 10.0
        check_points = np.linspace(a, b, 203)[1:-1]
    bad = [float(t) for t in check_points if m.ratio2(float(t)) <= 0.0]
    flags: tuple[str, ...] = ()
    if bad:
        flags = (f"invalid-as-weight: eta'' <= 0 at {len(bad)} of {len(check_points)} points (first t = {bad[0]:.6g})",)
    return WeightProfile(rho, "natural_warp", (lo, hi), flags, params={"n": m.n})


# ---------------------------------------------------------------------------
# Harmonic function and Laplacian
# ---------------------------------------------------------------------------


def radial_laplacian(m: WarpedModel, f: ScalarProfile, t: float) -> float:
    """``Delta f = f'' + (n-1) (log eta)' f'`` for ``f = f(t)``."""
    return P.derivative(f, t, 2) + (m.n - 1) * m.log_d1(t) * P.derivative(f, t, 1)


def harmonic_profile(m: WarpedModel, t0: float) -> ScalarProfile:
    """``f(t) = int_{t0}^t eta^-(n-1) ds``, harmonic on the model.

    Values come from quadrature; the first and second derivatives are
    the closed forms ``eta^-(n-1)`` and ``-(n-1)(log eta)' eta^-(n-1)``.
    """
    lo, hi = m.eta.domain
    if not lo <= t0 <= hi or (m.domain_kind == "pole_model" and t0 == 0.0):
        raise DomainError(f"base point t0 = {t0} not usable in [{lo}, {hi}]")
    k = m.n - 1
    inv = m.inverse_area_profile().scaled(m.fiber.volume)

    def f(t):
        return P.integrate(inv, t0, float(t), tol=1e-13)

    def f1(t):
        return m.eta_power(float(t), -k)

    def f2(t):
        t = float(t)
        return -k * m.log_d1(t) * m.eta_power(t, -k)

    return ScalarProfile(f, lo, hi, f1, f2, m.eta.lo_kind, m.eta.hi_kind,
                         name="harmonic", vectorized=False)


def gradient_norm(m: WarpedModel, t: float) -> float:
    """``|grad f| = eta^-(n-1)`` for the harmonic profile."""
    return m.eta_power(t, -(m.n - 1))


def g_power(m: WarpedModel, t: float) -> float:
    """``g = |grad f|^((n-2)/(n-1)) = eta^-(n-2)``."""
    return m.eta_power(t, -(m.n - 2))


def _gradient_profile(m: WarpedModel) -> ScalarProfile:
    k = m.n - 1
    lo, hi = m.eta.domain

    def w(t):
        return m.eta_power(float(t), -k)

    def w1(t):
        t = float(t)
        return -k * m.log_d1(t) * w(t)

    def w2(t):
        t = float(t)
        l1 = m.log_d1(t)
        return (k * k * l1 * l1 - k * m.log_d2(t)) * w(t)

    return ScalarProfile(w, lo, hi, w1, w2, m.eta.lo_kind, m.eta.hi_kind,
                         name="|grad f|", vectorized=False)


def bochner_residual(m: WarpedModel, tau: ScalarProfile | float, t: float) -> float:
    """Defect in the improved Bochner inequality for ``|grad f|``.

    Returns ``Delta w + (n-1) tau w - |grad w|^2 / ((n-1) w)`` with
    ``w = |grad f|`` and ``f`` the harmonic profile.  Zero exactly when
    ``tau = eta''/eta`` at ``t``; positive when ``tau`` is larger.
    """
    w = _gradient_profile(m)
    wv = w(t)
    if wv <= 0.0 or not math.isfinite(wv):
        raise DegenerateError(f"|grad f| vanishes (or is not finite) at t = {t}")
    tv = tau(t) if isinstance(tau, ScalarProfile) else float(tau)
    k = m.n - 1
    w1 = P.derivative(w, t, 1)
    return radial_laplacian(m, w, t) + k * tv * wv - w1 * w1 / (k * wv)


def level_flux(m: WarpedModel, t: float, f: ScalarProfile | None = None) -> float:
    """Flux ``V_N eta^(n-1) |f'(t)|`` of ``grad f`` through the level ``{t} x N``."""
    if f is None:
        return m.fiber.volume * m.eta_power(t, m.n - 1) * gradient_norm(m, t)
    return m.area(t) * abs(P.derivative(f, t, 1))
