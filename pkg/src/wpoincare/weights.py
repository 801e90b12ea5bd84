"""Weight functions for weighted Poincare inequalities on model manifolds.

Constructors for the classical weights (Hardy, Cartan-Hadamard, the
Green's-function weight |grad G|^2 / 4G^2, the extrinsic weight of a
minimal submanifold) and the superharmonic certificate residual
``Delta h + rho h``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Literal

import numpy as np

from . import profiles as P
from .errors import DegenerateError, DomainError, NoGreenFunctionError
from .profiles import ScalarProfile, TailPolicy

if TYPE_CHECKING:
    from .warped import WarpedModel

Source = Literal["hardy", "cartan_hadamard", "green_model", "minimal_extrinsic", "natural_warp", "user"]


@dataclass(frozen=True)
class WeightProfile:
    """A nonnegative weight ``rho`` together with where it came from.

    ``valid_region`` is the sub-interval on which ``rho >= 0`` is known to
    hold.  ``flags`` collects non-fatal findings (for instance points
    where ``eta'' <= 0`` for a natural warped weight).
    """

    rho: ScalarProfile
    source: Source = "user"
    valid_region: tuple[float, float] | None = None
    flags: tuple[str, ...] = ()
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.valid_region is None:
            object.__setattr__(self, "valid_region", self.rho.domain)

    @property
    def valid(self) -> bool:
        return not any(f.startswith("invalid") for f in self.flags)

    def __call__(self, t: float) -> float:
        return self.rho(t)

    def sqrt_profile(self) -> ScalarProfile:
        """``sqrt(rho)``, the density of the rho-metric along a ray."""
        f = self.rho.fn
        return ScalarProfile(
            fn=lambda t: np.sqrt(np.maximum(f(t), 0.0)),
            t_lo=self.rho.t_lo,
            t_hi=self.rho.t_hi,
            lo_kind=self.rho.lo_kind,
            hi_kind=self.rho.hi_kind,
            name=f"sqrt({self.rho.name})",
            vectorized=self.rho.vectorized,
        )

    def scaled(self, c: float) -> "WeightProfile":
        return WeightProfile(self.rho.scaled(c), self.source, self.valid_region, self.flags, dict(self.params, scale=c))


def user_weight(rho: ScalarProfile, **params) -> WeightProfile:
    return WeightProfile(rho, "user", params=params)


def hardy_weight(n: int) -> WeightProfile:
    """``(n-2)^2/4 * r^-2`` on ``(0, inf)``, the Hardy weight of R^n."""
    if n < 3:
        raise DegenerateError(f"Hardy weight needs n >= 3, got {n}")
    c = (n - 2) ** 2 / 4.0
    rho = replace(P.power(-2.0, c, t_lo=0.0), name=f"hardy(n={n})")
    return WeightProfile(rho, "hardy", (0.0, math.inf), params={"n": n})


def cartan_hadamard_weight(n: int) -> WeightProfile:
    """Weight for a simply connected manifold with sectional curvature <= -1.

    ``rho(r) = (n-1)^2/4 + (n-1)^2/2 * (coth r - 1)``, which tends to
    ``(n-1)^2/4`` as ``r -> inf`` and blows up at the pole.
    """
    if n < 2:
        raise DegenerateError(f"Cartan-Hadamard weight needs n >= 2, got {n}")
    a = (n - 1) ** 2 / 4.0
    b = (n - 1) ** 2 / 2.0

    def f(r):
        r = np.asarray(r, dtype=float)
        return a + b * (1.0 / np.tanh(r) - 1.0)

    def f1(r):
        r = np.asarray(r, dtype=float)
        return -b / np.sinh(r) ** 2

    def f2(r):
        r = np.asarray(r, dtype=float)
        return 2.0 * b * np.cosh(r) / np.sinh(r) ** 3

    rho = ScalarProfile(f, 0.0, math.inf, f1, f2, name=f"cartan_hadamard(n={n})")
    return WeightProfile(rho, "cartan_hadamard", (0.0, math.inf), params={"n": n, "limit": a})


def minimal_weight(n: int, rbar: ScalarProfile) -> WeightProfile:
    """``(n-2)^2/4 * rbar^-2`` for a supplied extrinsic distance ``rbar > 0``."""
    if n < 3:
        raise DegenerateError(f"minimal-submanifold weight needs n >= 3, got {n}")
    c = (n - 2) ** 2 / 4.0
    g = rbar.fn

    def f(t):
        v = np.asarray(g(t), dtype=float)
        if np.any(v <= 0):
            raise DomainError("extrinsic distance must be positive")
        return c / v**2

    d1 = d2 = None
    if rbar.d1 is not None and rbar.d2 is not None:
        g1, g2 = rbar.d1, rbar.d2

        def d1(t):
            v = np.asarray(g(t), dtype=float)
            return -2.0 * c * np.asarray(g1(t)) / v**3

        def d2(t):
            v = np.asarray(g(t), dtype=float)
            v1 = np.asarray(g1(t), dtype=float)
            return c * (6.0 * v1**2 / v**4 - 2.0 * np.asarray(g2(t)) / v**3)

    rho = ScalarProfile(f, rbar.t_lo, rbar.t_hi, d1, d2, rbar.lo_kind, rbar.hi_kind,
                        name=f"minimal(n={n})", vectorized=rbar.vectorized)
    return WeightProfile(rho, "minimal_extrinsic", rbar.domain, params={"n": n})


def green_weight_model(m: "WarpedModel", policy: TailPolicy | None = None) -> WeightProfile:
    """``|grad G|^2 / (4 G^2)`` for the radial Green's function of a model.

    With area ``A(r) = V_N eta^(n-1)``, the radial Green's function is
    ``G(r) = c * int_r^inf A^-1`` and ``|grad G| = c / A``, so

        rho(r) = A(r)^-2 / (4 * (int_r^inf A^-1)^2),

    independent of the normalisation ``c``.  Raises
    :class:`NoGreenFunctionError` when the tail integral diverges.
    """
    pol = policy or TailPolicy()
    inv_area = m.inverse_area_profile()
    t_lo, t_hi = m.eta.domain
    probe = 1.0 if t_lo < 1.0 < t_hi else 0.5 * (t_lo + min(t_hi, t_lo + 2.0))
    verdict = P.improper_tail(inv_area, probe, pol)
    if not verdict.converges:
        raise NoGreenFunctionError(
            f"integral of 1/A diverges ({verdict.status}: {verdict.reason}); the model is parabolic"
        )

    def tail(r: float) -> float:
        res = P.improper_tail(inv_area, r, pol)
        if res.value is None:
            raise NoGreenFunctionError(f"tail integral undecided at r = {r}: {res.reason}")
        return res.value

    def f(r):
        r = float(r)
        t = tail(r)
        return float(inv_area.fn(r)) ** 2 / (4.0 * t * t)

    rho = ScalarProfile(f, t_lo, t_hi, name="green_weight", vectorized=False)
    return WeightProfile(rho, "green_model", (t_lo, t_hi), params={"n": m.n, "tail": verdict.to_dict()})


def certificate_residual(h: ScalarProfile, w: WeightProfile, m: "WarpedModel", t: float) -> float:
    """``Delta h + rho h`` at ``t``; a value ``<= 0`` is a superharmonic certificate.

    If this holds everywhere for some positive ``h``, the weighted
    Poincare inequality with weight ``rho`` follows.
    """
    from .warped import radial_laplacian

    hv = h(t)
    if hv <= 0:
        raise DomainError(f"certificate function must be positive, h({t}) = {hv}")
    return radial_laplacian(m, h, t) + w(t) * hv
