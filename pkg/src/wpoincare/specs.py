"""JSON ingestion of model, weight and end specifications.

Every validation failure raises :class:`SpecError` carrying the file
and the line of the offending key, so the command line can point at it.

Model::

    {"n": 4,
     "domain": {"kind": "pole_model", "t_lo": 0, "t_hi": null},
     "eta": {"builtin": "r", "params": {}}        or {"csv": "eta.csv"},
     "fiber": {"C_N": 2, "V_N": 1.0, "K_bar": 1, "ric_bar": 2}
              or {"unit_sphere": true}}

Weight::

    {"source": "hardy", "n": 4, "scale": 1.0}
    {"source": "cartan_hadamard", "n": 3}
    {"source": "green_model"}                     (needs a model)
    {"source": "natural_warp"}                    (needs a model)
    {"source": "minimal_extrinsic", "n": 4, "rbar": <profile>}
    {"source": "user", "rho": <profile>}

End::

    {"A": <profile>, "r0": 1.0, "label": "R^3"}
"""

from __future__ import annotations

import json
import math
import re
from pathlib import Path
from typing import Any

from . import profiles as P
from .ends import EndProfile
from .errors import WPError
from .profiles import ScalarProfile
from .warped import FiberData, WarpedModel, natural_weight, unit_sphere_fiber
from .weights import (
    WeightProfile,
    cartan_hadamard_weight,
    green_weight_model,
    hardy_weight,
    minimal_weight,
    user_weight,
)


class SpecError(WPError, ValueError):
    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path, self.line = path, line
        where = f"{path}:{line}: " if path and line else (f"{path}: " if path else "")
        super().__init__(where + message)


class _Doc:
    """Parsed JSON plus the raw text for line lookups."""

    def __init__(self, text: str, path: str | None):
        self.text, self.path = text, path
        try:
            self.data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid JSON: {exc.msg} (column {exc.colno})", path, exc.lineno) from None
        if not isinstance(self.data, dict):
            raise SpecError("top level must be a JSON object", path, 1)

    def line_of(self, key: str | None) -> int | None:
        if key is None:
            return 1
        m = re.search(r'"%s"\s*:' % re.escape(key), self.text)
        return self.text.count("\n", 0, m.start()) + 1 if m else 1

    def fail(self, message: str, key: str | None = None):
        raise SpecError(message, self.path, self.line_of(key))


def _load(source: str | Path | dict) -> _Doc:
    if isinstance(source, dict):
        return _Doc(json.dumps(source, indent=1), None)
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecError(f"cannot read spec: {exc.strerror}", str(path)) from None
    return _Doc(text, str(path))


def _num(doc: _Doc, obj: dict, key: str, default: Any = ..., kind=float, where: str | None = None):
    if key not in obj or obj[key] is None:
        if default is ...:
            doc.fail(f"missing required field {key!r}", where or key)
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        doc.fail(f"field {key!r} must be a number, got {v!r}", key)
    if kind is int:
        if float(v) != int(v):
            doc.fail(f"field {key!r} must be an integer", key)
        return int(v)
    return float(v)


def _profile(doc: _Doc, obj: Any, key: str) -> ScalarProfile:
    if not isinstance(obj, dict):
        doc.fail(f"{key!r} must be an object with 'builtin' or 'csv'", key)
    if "builtin" in obj:
        params = obj.get("params", {})
        if not isinstance(params, dict):
            doc.fail("'params' must be an object", "params")
        try:
            return P.builtin(str(obj["builtin"]), **params)
        except (TypeError, ValueError) as exc:
            doc.fail(f"bad builtin profile: {exc}", "builtin")
    if "csv" in obj:
        csv_path = Path(obj["csv"])
        if doc.path and not csv_path.is_absolute():
            csv_path = Path(doc.path).parent / csv_path
        try:
            return P.from_csv(csv_path)
        except (OSError, ValueError) as exc:
            doc.fail(f"cannot load profile CSV: {exc}", "csv")
    doc.fail(f"{key!r} needs a 'builtin' or 'csv' entry", key)
    raise AssertionError  # unreachable


def load_model(source: str | Path | dict) -> WarpedModel:
    doc = _load(source)
    d = doc.data
    n = _num(doc, d, "n", kind=int)
    dom = d.get("domain", {})
    if not isinstance(dom, dict):
        doc.fail("'domain' must be an object", "domain")
    kind = dom.get("kind", "full_line")
    if kind not in ("full_line", "pole_model"):
        doc.fail(f"domain kind must be 'full_line' or 'pole_model', got {kind!r}", "kind")
    if "eta" not in d:
        doc.fail("missing required field 'eta'")
    eta = _profile(doc, d["eta"], "eta")
    t_lo = _num(doc, dom, "t_lo", eta.t_lo)
    t_hi = _num(doc, dom, "t_hi", eta.t_hi)
    if (t_lo, t_hi) != eta.domain:
        try:
            eta = eta.restrict(t_lo, t_hi) if math.isfinite(t_lo) and math.isfinite(t_hi) else P._replace(eta, t_lo=t_lo, t_hi=t_hi)
        except WPError as exc:
            doc.fail(str(exc), "domain")
    fib = d.get("fiber", {})
    if not isinstance(fib, dict):
        doc.fail("'fiber' must be an object", "fiber")
    if fib.get("unit_sphere"):
        fiber = unit_sphere_fiber(n)
    else:
        k_bar = fib.get("K_bar")
        ric_bar = fib.get("ric_bar")
        fiber = FiberData(
            ricci_lower=_num(doc, fib, "C_N", 0.0),
            volume=_num(doc, fib, "V_N", 1.0),
            sectional=None if k_bar is None else _num(doc, fib, "K_bar"),
            ricci_value=None if ric_bar is None else _num(doc, fib, "ric_bar"),
        )
    try:
        return WarpedModel(n, eta, fiber, kind, name=str(d.get("name", "")))
    except (WPError, ValueError) as exc:
        doc.fail(str(exc), "n")
    raise AssertionError


def load_weight(source: str | Path | dict, model: WarpedModel | None = None) -> WeightProfile:
    doc = _load(source)
    d = doc.data
    src = d.get("source")
    if src is None:
        doc.fail("missing required field 'source'")
    try:
        if src == "hardy":
            w = hardy_weight(_num(doc, d, "n", model.n if model else ..., kind=int))
        elif src == "cartan_hadamard":
            w = cartan_hadamard_weight(_num(doc, d, "n", model.n if model else ..., kind=int))
        elif src in ("green_model", "natural_warp"):
            if model is None:
                doc.fail(f"weight source {src!r} needs a model spec", "source")
            w = green_weight_model(model) if src == "green_model" else natural_weight(model)
        elif src == "minimal_extrinsic":
            w = minimal_weight(_num(doc, d, "n", kind=int), _profile(doc, d.get("rbar"), "rbar"))
        elif src == "user":
            w = user_weight(_profile(doc, d.get("rho"), "rho"))
        else:
            doc.fail(f"unknown weight source {src!r}", "source")
    except SpecError:
        raise
    except (WPError, ValueError) as exc:
        doc.fail(str(exc), "source")
    scale = _num(doc, d, "scale", 1.0)
    return w if scale == 1.0 else w.scaled(scale)


def load_end(source: str | Path | dict) -> EndProfile:
    doc = _load(source)
    d = doc.data
    if "A" not in d:
        doc.fail("missing required field 'A'")
    A = _profile(doc, d["A"], "A")
    r0 = _num(doc, d, "r0", 1.0)
    try:
        return EndProfile(A, r0, str(d.get("label", "")))
    except WPError as exc:
        doc.fail(str(exc), "r0")
    raise AssertionError
