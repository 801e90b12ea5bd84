"""Command-line workbench.

Every subcommand writes ``<command>.json`` (sorted keys) and, where
there is a table, ``<command>.csv`` into ``--output-dir``.  Exit status:
0 on success, 2 when the run completed but reports a violated hypothesis
or a failed check, 1 on operational errors (bad spec, I/O, solver).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import decay as D
from . import ends as E
from . import profiles as P
from . import reproduce
from . import rho_metric as RM
from . import rigidity as Rg
from . import spectral as S
from . import warped as W
from . import weights as Wt
from .errors import WPError
from .specs import SpecError, load_end, load_model, load_weight

OK, OPERATIONAL, FINDING = 0, 1, 2


def _clean(obj):
    """Make report dictionaries JSON-safe and deterministic."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


class Output:
    def __init__(self, args):
        self.dir = Path(args.output_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.fmt = args.format
        self.svg = args.svg

    def json(self, name: str, data: dict) -> str:
        text = json.dumps(_clean(data), sort_keys=True, indent=2) + "\n"
        (self.dir / f"{name}.json").write_text(text)
        return text

    def table(self, name: str, header: Sequence[str], rows: Sequence[Sequence[float]]) -> None:
        with (self.dir / f"{name}.csv").open("w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(header)
            for row in rows:
                wr.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
        if self.svg and len(rows) > 1 and len(header) >= 2:
            xs = [float(r[0]) for r in rows]
            ys = [float(r[1]) for r in rows]
            (self.dir / f"{name}.svg").write_text(polyline_svg(xs, ys, title=f"{header[1]} vs {header[0]}"))

    def emit(self, name: str, data: dict, header=None, rows=None) -> None:
        text = self.json(name, data)
        if header is not None:
            self.table(name, header, rows)
        if self.fmt == "csv" and header is not None:
            sys.stdout.write(",".join(header) + "\n")
            for row in rows:
                sys.stdout.write(",".join(repr(float(v)) for v in row) + "\n")
        else:
            sys.stdout.write(text)


def polyline_svg(xs, ys, width: int = 480, height: int = 240, title: str = "") -> str:
    """A bare SVG sparkline: one polyline scaled into the box, no axes."""
    pts = [(x, y) for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)]
    if not pts:
        pts = [(0.0, 0.0)]
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    sx = (width - 20) / (x1 - x0 or 1.0)
    sy = (height - 20) / (y1 - y0 or 1.0)
    coords = " ".join(f"{10 + (x - x0) * sx:.2f},{height - 10 - (y - y0) * sy:.2f}" for x, y in pts)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">'
        f"<title>{title}</title>"
        f'<polyline fill="none" stroke="black" stroke-width="1" points="{coords}"/></svg>\n'
    )


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _model(args) -> W.WarpedModel:
    m = load_model(args.model)
    if getattr(args, "n", None) and args.n != m.n:
        from dataclasses import replace

        m = replace(m, n=args.n)
    return m


def _weight(args, model: W.WarpedModel | None):
    spec = args.weight
    if spec is None:
        return None
    if spec in ("hardy", "cartan_hadamard", "natural_warp", "green_model"):
        n = model.n if model is not None else args.n
        if spec == "hardy":
            return Wt.hardy_weight(n)
        if spec == "cartan_hadamard":
            return Wt.cartan_hadamard_weight(n)
        if model is None:
            raise SpecError(f"weight {spec!r} needs --model")
        return W.natural_weight(model) if spec == "natural_warp" else Wt.green_weight_model(model)
    return load_weight(spec, model)


def _sample_grid(m: W.WarpedModel, count: int) -> np.ndarray:
    lo, hi = m.eta.domain
    a = lo if math.isfinite(lo) else -10.0
    b = hi if math.isfinite(hi) else 10.0
    ts = np.linspace(a, b, count)
    if m.domain_kind == "pole_model":
        ts = ts[ts > 0]
    return ts


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_curvature(args, out: Output) -> int:
    m = _model(args)
    rows = []
    for t in _sample_grid(m, args.grid or 101):
        t = float(t)
        kf = W.sectional_fiber(m, t) if m.fiber.sectional is not None else float("nan")
        rf = W.ricci_fiber(m, t) if m.fiber.ricci_value is not None else float("nan")
        rows.append((t, W.sectional_radial(m, t), kf, W.ricci_radial(m, t), rf))
    arr = np.array(rows)
    summary = {"model": m.name, "n": m.n, "points": len(rows),
               "sectional_radial_range": [float(np.nanmin(arr[:, 1])), float(np.nanmax(arr[:, 1]))],
               "ricci_radial_range": [float(np.nanmin(arr[:, 3])), float(np.nanmax(arr[:, 3]))]}
    out.emit("curvature", summary, ("t", "K_radial", "K_fiber", "Ric_11", "Ric_aa"), rows)
    return OK


def cmd_weight(args, out: Output) -> int:
    m = load_model(args.model) if args.model else None
    w = _weight(args, m)
    if w is None:
        raise SpecError("--weight is required")
    lo, hi = w.rho.domain
    a = args.t_lo if args.t_lo is not None else (lo if math.isfinite(lo) and lo > 0 else (0.01 if lo == 0 else -10.0))
    b = args.t_hi if args.t_hi is not None else (hi if math.isfinite(hi) else 10.0)
    ts = np.linspace(a, b, args.grid or 101)
    rows = [(float(t), float(w(float(t)))) for t in ts]
    summary = {"source": w.source, "flags": list(w.flags), "valid": w.valid, "params": w.params}
    out.emit("weight", summary, ("t", "rho"), rows)
    return OK if w.valid else FINDING


def cmd_rho_metric(args, out: Output) -> int:
    m = load_model(args.model) if args.model else None
    w = _weight(args, m)
    if w is None:
        raise SpecError("--weight is required")
    grading = "geometric" if args.r0 > 0 and args.r_max / args.r0 > 100 else "uniform"
    tab = RM.build_rho_distance(w, args.r0, P.GridSpec(args.grid or 2001, args.r0, args.r_max, grading))
    comp = RM.completeness_check(w, "outer", start=max(args.r0, 1e-3)) if math.isinf(w.rho.t_hi) else None
    summary = {"r0": args.r0, "r_max": args.r_max, "R_range": list(tab.R_range),
               "completeness": comp.to_dict() if comp else None}
    if args.n:
        R_max = args.horizon or min(20.0, tab.R_range[1])
        summary["growth_criterion"] = RM.growth_criterion(tab, w, args.n, R_max).to_dict()
    rows = list(zip(tab.grid.tolist(), tab.r_rho.tolist()))
    out.emit("rho_metric", summary, ("r", "r_rho"), rows)
    return FINDING if comp is not None and comp.status == "incomplete" else OK


def cmd_spectral(args, out: Output) -> int:
    m = _model(args)
    if args.radii:
        rep = S.bottom_spectrum(m, args.radii, node_count=args.grid or 10_000)
        out.emit("spectral", rep.to_dict(), ("R", "lambda1"), list(zip(rep.radii, rep.lambdas)))
        return OK
    a, b = args.interval
    w = _weight(args, m)
    grid = S.default_grid(m, (a, b), args.grid or 2001)
    if w is not None:
        rep = S.verify_weighted_poincare(w, m, (a, b), grid, tol=args.tol or 1e-8)
        out.emit("spectral", rep.to_dict(), ("r", "phi"), list(zip(rep.nodes, rep.phi)))
        return OK if rep.passed else FINDING
    res = S.principal_eigenvalue(S.DirichletProblem(m, (a, b), grid))
    out.emit("spectral", res.to_dict(), ("r", "u"), res.eigenvector_rows())
    return OK


def cmd_decay(args, out: Output) -> int:
    m = _model(args)
    w = _weight(args, m) or Wt.hardy_weight(m.n)
    R_max = args.horizon or 10.0
    t_max = args.t_max
    if t_max is None:
        # extend the end until the rho-distance covers the horizon
        sq = w.sqrt_profile()
        t_max, length = args.r0 + 1.0, P.integrate(sq, args.r0, args.r0 + 1.0)
        while length < R_max + 2.0:
            nxt = args.r0 + 2.0 * (t_max - args.r0)
            length += P.integrate(sq, t_max, nxt)
            t_max = nxt
            if t_max > 1e12:
                raise WPError("rho-metric too short to reach the horizon")
    e = D.EndModel(m, w, args.r0, t_max)
    f = D.solve_schrodinger_radial(e)
    s = D.annulus_integrals(e, f, R_max)
    summary = s.to_dict()
    tol = args.tol or 0.02
    summary["hypothesis_rate_ok"] = s.fitted_rate is not None and s.fitted_rate <= -2.0 + tol
    out.emit("decay", summary, ("R", "I", "log_I"), s.rows())
    return OK if summary["hypothesis_rate_ok"] else FINDING


def cmd_classify(args, out: Output) -> int:
    e = load_end(args.end)
    c = E.classify_end(e)
    out.emit("classify", c.to_dict())
    return OK


def cmd_rigidity(args, out: Output) -> int:
    what = args.what
    if what == "example62":
        m, w, rep = Rg.example62_generate(args.alpha, args.c1, args.C, args.n or 4)
        ts = np.linspace(-args.t_max, args.t_max, args.grid or 401)
        rows = [(float(t), float(m.log_eta_value(float(t))), float(w(float(t)))) for t in ts]
        out.emit("rigidity", rep.to_dict(), ("t", "log_eta", "rho"), rows)
        return OK if rep.passed else FINDING
    if what == "ode":
        tau = P.builtin(args.tau, **json.loads(args.tau_params)) if args.tau else P.constant(1.0)
        eta = Rg.integrate_warp(Rg.WarpBuilder(tau, args.eta0, args.deta0, (args.t_lo, args.t_hi), args.step))
        ts = np.linspace(args.t_lo, args.t_hi, args.grid or 501)
        rows = list(zip(ts.tolist(), eta.values(ts).tolist()))
        out.emit("rigidity", {"tau": tau.name, "eta_end": rows[-1][1]}, ("t", "eta"), rows)
        return OK
    m = _model(args)
    if what == "conditions":
        rep = Rg.condition_check(m)
        out.emit("rigidity", rep.to_dict())
        return OK if rep.passed else FINDING
    if what == "liminf":
        rep = Rg.theorem63_liminf(m, _weight(args, m), horizon=args.horizon or 100.0)
        out.emit("rigidity", rep.to_dict())
        return OK if rep.extra["verdict"] == "PASS" else FINDING
    if what == "residual":
        w = _weight(args, m) or W.natural_weight(m)
        rep = Rg.theorem82_residual(m, w, tol=args.tol or 1e-8)
        out.emit("rigidity", rep.to_dict())
        return OK if rep.extra["rigid"] else FINDING
    if what == "comparison":
        w = _weight(args, m)
        if w is None:
            raise SpecError("comparison needs --weight")
        r_max = args.horizon or 100.0
        tab = RM.build_rho_distance(w, args.r0, P.GridSpec(args.grid or 2001, args.r0, r_max))
        rep = Rg.theorem81_comparison(w, m.n, args.r0, tab)
        out.emit("rigidity", rep.to_dict())
        return OK if rep.extra["verdict"] == "consistent" else FINDING
    raise SpecError(f"unknown rigidity task {what!r}")


def cmd_report(args, out: Output) -> int:
    checks = reproduce.run_all(args.only or None)
    for c in checks:
        sys.stderr.write(c.line() + "\n")
    data = {"checks": [c.to_dict() for c in checks], "passed": sum(c.passed for c in checks), "total": len(checks)}
    if not args.timings:
        for d in data["checks"]:
            d.pop("seconds", None)
            _strip_seconds(d["detail"])
    out.emit("report", data)
    return OK if all(c.passed for c in checks) else FINDING


def _strip_seconds(d):
    if isinstance(d, dict):
        for k in [k for k in d if k == "seconds"]:
            d.pop(k)
        for v in d.values():
            _strip_seconds(v)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", default=".", help="where JSON/CSV artifacts go")
    common.add_argument("--format", choices=("json", "csv"), default="json", help="what to print on stdout")
    common.add_argument("--svg", action="store_true", help="also write SVG sparklines of tables")
    common.add_argument("--tol", type=float, default=None, help="override the check tolerance")
    common.add_argument("--grid", type=int, default=None, help="override the node count")
    common.add_argument("--horizon", type=float, default=None, help="override the horizon")

    ap = argparse.ArgumentParser(prog="wpoincare", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curvature", parents=[common], help="curvature sweep of a warped model")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("weight", parents=[common], help="sample a weight")
    p.add_argument("--weight", required=True, help="JSON spec or one of hardy, cartan_hadamard, natural_warp, green_model")
    p.add_argument("--model")
    p.add_argument("--n", type=int)
    p.add_argument("--t-lo", type=float)
    p.add_argument("--t-hi", type=float)
    p.set_defaults(func=cmd_weight)

    p = sub.add_parser("rho-metric", parents=[common], help="rho-distance table, completeness, growth gauge")
    p.add_argument("--weight", required=True)
    p.add_argument("--model")
    p.add_argument("--n", type=int, help="dimension for the growth criterion")
    p.add_argument("--r0", type=float, default=1.0)
    p.add_argument("--r-max", type=float, default=100.0)
    p.set_defaults(func=cmd_rho_metric)

    p = sub.add_parser("spectral", parents=[common], help="Dirichlet eigenvalues and Poincare verification")
    p.add_argument("--model", required=True)
    p.add_argument("--weight")
    p.add_argument("--n", type=int)
    p.add_argument("--interval", type=float, nargs=2, default=(0.01, 100.0))
    p.add_argument("--radii", type=float, nargs="+", help="exhaustion radii for the bottom of the spectrum")
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("decay", parents=[common], help="decaying solution and annulus series")
    p.add_argument("--model", required=True)
    p.add_argument("--weight")
    p.add_argument("--n", type=int)
    p.add_argument("--r0", type=float, default=1.0)
    p.add_argument("--t-max", type=float)
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("classify", parents=[common], help="parabolic or nonparabolic end")
    p.add_argument("--end", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("rigidity", parents=[common], help="warping ODE and rigidity checks")
    p.add_argument("what", choices=("ode", "example62", "conditions", "liminf", "comparison", "residual"))
    p.add_argument("--model")
    p.add_argument("--weight")
    p.add_argument("--n", type=int)
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--C", type=float, default=0.0)
    p.add_argument("--t-max", type=float, default=100.0)
    p.add_argument("--tau", help="builtin profile name for tau (ode)")
    p.add_argument("--tau-params", default="{}")
    p.add_argument("--eta0", type=float, default=1.0)
    p.add_argument("--deta0", type=float, default=0.0)
    p.add_argument("--t-lo", type=float, default=0.0)
    p.add_argument("--t-hi", type=float, default=5.0)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--r0", type=float, default=1.0)
    p.set_defaults(func=cmd_rigidity)

    p = sub.add_parser("report", parents=[common], help="run every acceptance check")
    p.add_argument("--only", type=int, nargs="+", help="check numbers to run")
    p.add_argument("--timings", action="store_true", help="include wall times (makes output non-deterministic)")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command in ("rigidity",) and args.what in ("conditions", "liminf", "comparison", "residual") \
                and not args.model:
            raise SpecError(f"rigidity {args.what} needs --model")
        out = Output(args)
        return args.func(args, out)
    except SpecError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return OPERATIONAL
    except (WPError, OSError, ValueError, TypeError, ArithmeticError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return OPERATIONAL


if __name__ == "__main__":
    sys.exit(main())
