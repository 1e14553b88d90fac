"""Command-line front end: ``casorati-lab <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import DEFAULT_PRECISION
from . import casorati as C
from . import catalog
from . import hyperplanes as H
from . import nevanlinna as NV
from . import roots
from . import verify as V
from .errors import (
    BadScale,
    CasoratiLabError,
    CoefficientDegeneracy,
    CommonZeroSuspected,
    DependentCoordinates,
    DimensionMismatch,
    GridTooSmall,
    NonMonotoneInput,
    NotPrime,
    ParseError,
    SharingViolated,
    UnknownExample,
    ZeroScale,
)
from .expr import nodes as N
from .expr import parse

SCHEMA = 1
EXIT_OK, EXIT_NUMERIC, EXIT_HARD, EXIT_INPUT = 0, 1, 2, 3
INPUT_ERRORS = (ParseError, DimensionMismatch, NotPrime, UnknownExample, BadScale, ZeroScale, GridTooSmall,
                NonMonotoneInput, DependentCoordinates, CoefficientDegeneracy, CommonZeroSuspected,
                ValueError, KeyError, OSError)


# ----------------------------------------------------------------------------------
# scenario files

def _cplx(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError(f"complex numbers are [re, im] pairs, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(parse(v).evaluate(0j))
    return complex(v)


def _pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


@dataclass
class Grid:
    min: float = 1.0
    max: float = 20.0
    points: int = 10
    spacing: str = "linear"

    def __post_init__(self):
        if self.spacing not in ("linear", "log"):
            raise ValueError(f"spacing must be linear or log, got {self.spacing!r}")
        if not (self.min > 0 and self.max > self.min and self.points >= 1):
            raise ValueError("grid needs 0 < min < max and points >= 1")

    def values(self):
        if self.spacing == "log":
            return np.geomspace(self.min, self.max, self.points).tolist()
        return np.linspace(self.min, self.max, self.points).tolist()


@dataclass
class Scenario:
    name: str = "scenario"
    curve: list = field(default_factory=list)  # coordinate expression strings
    hyperplanes: list = field(default_factory=list)  # rows of complex numbers
    shift: complex | None = None
    rescale: complex | None = None
    r_grid: Grid = field(default_factory=Grid)
    tolerances: dict = field(default_factory=lambda: {"quadrature": 1e-9})
    extra: dict = field(default_factory=dict)  # command specific fields (expr, targets, ...)

    @classmethod
    def from_json(cls, d: dict) -> "Scenario":
        if d.get("schema") != SCHEMA:
            raise ValueError(f"scenario schema must be {SCHEMA}, got {d.get('schema')!r}")
        known = {"schema", "name", "curve", "hyperplanes", "shift", "rescale", "r_grid", "tolerances"}
        curve = [str(parse(s)) for s in d.get("curve", [])]
        hs = [[_cplx(x) for x in row] for row in d.get("hyperplanes", [])]
        if hs and any(len(r) != len(hs[0]) for r in hs):
            raise DimensionMismatch("hyperplane rows have different lengths")
        return cls(
            name=d.get("name", "scenario"),
            curve=curve,
            hyperplanes=hs,
            shift=None if d.get("shift") is None else _cplx(d["shift"]),
            rescale=None if d.get("rescale") is None else _cplx(d["rescale"]),
            r_grid=Grid(**d.get("r_grid", {})),
            tolerances=dict(d.get("tolerances", {"quadrature": 1e-9})),
            extra={k: v for k, v in d.items() if k not in known},
        )

    def to_json(self) -> dict:
        d = {
            "schema": SCHEMA,
            "name": self.name,
            "curve": list(self.curve),
            "hyperplanes": [[_pair(x) for x in row] for row in self.hyperplanes],
            "r_grid": {"min": self.r_grid.min, "max": self.r_grid.max, "points": self.r_grid.points,
                       "spacing": self.r_grid.spacing},
            "tolerances": dict(self.tolerances),
        }
        if self.shift is not None:
            d["shift"] = _pair(self.shift)
        if self.rescale is not None:
            d["rescale"] = _pair(self.rescale)
        d.update(self.extra)
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def curve_obj(self) -> H.Curve:
        if not self.curve:
            raise ValueError("scenario has no curve")
        return H.Curve([parse(s) for s in self.curve], self.name)


def load_scenario(path) -> Scenario:
    text = Path(path).read_text()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    return Scenario.from_json(d)


# ----------------------------------------------------------------------------------
# output

def _emit(args, payload: str):
    if args.out:
        Path(args.out).write_text(payload)
    else:
        sys.stdout.write(payload if payload.endswith("\n") else payload + "\n")


def _fmt(args, default="json"):
    if args.format:
        return args.format
    if args.out and args.out.endswith(".csv"):
        return "csv"
    if args.out and args.out.endswith(".json"):
        return "json"
    return default


def _dump(obj) -> str:
    return json.dumps(V._enc(obj), indent=2, sort_keys=True) + "\n"


def _report_out(args, rep: V.Report) -> int:
    _emit(args, rep.to_csv() if _fmt(args) == "csv" else rep.dumps() + "\n")
    print(rep.summary(), file=sys.stderr)
    return EXIT_HARD if rep.hard_failure else EXIT_OK


# ----------------------------------------------------------------------------------
# inputs shared by several subcommands

def _scenario(args) -> Scenario:
    sc = load_scenario(args.scenario) if args.scenario else Scenario()
    if getattr(args, "coord", None):
        sc.curve = [str(parse(s)) for s in args.coord]
    if getattr(args, "shift", None) is not None:
        sc.shift = _cplx(args.shift)
    if getattr(args, "q", None) is not None:
        sc.rescale = _cplx(args.q)
    g = sc.r_grid
    sc.r_grid = Grid(args.r_min if args.r_min is not None else g.min,
                     args.r_max if args.r_max is not None else g.max,
                     args.r_points if args.r_points is not None else g.points,
                     args.spacing or g.spacing)
    if args.tol is not None:
        sc.tolerances["quadrature"] = args.tol
    return sc


def _tol(sc: Scenario) -> float:
    return float(sc.tolerances.get("quadrature", 1e-9))


def _need(value, what):
    if value is None:
        raise ValueError(f"missing {what}")
    return value


# ----------------------------------------------------------------------------------
# subcommands

def cmd_characteristic(args) -> int:
    sc = _scenario(args)
    src = args.expr or sc.extra.get("expr")
    f = parse(_need(src, "--expr"))
    r = sc.r_grid.values()
    div = roots.divisor(f, roots.Disc(0, max(r) * 1.001))
    samples = [NV.characteristic(f, x, _tol(sc), div=div) for x in r]
    _emit(args, NV.samples_to_csv(samples) if _fmt(args, "csv") == "csv" else NV.samples_to_json(samples) + "\n")
    print(f"characteristic: {len(samples)} radii, T({r[-1]:g}) = {samples[-1].T:.10g}", file=sys.stderr)
    return EXIT_OK


def cmd_cartan(args) -> int:
    sc = _scenario(args)
    g = sc.curve_obj()
    rows = []
    for x in sc.r_grid.values():
        T, err = NV.cartan_characteristic(g, x, _tol(sc))
        rows.append((x, T, err))
    if _fmt(args, "csv") == "csv":
        _emit(args, "r,T_g,err\n" + "".join(f"{a!r},{b!r},{c!r}\n" for a, b, c in rows))
    else:
        _emit(args, _dump({"schema": SCHEMA, "rows": [list(x) for x in rows]}))
    print(f"cartan: {len(rows)} radii, T_g({rows[-1][0]:g}) = {rows[-1][1]:.10g}", file=sys.stderr)
    return EXIT_OK


def _points(args):
    pts = [_cplx(s) for s in (args.at or [])]
    return pts or [complex(z) for z in C.sample_points(4)]


def _det_report(args, expr, sc, label):
    prec = args.precision or DEFAULT_PRECISION
    vals = []
    for z in _points(args):
        v = N.eval_expr(expr, z, prec=prec if prec > 53 else None)
        vals.append({"z": z, "value": complex(v)})
    out = {"schema": SCHEMA, "kind": label, "expression": str(expr), "values": vals, "precision": prec}
    _emit(args, _dump(out))
    print(f"{label}: {expr}", file=sys.stderr)
    return EXIT_OK


def cmd_casorati(args) -> int:
    sc = _scenario(args)
    gs = sc.curve_obj().coords
    return _det_report(args, C.casorati(gs, _need(sc.shift, "--shift")), sc, "casorati")


def cmd_qcasorati(args) -> int:
    sc = _scenario(args)
    gs = sc.curve_obj().coords
    return _det_report(args, C.q_casorati(gs, _need(sc.rescale, "--q")), sc, "q-casorati")


def cmd_dependence(args) -> int:
    sc = _scenario(args)
    cert = C.dependence_over_periodic(sc.curve_obj().coords, _need(sc.shift, "--shift"))
    _emit(args, _dump({"schema": SCHEMA, **cert.to_json()}))
    print(f"dependence: {cert.verdict}", file=sys.stderr)
    return EXIT_OK


def _hyperplanes(args, sc):
    if getattr(args, "vandermonde", None):
        m = args.vandermonde
        return H.vandermonde_family(m, allow_composite=args.allow_composite)
    if not sc.hyperplanes:
        raise ValueError("no hyperplanes (give --scenario or --vandermonde)")
    return H.as_hyperplanes(sc.hyperplanes)


def cmd_general_position(args) -> int:
    sc = _scenario(args)
    if sc.extra.get("vandermonde") and not args.vandermonde:
        args.vandermonde = int(sc.extra["vandermonde"])
        args.allow_composite = bool(sc.extra.get("allow_composite", False))
    hs = _hyperplanes(args, sc)
    res = H.general_position(hs)
    _emit(args, _dump({"schema": SCHEMA, "general_position": res.ok, "witness": res.witness,
                       "min_scaled_det": res.min_scaled_det, "checked": res.checked,
                       "singular_subsets": res.singular[:100]}))
    print(f"general-position: {res.ok}" + ("" if res.ok else f" (witness {res.witness})"), file=sys.stderr)
    return EXIT_OK


def cmd_invariance(args) -> int:
    sc = _scenario(args)
    curve = sc.curve_obj()
    hs = _hyperplanes(args, sc)
    inner = float(args.inner_radius or sc.extra.get("inner_radius", 4.0))
    rep = V.Report(f"invariance {sc.name}")
    if sc.rescale is not None:
        step, mode = sc.rescale, "rescale"
    else:
        step, mode = _need(sc.shift, "--shift or --q"), "shift"
    forms = sc.extra.get("forms")
    if forms is not None and len(forms) != len(hs):
        raise DimensionMismatch(f"{len(forms)} forms given for {len(hs)} hyperplanes")
    for j, h in enumerate(hs):
        form = H.apply(h, curve)
        agree = None
        if forms is not None:
            # factored form supplied by the scenario: must agree with h(f) pointwise
            factored = parse(forms[j])
            agree = catalog._agreement(form, factored)
            if agree > catalog.AGREE_TOL:
                raise ValueError(f"form {j + 1} differs from h(f) (relative deviation {agree:.3g})")
            form = factored
        radius = inner + abs(step) + 0.5 if mode == "shift" else inner * max(1.0, abs(step)) + 0.5
        div = roots.divisor(form, roots.Disc(0, radius))
        res = (H.forward_invariant if mode == "shift" else H.forward_invariant_q)(div, step, inner)
        part = V.Report(f"h{j + 1}", verdict="pass" if res.ok else "fail")
        part.checks = {"forward_invariant": res.ok, "checked": res.checked, "zeros_in_disc": div.count("zero"),
                       "form": str(form), "applied_vs_form": agree}
        part.violations = res.violations[:20]
        rep.parts.append(part)
    rep.verdict = "pass" if all(p.verdict == "pass" for p in rep.parts) else "fail"
    return _report_out(args, rep)


def cmd_borel(args) -> int:
    sc = _scenario(args)
    part = H.borel_partition(sc.curve_obj(), _need(sc.shift, "--shift"), tol=args.periodic_tol,
                             assert_sum_zero=args.sum_zero)
    _emit(args, _dump({"schema": SCHEMA, **part.to_json()}))
    print(f"borel: classes {part.classes}", file=sys.stderr)
    return EXIT_OK


def cmd_smt(args) -> int:
    sc = _scenario(args)
    rep = V.check_smt(sc.curve_obj(), _hyperplanes(args, sc), _need(sc.shift, "--shift"), sc.r_grid.values(),
                      _tol(sc), parallel=args.parallel)
    return _report_out(args, rep)


def cmd_logdiff(args) -> int:
    if args.suite:
        if args.suite == "ineq":
            rep = V.ineq_lemma_suite(args.cases or 200, args.seed, args.parallel)
        else:
            rep = V.logdiff_bound_suite(args.cases or 100, args.seed, args.parallel)
        return _report_out(args, rep)
    sc = _scenario(args)
    f = parse(_need(args.expr or sc.extra.get("expr"), "--expr"))
    c = sc.shift if sc.shift is not None else 1.0
    r = sc.r_grid.values()
    if args.alpha is not None or args.delta is not None:
        params = V.BoundParams(args.alpha or 2.0, args.delta or 0.5, c)
        parts = [V.check_logdiff_bound(f, params, x, _tol(sc)) for x in r]
        rep = V.Report(f"logdiff-bound f={f}", hard=True, parts=parts)
        rep.verdict = "fail" if any(p.verdict == "fail" for p in parts) else "pass"
        rep.r_grid = r
        rep.left = [p.left[0] for p in parts]
        rep.right = [p.right[0] for p in parts]
        rep.errors = [p.errors[0] for p in parts]
        rep.parts = []
        rep.violations = [v for p in parts for v in p.violations]
        rep.checks["K"] = params.K
        return _report_out(args, rep)
    rep = V.check_logdiff_asymptotic(f, c, r, tol=_tol(sc), parallel=args.parallel)
    return _report_out(args, rep)


def cmd_icp(args) -> int:
    sc = _scenario(args)
    f = parse(_need(args.f or sc.extra.get("f"), "--f"))
    g = parse(_need(args.g or sc.extra.get("g"), "--g"))
    tsrc = args.target or sc.extra.get("targets", [])
    if len(tsrc) != 4:
        raise ValueError(f"need exactly 4 targets, got {len(tsrc)}")
    targets = [None if t.strip() in ("inf", "oo") else parse(t) for t in tsrc]
    radius = float(args.disc_radius or sc.extra.get("disc_radius", 2.0))
    rep = V.check_icp_sharing(f, g, targets, _need(sc.shift, "--shift"), roots.Disc(0, radius), strict=False)
    return _report_out(args, rep)


def cmd_example(args) -> int:
    if args.list or not args.name:
        print("\n".join(sorted(catalog.CATALOG)))
        return EXIT_OK
    return _report_out(args, catalog.run_example(args.name))


def cmd_sharpness(args) -> int:
    c = _cplx(args.c) if args.c is not None else 1.0
    if args.projected:
        rep = catalog.run_projected(args.p, c, args.inner_radius or 4.0)
    else:
        rep = catalog.run_sharpness(args.p, c, args.inner_radius or 4.0)
    return _report_out(args, rep)


# ----------------------------------------------------------------------------------
# argument parsing

def _common(p):
    p.add_argument("--scenario", help="scenario JSON file (schema 1)")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--tol", type=float, help="quadrature tolerance")
    p.add_argument("--precision", type=int, help="mantissa bits for point evaluations")
    p.add_argument("--r-min", type=float)
    p.add_argument("--r-max", type=float)
    p.add_argument("--r-points", type=int)
    p.add_argument("--spacing", choices=("linear", "log"))
    p.add_argument("--parallel", type=int, default=1, help="worker processes")


def _curve_args(p, shift=True):
    p.add_argument("--coord", action="append", help="curve coordinate expression (repeat)")
    if shift:
        p.add_argument("--shift", help="shift c (expression, e.g. 2*log(6) or 2*pi*i)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="casorati-lab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("characteristic", help="m, N, T on a radius grid")
    _common(p)
    p.add_argument("--expr")
    p.set_defaults(func=cmd_characteristic)

    p = sub.add_parser("cartan", help="Cartan characteristic of a curve")
    _common(p)
    _curve_args(p, shift=False)
    p.set_defaults(func=cmd_cartan)

    for name, func, extra in (("casorati", cmd_casorati, "--shift"), ("qcasorati", cmd_qcasorati, "--q")):
        p = sub.add_parser(name, help=f"{name} determinant of curve coordinates")
        _common(p)
        _curve_args(p, shift=extra == "--shift")
        if extra == "--q":
            p.add_argument("--q")
        p.add_argument("--at", action="append", help="evaluation point (repeat)")
        p.set_defaults(func=func)

    p = sub.add_parser("dependence", help="linear dependence over c-periodic functions")
    _common(p)
    _curve_args(p)
    p.set_defaults(func=cmd_dependence)

    p = sub.add_parser("general-position", help="check all (n+1)-minors of a hyperplane family")
    _common(p)
    p.add_argument("--vandermonde", type=int, help="use the 2m-vector family for this m")
    p.add_argument("--allow-composite", action="store_true")
    p.set_defaults(func=cmd_general_position)

    p = sub.add_parser("invariance", help="forward invariance of hyperplane preimages")
    _common(p)
    _curve_args(p)
    p.add_argument("--q")
    p.add_argument("--inner-radius", type=float)
    p.add_argument("--vandermonde", type=int)
    p.add_argument("--allow-composite", action="store_true")
    p.set_defaults(func=cmd_invariance)

    p = sub.add_parser("borel", help="partition coordinates by periodic ratios")
    _common(p)
    _curve_args(p)
    p.add_argument("--periodic-tol", type=float, default=1e-6)
    p.add_argument("--sum-zero", action="store_true", help="also check that each class sums to 0")
    p.set_defaults(func=cmd_borel)

    p = sub.add_parser("smt", help="Casorati second main theorem margins")
    _common(p)
    _curve_args(p)
    p.add_argument("--vandermonde", type=int)
    p.add_argument("--allow-composite", action="store_true")
    p.set_defaults(func=cmd_smt)

    p = sub.add_parser("logdiff", help="logarithmic difference bounds and trends")
    _common(p)
    p.add_argument("--expr")
    p.add_argument("--shift")
    p.add_argument("--alpha", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--suite", choices=("ineq", "bound"), help="run a randomized suite instead")
    p.add_argument("--cases", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_logdiff)

    p = sub.add_parser("icp", help="sharing ignoring c-separated pairs")
    _common(p)
    p.add_argument("--f")
    p.add_argument("--g")
    p.add_argument("--target", action="append", help="target expression or 'inf' (repeat 4 times)")
    p.add_argument("--shift")
    p.add_argument("--disc-radius", type=float)
    p.set_defaults(func=cmd_icp)

    p = sub.add_parser("example", help="run a built-in example by name")
    _common(p)
    p.add_argument("name", nargs="?")
    p.add_argument("--list", action="store_true")
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("sharpness", help="sharpness construction in P^10 (or its P^9 projection)")
    _common(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--c")
    p.add_argument("--projected", action="store_true")
    p.add_argument("--inner-radius", type=float)
    p.set_defaults(func=cmd_sharpness)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except SharingViolated as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HARD
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CasoratiLabError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
