"""Evaluate both sides of the explicit inequalities on concrete instances."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import casorati as C
from . import hyperplanes as H
from . import nevanlinna as NV
from . import quadrature, roots
from .errors import (
    CoefficientDegeneracy,
    DependentCoordinates,
    NonMonotoneInput,
    SharingViolated,
)
from .expr import nodes as N

SCHEMA = 1


def _enc(v):
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return [_enc(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_enc(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _enc(x) for k, x in v.items()}
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


@dataclass(frozen=True)
class BoundParams:
    alpha: float
    delta: float
    c: complex

    def __post_init__(self):
        if not self.alpha > 1:
            raise ValueError("alpha must exceed 1")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")

    @property
    def K(self) -> float:
        a, d = self.alpha, self.delta
        return 4 * abs(self.c) ** d * (4 * a + a * d + d) / (d * (1 - d) * (a - 1))

    @property
    def K_factored(self) -> float:
        # partial fractions: (4a + a d + d)/(a - 1) = (4 + d) + (4 + 2 d)/(a - 1)
        a, d = self.alpha, self.delta
        scale = math.exp(math.log(4) + d * math.log(abs(self.c))) if self.c != 0 else 0.0
        return scale * ((4 + d) + (4 + 2 * d) / (a - 1)) / (d * (1 - d))


@dataclass
class Report:
    scenario: str
    r_grid: list = field(default_factory=list)
    left: list = field(default_factory=list)
    right: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    verdict: str = "trend"  # pass | fail | trend
    hard: bool = False  # hard assertion (fail => exit code 2)
    violations: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    columns: dict = field(default_factory=dict)  # extra per-r columns
    checks: dict = field(default_factory=dict)  # named structural results
    parts: list = field(default_factory=list)  # sub-reports

    @property
    def margins(self):
        return [r - l for l, r in zip(self.left, self.right)]

    @property
    def hard_failure(self) -> bool:
        return (self.hard and self.verdict == "fail") or any(p.hard_failure for p in self.parts)

    def to_json(self):
        return _enc({
            "schema": SCHEMA,
            "scenario": self.scenario,
            "verdict": self.verdict,
            "hard": self.hard,
            "r_grid": self.r_grid,
            "left": self.left,
            "right": self.right,
            "margin": self.margins,
            "quadrature_error": self.errors,
            "columns": self.columns,
            "violations": self.violations,
            "checks": self.checks,
            "notes": self.notes,
            "parts": [p.to_json() for p in self.parts],
        })

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, d):
        if d.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {d.get('schema')}")
        return cls(
            d["scenario"], d["r_grid"], d["left"], d["right"], d["quadrature_error"],
            d["verdict"], d["hard"], d["violations"], d["notes"], d["columns"], d["checks"],
            [cls.from_json(p) for p in d["parts"]],
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        extra = sorted(self.columns)
        w.writerow(["scenario", "r", "left", "right", "margin", "err"] + extra)
        for i, r in enumerate(self.r_grid):
            row = [self.scenario, r, self.left[i], self.right[i], self.right[i] - self.left[i], self.errors[i]]
            row += [self.columns[k][i] for k in extra]
            w.writerow([_csv_cell(x) for x in row])
        out = buf.getvalue()
        for p in self.parts:
            out += p.to_csv().split("\n", 1)[1] if p.r_grid else ""
        return out

    def summary(self) -> str:
        s = f"{self.scenario}: {self.verdict}"
        if self.violations:
            s += f" ({len(self.violations)} violation{'s' if len(self.violations) != 1 else ''})"
        if self.parts:
            s += " [" + ", ".join(f"{p.scenario}: {p.verdict}" for p in self.parts) + "]"
        return s


def _csv_cell(x):
    if isinstance(x, (complex, np.complexfloating)):
        return f"{x.real!r}{x.imag:+}j"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def pmap(fn, items, parallel: int = 1):
    """Map in input order; processes when parallel > 1."""
    items = list(items)
    if parallel and parallel > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


# ----------------------------------------------------------------------------------
# log+|1 + c/(z - a)| averaged over |z| = r

def ineq_lemma_sides(a, c, delta, r, tol=1e-10):
    a, c = complex(a), complex(c)
    if not 0 < delta < 1 or not r > 0:
        raise ValueError("need delta in (0, 1) and r > 0")
    rhs = (1 / delta) * math.log1p(abs(c) ** delta / ((1 - delta) * r ** delta)) if c != 0 else 0.0
    if c == 0:
        return 0.0, rhs, 0.0
    sing = []
    for p in (a, a - c):
        if p != 0 and abs(abs(p) - r) < 0.05 * r:
            sing.append(math.atan2(p.imag, p.real))
    # log+ kinks: |z - a + c| = |z - a| on the bisector m + t u of a and a - c
    m, u = a - c / 2, 1j * c / abs(c)
    b = (m * u.conjugate()).real
    disc = b * b - (abs(m) ** 2 - r * r)
    if disc > 0:
        for t in (-b - math.sqrt(disc), -b + math.sqrt(disc)):
            z = m + t * u
            sing.append(math.atan2(z.imag, z.real))

    def integrand(theta):
        z = r * np.exp(1j * theta)
        with np.errstate(all="ignore"):
            v = np.log(np.abs(1 + c / (z - a)))
        return np.where(np.isnan(v), np.inf, np.maximum(v, 0.0))

    res = quadrature.circle_mean(integrand, sing, tol=tol, strict=False)
    return float(res.value), rhs, float(res.error)


def check_ineq_lemma(a, c, delta, r, tol=1e-10) -> Report:
    lhs, rhs, err = ineq_lemma_sides(a, c, delta, r, tol)
    viol = lhs - rhs > 3 * err + 1e-14
    rep = Report(f"ineq-lemma a={complex(a)} c={complex(c)} delta={delta}", [r], [lhs], [rhs], [err],
                 "fail" if viol else "pass", True)
    if viol:
        rep.violations.append({"r": r, "lhs": lhs, "rhs": rhs, "err": err})
    return rep


def _ineq_case(args):
    a, c, delta, r = args
    return ineq_lemma_sides(a, c, delta, r)


def ineq_lemma_suite(n=200, seed=0, parallel=1) -> Report:
    rng = np.random.default_rng(seed)

    def disc5():
        return 5 * math.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())

    cases = [(disc5(), disc5(), float(rng.uniform(0.1, 0.9)), float(10 ** rng.uniform(-1, 2))) for _ in range(n)]
    out = pmap(_ineq_case, cases, parallel)
    rep = Report(f"ineq-lemma-suite n={n} seed={seed}", hard=True)
    for (a, c, d, r), (lhs, rhs, err) in zip(cases, out):
        rep.r_grid.append(r)
        rep.left.append(lhs)
        rep.right.append(rhs)
        rep.errors.append(err)
        if lhs - rhs > 3 * err + 1e-14:
            rep.violations.append({"a": a, "c": c, "delta": d, "r": r, "lhs": lhs, "rhs": rhs})
    rep.verdict = "fail" if rep.violations else "pass"
    return rep


# ----------------------------------------------------------------------------------
# m(r, f(z+c)/f(z)) <= K/r^delta (T(alpha(r+|c|), f) + log+ 1/|f(0)|)

def _normalise_origin(f: N.Expr):
    div = roots.divisor(f, roots.Disc(0, 1e-3))
    k = -NV.origin_order(div)
    return (N.mul(f, N.ipow(N.Z, k)) if k else f), k


def logdiff_bound_sides(f: N.Expr, params: BoundParams, r: float, tol=1e-9):
    w, k = _normalise_origin(f)
    c = complex(params.c)
    ratio = N.div(N.shift(w, c), w)
    div = roots.divisor(ratio, roots.Disc(0, r * 1.05))
    lhs, e1 = NV.proximity(ratio, r, tol, div)
    R = params.alpha * (r + abs(c))
    cs = NV.characteristic(w, R, tol)
    f0 = abs(complex(w.evaluate(0j)))
    rhs = params.K / r ** params.delta * (cs.T + max(0.0, -math.log(f0)))
    err = e1 + params.K / r ** params.delta * cs.quadrature_error
    return lhs, rhs, err, k


def check_logdiff_bound(f: N.Expr, params: BoundParams, r: float, tol=1e-9) -> Report:
    lhs, rhs, err, k = logdiff_bound_sides(f, params, r, tol)
    viol = lhs - rhs > 3 * err + 1e-12
    rep = Report(f"logdiff-bound f={f}", [r], [lhs], [rhs], [err], "fail" if viol else "pass", True)
    rep.checks["K"] = params.K
    if k:
        rep.notes.append(f"used z^{k} f (origin normalisation)")
    if viol:
        rep.violations.append({"r": r, "lhs": lhs, "rhs": rhs, "err": err})
    return rep


def random_test_function(rng, kind):
    def pt():
        return float(rng.uniform(0.2, 5)) * np.exp(2j * np.pi * rng.random())

    if kind == "rational":
        num = N.mul(N.sub(N.Z, N.Const(pt())), N.sub(N.Z, N.Const(pt())))
        return N.div(num, N.sub(N.Z, N.Const(pt())))
    a = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
    return N.mul(N.exp(N.mul(N.Const(a), N.Z)), N.sub(N.Z, N.Const(pt())))


def _bound_case(args):
    f, alpha, delta, c, r = args
    lhs, rhs, err, _ = logdiff_bound_sides(f, BoundParams(alpha, delta, c), r)
    return lhs, rhs, err


def logdiff_bound_suite(n=100, seed=0, parallel=1, kinds=("rational", "exp")) -> Report:
    rng = np.random.default_rng(seed)
    cases = []
    for i in range(n):
        f = random_test_function(rng, kinds[i % len(kinds)])
        c = 3 * math.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
        cases.append((f, float(rng.uniform(1.2, 4)), float(rng.uniform(0.1, 0.9)), complex(c),
                      float(rng.uniform(0.5, 20))))
    out = pmap(_bound_case, cases, parallel)
    rep = Report(f"logdiff-bound-suite n={n} seed={seed}", hard=True)
    for (f, alpha, delta, c, r), (lhs, rhs, err) in zip(cases, out):
        rep.r_grid.append(r)
        rep.left.append(lhs)
        rep.right.append(rhs)
        rep.errors.append(err)
        if lhs - rhs > 3 * err + 1e-12:
            rep.violations.append({"f": str(f), "alpha": alpha, "delta": delta, "c": c, "r": r,
                                   "lhs": lhs, "rhs": rhs})
    rep.verdict = "fail" if rep.violations else "pass"
    return rep


# ----------------------------------------------------------------------------------
# trend reports

def exceptional_windows(r, margin):
    """Grid intervals on which the margin decreases; with their log measure."""
    r = np.asarray(r, dtype=float)
    m = np.asarray(margin, dtype=float)
    wins, measure = [], 0.0
    for i in range(len(r) - 1):
        if m[i + 1] < m[i]:
            wins.append((float(r[i]), float(r[i + 1])))
            measure += math.log(r[i + 1] / r[i])
    return wins, measure


def _logdiff_row(args):
    f, c, r, tol = args
    ratio = N.div(N.shift(f, c), f)
    div = roots.divisor(ratio, roots.Disc(0, r * 1.05))
    m, e = NV.proximity(ratio, r, tol, div)
    cs = NV.characteristic(f, r, tol)
    return m, e, cs.T, cs.quadrature_error


def check_logdiff_asymptotic(f: N.Expr, c, r_grid, eps=0.05, varsigma=None, tol=1e-9, parallel=1) -> Report:
    c = complex(c)
    r_grid = [float(x) for x in r_grid]
    rows = pmap(_logdiff_row, [(f, c, r, tol) for r in r_grid], parallel)
    m = np.array([x[0] for x in rows])
    T = np.array([x[2] for x in rows])
    r = np.array(r_grid)
    if varsigma is None:
        varsigma = NV.growth_estimate(f, r_grid).varsigma if len(r_grid) >= 8 else 0.0
    b1 = np.log(r) / r * T
    b2 = T / r ** (1 - varsigma - eps)
    rep = Report(f"logdiff-asymptotic f={f} c={c}", r_grid, m.tolist(), b1.tolist(),
                 [x[1] for x in rows], "trend")
    rep.columns = {
        "T": T.tolist(),
        "bound_finite_order": b1.tolist(),
        "bound_hyper_order": b2.tolist(),
        "ratio_m_over_T": (m / np.where(T > 0, T, np.nan)).tolist(),
        "ratio_m_over_finite_order_bound": (m / np.where(b1 > 0, b1, np.nan)).tolist(),
    }
    rep.checks["varsigma_used"] = float(varsigma)
    rep.notes.append("trend only: the estimates hold outside an exceptional set, no pointwise pass/fail")
    return rep


def check_shift_characteristic(samples, s: float, delta: float, varsigma: float | None = None) -> Report:
    pts = np.asarray(samples, dtype=float)
    r, T = pts[:, 0], pts[:, 1]
    if np.any(np.diff(r) <= 0):
        raise NonMonotoneInput("radii must be strictly increasing")
    if np.any(np.diff(T) < 0):
        raise NonMonotoneInput("T samples must be non-decreasing")
    if varsigma is not None and not 0 < delta < 1 - varsigma:
        raise ValueError(f"delta must lie in (0, {1 - varsigma})")
    keep = r + s <= r[-1]
    rr = r[keep]
    Ts = np.interp(rr + s, r, T)
    q = np.where(T[keep] > 0, (Ts - T[keep]) * rr ** delta / np.where(T[keep] > 0, T[keep], 1.0), 0.0)
    rep = Report(f"shift-characteristic s={s} delta={delta}", rr.tolist(), q.tolist(), [0.0] * len(rr),
                 [0.0] * len(rr), "trend")
    wins, meas = exceptional_windows(rr, -q)
    rep.checks["candidate_exceptional_windows"] = wins
    rep.checks["window_log_measure"] = meas
    rep.notes.append("left column is (T(r+s) - T(r)) r^delta / T(r); expected to trend to 0")
    return rep


def _linear_fit(x, y):
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0]), float(coef[1])


def build_L(g: H.Curve, hs, c):
    """L = f_0 f_1(z+c) ... f_n(z+nc) f_{n+1} ... f_q / C(g_0..g_n)."""
    n = g.n
    fs = [H.apply(h, g) for h in hs]
    num = None
    for j, fj in enumerate(fs):
        term = N.shift(fj, j * c) if 0 < j <= n else fj
        num = term if num is None else N.mul(num, term)
    return N.div(num, C.casorati(g.coords, c)), fs


def check_smt(g: H.Curve, hs, c, r_grid, tol=1e-9, parallel=1) -> Report:
    c = complex(c)
    hs = H.as_hyperplanes(hs)
    dep = C.dependence_over_periodic(g.coords, c)
    if dep.verdict == "dependent":
        raise DependentCoordinates(f"coordinates look linearly dependent over the c-periodic field (c={c})")
    gp = H.general_position(hs)
    if not gp.ok:
        raise CoefficientDegeneracy(f"coefficient subset {gp.witness} is linearly dependent")
    q = len(hs) - 1
    L, _ = build_L(g, hs, c)
    r = np.array([float(x) for x in r_grid])
    div = roots.divisor(L, roots.Disc(0, float(r[-1]) * 1.001))
    Tg = np.array([x[0] for x in pmap(_cartan_row, [(g.coords, x, tol) for x in r], parallel)])
    Nz = np.array([NV.counting(div, x, "zero") for x in r])
    Np = np.array([NV.counting(div, x, "pole") for x in r])
    lhs = (q - g.n) * Tg
    rhs = Nz - Np
    third = max(1, len(r) // 3)
    offset = float(np.max(lhs[:third] - rhs[:third]))
    margin = rhs - lhs
    slope, _ = _linear_fit(r, margin)
    rep = Report(f"smt q={q} n={g.n} c={c}", r.tolist(), lhs.tolist(), rhs.tolist(), [tol] * len(r), "trend")
    rep.columns = {"T_g": Tg.tolist(), "N_zero_L": Nz.tolist(), "N_pole_L": Np.tolist(),
                   "margin_with_offset": (margin + offset).tolist()}
    wins, meas = exceptional_windows(r, margin)
    rep.checks.update({"dependence": dep.verdict, "O1_offset": offset, "margin_slope": slope,
                       "candidate_exceptional_windows": wins, "window_log_measure": meas,
                       "L": str(L)})
    rep.notes.append("heuristic: O(1) offset fitted as the max deficit over the smallest third of the grid")
    return rep


def _cartan_row(args):
    coords, r, tol = args
    return NV.cartan_characteristic(coords, r, tol)


def check_reduction(w_num: N.Expr, w_den: N.Expr, targets, c, r_grid, tol=1e-9) -> Report:
    """(q-1)T(r,w) against the truncated counting sum for w = g_0/g_1."""
    c = complex(c)
    w = N.div(w_num, w_den)
    q = len(targets)
    r = [float(x) for x in r_grid]
    lhs, rhs, parts = [], [], []
    delta = N.sub(N.shift(w, c), w)
    for x in r:
        T = NV.characteristic(w, x, tol).T
        tp = NV.truncated_counting(w, None, c, x)
        ta = [NV.truncated_counting(w, a, c, x) for a in targets]
        dz = roots.divisor(delta, roots.Disc(0, x * 1.001))
        wd = roots.divisor(w, roots.Disc(0, x * 1.001))
        special = list(wd.locations("pole"))
        for a in targets:
            special += list(roots.divisor(N.sub(w, N.Const(a)), roots.Disc(0, x * 1.001)).locations("zero"))
        special = np.array(special, dtype=complex)
        keep = [i for i, z0 in enumerate(dz.locations("zero"))
                if special.size == 0 or np.min(np.abs(special - z0)) > 1e-7 * (1 + abs(z0))]
        n0 = NV._counting_points(dz.locations("zero")[keep], dz.multiplicities("zero")[keep], x)
        lhs.append((q - 1) * T)
        rhs.append(tp + sum(ta) - n0)
        parts.append([tp, *ta, n0])
    rep = Report(f"reduction q={q} c={c}", r, lhs, rhs, [tol] * len(r), "trend")
    rep.columns = {"N_trunc_poles": [p[0] for p in parts], "N0_delta": [p[-1] for p in parts]}
    for i, a in enumerate(targets):
        rep.columns[f"N_trunc_a{i}"] = [p[1 + i] for p in parts]
    rep.notes.append("trend only: inequality holds up to o(T) outside an exceptional set")
    return rep


# ----------------------------------------------------------------------------------
# IcP sharing

def _local_order(f, z0, rho):
    try:
        return roots.count_zeros_minus_poles(f, roots.Disc(z0, rho))
    except Exception:
        return None


def icp_violations(f: N.Expr, g: N.Expr, a, c, disc: roots.Disc):
    """Conditions (i)-(iii) at every zero/pole of (f-a)/(g-a) inside disc."""
    c = complex(c)
    if a is None:
        ratio = N.div(g, f)
    else:
        a = N.as_expr(a)
        ratio = N.div(N.sub(f, a), N.sub(g, a))
    div = roots.divisor(ratio, disc)
    locs = div.locations()
    out = []
    for e in div:
        z0 = e.location
        others = np.abs(locs - (z0 + c))
        others = others[others > 1e-9]
        rho = 1e-3 * (1 + abs(z0))
        if others.size:
            rho = min(rho, 0.3 * float(others.min()))
        k = _local_order(ratio, z0 + c, rho)
        if e.kind == "zero":
            ok = k is not None and k >= e.mult
            cond = "ii"
        else:
            ok = k is not None and k <= -e.mult
            cond = "iii"
        if not ok:
            out.append({"point": z0, "kind": e.kind, "mult": e.mult, "order_at_shift": k, "condition": cond})
    return out, div


def fit_mobius(f: N.Expr, g: N.Expr, c, n_fit=8, n_check=8):
    """Fit f = (A g + B)/(C g + D) with constant A..D; check at further samples.

    Returns (coefficients, fit residual, check residual).  Constant
    coefficients are trivially c-periodic.
    """
    z = C.sample_points(n_fit + n_check, radii=(0.7, 1.3), start=3)
    fv = f.evaluate(z)
    gv = g.evaluate(z)
    M = np.column_stack([gv, np.ones_like(gv), -fv * gv, -fv])
    M = M / np.linalg.norm(M, axis=1, keepdims=True)
    _, s, vh = np.linalg.svd(M[:n_fit])
    v = vh[-1].conj()
    v = v / v[np.argmax(np.abs(v))]
    fit_res = float(s[-1] / s[0])
    chk = float(np.max(np.abs(M[n_fit:] @ v)))
    return v, fit_res, chk


def check_icp_sharing(f: N.Expr, g: N.Expr, targets, c, disc: roots.Disc, strict=True) -> Report:
    rep = Report(f"icp c={complex(c)}", hard=True)
    for i, a in enumerate(targets):
        v, div = icp_violations(f, g, a, c, disc)
        rep.checks[f"target_{i}"] = {"target": "inf" if a is None else str(a), "points": len(div),
                                     "violations": len(v)}
        for x in v:
            x["target"] = i
        rep.violations += v
    coef, fit_res, chk = fit_mobius(f, g, c)
    rep.checks["mobius"] = {"A": coef[0], "B": coef[1], "C": coef[2], "D": coef[3],
                            "fit_residual": fit_res, "check_residual": chk,
                            "constant_fit": bool(chk < 1e-8)}
    rep.verdict = "fail" if rep.violations else "pass"
    if strict and rep.violations:
        v = rep.violations[0]
        raise SharingViolated(
            f"condition ({v['condition']}) fails at {v['point']:.6g} for target {v['target']}",
            witness=v["point"], condition=v["condition"],
        )
    return rep
