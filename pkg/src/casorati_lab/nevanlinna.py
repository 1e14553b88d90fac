"""Nevanlinna and Cartan functions evaluated on concrete meromorphic functions."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import quadrature, roots
from .errors import CommonZeroSuspected, DivisorTooSmall, GridTooSmall, QuadratureDivergence
from .expr import nodes as N

DEFAULT_TOL = 1e-9
# divisor points closer than this (relative) to the circle become breakpoints
_NEAR_CIRCLE = 1e-2
# |g_k| below this at a probe point for every k signals a common zero
COMMON_ZERO_TOL = 1e-12


@dataclass
class CharSample:
    r: float
    m: float
    N: float
    T: float
    quadrature_error: float
    origin_order: int = 0  # k such that z^k f was used (0: no normalisation)

    def as_row(self):
        return [self.r, self.m, self.N, self.T, self.quadrature_error]


@dataclass
class GrowthEstimate:
    sigma: float
    varsigma: float
    r_grid: list
    fit_residual: float
    T: list = field(default_factory=list)
    label: str = "empirical: limsup not computable from finitely many samples"

    def to_json(self):
        return asdict(self)


def _circle(r):
    def z_of(theta):
        return r * np.exp(1j * theta)
    return z_of


def _singular_angles(div, r):
    if div is None:
        return []
    out = []
    for e in div:
        z = e.location
        if abs(abs(z) - r) <= _NEAR_CIRCLE * r and z != 0:
            out.append(math.atan2(z.imag, z.real))
    return out


# relative error floor: once log|f| is huge, absolute tolerances sit below roundoff
_RTOL_FLOOR = 1e-13

# sampling density for locating the kinks of log+ and of upper envelopes
_KINK_SAMPLES = 512


def _crossings(fn, theta, vals):
    """Angles where the real function ``fn`` changes sign between samples."""
    out = []
    s = np.sign(vals)
    idx = np.nonzero((s[:-1] * s[1:] < 0) & np.isfinite(vals[:-1]) & np.isfinite(vals[1:]))[0]
    for i in idx:
        try:
            out.append(brentq(lambda t: float(fn(np.array([t]))[0]), theta[i], theta[i + 1], xtol=1e-14))
        except ValueError:
            out.append(0.5 * (theta[i] + theta[i + 1]))
    return out


def _theta_grid():
    # the grid spans one full turn; the last point repeats the first
    return 0.6180339887498949 + np.linspace(0, 2 * np.pi, _KINK_SAMPLES + 1)


def proximity(f: N.Expr, r: float, tol: float = DEFAULT_TOL, div=None):
    """m(r, f) = mean of log+|f| over |z| = r; returns (m, error estimate)."""
    if not r > 0:
        raise ValueError("radius must be positive")
    z_of = _circle(r)

    def integrand(theta):
        lv = np.real(f.log_evaluate(z_of(theta)))
        return np.where(np.isnan(lv), np.inf, np.maximum(lv, 0.0))

    # log+ has a kink wherever |f| crosses 1; splitting there keeps every
    # panel smooth, so the Kronrod error estimate is reliable
    def level(theta):
        return np.real(f.log_evaluate(z_of(theta)))

    th = _theta_grid()
    kinks = _crossings(level, th, level(th))
    res = quadrature.circle_mean(integrand, _singular_angles(div, r) + kinks, tol=tol,
                                  rtol=_RTOL_FLOOR, strict=False)
    if not res.converged:
        raise QuadratureDivergence(f"m({r}, {f}) did not converge (error {res.error:.3g})")
    return float(res.value), float(res.error)


def _covers(div, r):
    d = div.disc
    return d.radius - abs(d.center) >= r * (1 - 1e-5)


def counting(div, r: float, kind: str = "pole") -> float:
    """N(r) for the zeros or poles of a divisor (exact piecewise-log sum)."""
    if not _covers(div, r):
        raise DivisorTooSmall(f"divisor disc {div.disc} does not cover |z| <= {r}")
    return _counting_points(div.locations(kind), div.multiplicities(kind), r)


def _counting_points(locs, mults, r):
    if len(locs) == 0:
        return 0.0
    a = np.abs(np.asarray(locs))
    m = np.asarray(mults, dtype=float)
    at0 = a <= 1e-12 * max(1.0, r)
    inside = (~at0) & (a <= r)
    return float(np.sum(m[inside] * np.log(r / a[inside])) + np.sum(m[at0]) * math.log(r))


def origin_order(div) -> int:
    """Order of the divisor at 0 (zeros positive, poles negative)."""
    return sum(e.signed for e in div if abs(e.location) <= 1e-12)


def characteristic(f: N.Expr, r: float, tol: float = DEFAULT_TOL, div=None) -> CharSample:
    """T(r, f) = m(r, f) + N(r, f).

    If f(0) is 0 or infinite, z^k f with the unique k making it finite and
    nonzero at the origin is used instead (recorded in ``origin_order``).
    """
    if div is None:
        div = roots.divisor(f, roots.Disc(0, r))
    k = -origin_order(div)
    g = f
    if k:
        g = N.mul(f, N.ipow(N.Z, k))
        div = roots.Divisor([e for e in div if abs(e.location) > 1e-12], div.disc, div.method)
    m, err = proximity(g, r, tol, div)
    n = counting(div, r, "pole")
    return CharSample(r, m, n, m + n, err, k)


def _coords(g):
    return list(getattr(g, "coords", g))


def _upper_envelope(coords, z):
    logs = np.stack([np.real(c.log_evaluate(z)) for c in coords])
    return np.max(logs, axis=0)


def cartan_characteristic(g, r: float, tol: float = DEFAULT_TOL, probes: int = 256):
    """T_g(r) = mean over |z|=r of max_k log|g_k| minus the same at 0."""
    coords = _coords(g)
    u0 = float(_upper_envelope(coords, np.array([0j]))[0])
    if not np.isfinite(u0) or u0 < math.log(COMMON_ZERO_TOL):
        raise CommonZeroSuspected("all coordinates vanish at the origin")
    theta = 0.1234 + np.linspace(0, 2 * np.pi, probes, endpoint=False)
    probe = _upper_envelope(coords, r * np.exp(1j * theta))
    if np.any(probe < math.log(COMMON_ZERO_TOL)):
        i = int(np.argmin(probe))
        raise CommonZeroSuspected(f"all coordinates nearly vanish at {r * np.exp(1j * theta[i]):.6g}")
    z_of = _circle(r)

    def integrand(th):
        return _upper_envelope(coords, z_of(th))

    # kinks of the envelope: the leading coordinate changes between samples
    th = _theta_grid()
    logs = np.stack([np.real(c.log_evaluate(z_of(th))) for c in coords])
    lead = np.argmax(logs, axis=0)
    kinks = []
    for i in np.nonzero(lead[:-1] != lead[1:])[0]:
        a, b = coords[lead[i]], coords[lead[i + 1]]

        def gap(t, a=a, b=b):
            zz = z_of(t)
            return np.real(a.log_evaluate(zz)) - np.real(b.log_evaluate(zz))

        kinks.extend(_crossings(gap, th[i:i + 2], gap(th[i:i + 2])))
    res = quadrature.circle_mean(integrand, kinks, tol=tol, rtol=_RTOL_FLOOR, strict=False)
    if not res.converged:
        raise QuadratureDivergence(f"T_g({r}) did not converge (error {res.error:.3g})")
    return float(res.value) - u0, float(res.error)


def _identically_zero(d: N.Expr, ref: N.Expr, probes=16) -> bool:
    rng = np.random.default_rng(7)
    z = np.concatenate([
        np.exp(2j * np.pi * rng.random(probes // 2)),
        3.0 * np.exp(2j * np.pi * rng.random(probes // 2)),
    ])
    dv = np.abs(d.evaluate(z))
    rv = np.abs(ref.evaluate(z))
    ok = np.isfinite(dv) & np.isfinite(rv)
    return bool(np.all(dv[ok] <= 1e-12 * (1.0 + rv[ok])))


def truncated_counting(w: N.Expr, a, c, r: float, details: bool = False):
    """Truncated counting function of the a-points of w (a=None or inf: poles).

    Each a-point z0 counts max(0, mult - ord_{z0} Delta_c W) with W = w
    (W = 1/w for poles).  If Delta_c W vanishes identically every
    contribution is 0 (documented convention).
    """
    c = complex(c)
    if a is None or (isinstance(a, (float, complex)) and not np.isfinite(abs(a))):
        W, target = N.div(1, w), N.div(1, w)
    else:
        W, target = w, N.sub(w, N.Const(a))
    delta = N.sub(N.shift(W, c), W)
    degenerate = _identically_zero(delta, W)
    if degenerate:
        return (0.0, []) if details else 0.0
    div = roots.divisor(target, roots.Disc(0, r))
    pts = div.locations("zero")
    mults = div.multiplicities("zero")
    weights = []
    for z0, m in zip(pts, mults):
        others = np.abs(div.locations() - z0)
        others = others[others > 0]
        rho = 1e-4 * (1 + abs(z0))
        if others.size:
            rho = min(rho, 0.3 * float(others.min()))
        try:
            ordd = roots.count_zeros_minus_poles(delta, roots.Disc(z0, rho))
        except Exception:
            ordd = 0
        weights.append(max(0, int(m) - max(0, ordd)))
    val = _counting_points(pts, weights, r)
    if details:
        return val, list(zip(pts, mults, weights))
    return val


def _fit(x, y):
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid ** 2)))


def growth_estimate(f_or_curve, r_grid, tol: float = 1e-7) -> GrowthEstimate:
    """Least-squares order and hyper-order fits from T sampled on r_grid."""
    r = np.asarray(r_grid, dtype=float)
    if r.size < 8:
        raise GridTooSmall(f"need at least 8 radii, got {r.size}")
    if np.any(np.diff(r) <= 0):
        raise GridTooSmall("radius grid must be strictly increasing")
    if isinstance(f_or_curve, N.Expr):
        T = np.array([characteristic(f_or_curve, x, tol).T for x in r])
    else:
        T = np.array([cartan_characteristic(f_or_curve, x, tol)[0] for x in r])
    lr = np.log(r)
    lt = np.log(np.maximum(T, 1.0))
    llt = np.log(np.maximum(lt, 1.0))
    sigma, res1 = _fit(lr, lt)
    varsigma, res2 = _fit(lr, llt)
    return GrowthEstimate(sigma, varsigma, r.tolist(), max(res1, res2), T.tolist())


def samples_to_csv(samples) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "m", "N", "T", "err"])
    for s in samples:
        w.writerow([repr(float(v)) for v in s.as_row()])
    return buf.getvalue()


def samples_to_json(samples) -> str:
    return json.dumps([asdict(s) for s in samples], indent=2)
