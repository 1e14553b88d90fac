"""Zero/pole divisors inside a disc.

Three routes, tried in this order by :func:`divisor`:

1. structural recursion through products, quotients and integer powers;
2. closed forms: library functions with affine arguments (catalog),
   polynomials, exponential polynomials whose frequencies are integer
   multiples of a common one, and ``a*T + b`` with ``T`` one of
   ``exp(exp(u))``, ``sin(u)``, ``cos(u)`` for affine ``u``;
3. the argument principle (:func:`locate_divisor`) for everything else.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import quadrature
from .errors import (
    BoundaryContamination,
    ClusterUnresolved,
    QuadratureDivergence,
    UnknownFunction,
)
from .expr import nodes as N
from .expr.special import elliptic_data

TWO_PI = 2.0 * math.pi
# radius perturbation schedule for contours that hit a zero or pole
PERTURB_STEPS = 8
PERTURB_SIZE = 1e-6
MIN_CELL = 1e-9
# location tolerance when merging divisor entries
MERGE_TOL = 1e-9


@dataclass(frozen=True)
class Disc:
    center: complex = 0j
    radius: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise ValueError(f"disc radius must be positive, got {self.radius}")

    def contains(self, z, slack=1e-12):
        return np.abs(np.asarray(z) - self.center) <= self.radius * (1.0 + slack)

    def to_json(self):
        return {"center": [self.center.real, self.center.imag], "radius": self.radius}

    @classmethod
    def from_json(cls, d):
        c = d.get("center", [0.0, 0.0])
        return cls(complex(c[0], c[1]), d["radius"])


@dataclass(frozen=True)
class DivisorEntry:
    location: complex
    mult: int
    kind: str  # "zero" | "pole"

    @property
    def signed(self) -> int:
        return self.mult if self.kind == "zero" else -self.mult


@dataclass
class Divisor:
    entries: list = field(default_factory=list)
    disc: Disc = field(default_factory=Disc)
    method: str = "catalog"

    def __post_init__(self):
        self.entries = sorted(self.entries, key=lambda e: (round(e.location.real, 9), round(e.location.imag, 9), e.kind))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def of_kind(self, kind):
        return [e for e in self.entries if e.kind == kind]

    def zeros(self):
        return self.of_kind("zero")

    def poles(self):
        return self.of_kind("pole")

    def count(self, kind=None) -> int:
        return sum(e.mult for e in self.entries if kind is None or e.kind == kind)

    @property
    def degree(self) -> int:
        """Zeros minus poles, with multiplicity."""
        return sum(e.signed for e in self.entries)

    def locations(self, kind=None):
        return np.array([e.location for e in self.entries if kind is None or e.kind == kind], dtype=complex)

    def multiplicities(self, kind=None):
        return np.array([e.mult for e in self.entries if kind is None or e.kind == kind], dtype=int)

    def reciprocal(self) -> "Divisor":
        flip = {"zero": "pole", "pole": "zero"}
        return Divisor([DivisorEntry(e.location, e.mult, flip[e.kind]) for e in self.entries], self.disc, self.method)

    def restrict(self, disc: Disc) -> "Divisor":
        return Divisor([e for e in self.entries if disc.contains(e.location)], disc, self.method)

    def translate(self, delta) -> "Divisor":
        """Move every location and the disc by ``delta``."""
        delta = complex(delta)
        return Divisor(
            [DivisorEntry(e.location + delta, e.mult, e.kind) for e in self.entries],
            Disc(self.disc.center + delta, self.disc.radius),
            self.method,
        )

    def to_json(self):
        return {
            "disc": self.disc.to_json(),
            "method": self.method,
            "entries": [
                {"re": e.location.real, "im": e.location.imag, "mult": e.mult, "kind": e.kind}
                for e in self.entries
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, d):
        ents = [DivisorEntry(complex(x["re"], x["im"]), int(x["mult"]), x["kind"]) for x in d["entries"]]
        return cls(ents, Disc.from_json(d["disc"]), d.get("method", "catalog"))


def _combine(points, disc: Disc, method: str) -> Divisor:
    """Merge (location, signed multiplicity) pairs into a Divisor."""
    pts = [(complex(z), int(m)) for z, m in points if m != 0 and disc.contains(z)]
    if not pts:
        return Divisor([], disc, method)
    locs = np.array([p[0] for p in pts])
    mults = np.array([p[1] for p in pts])
    tree = cKDTree(np.column_stack([locs.real, locs.imag]))
    seen = np.zeros(len(pts), dtype=bool)
    out = []
    for i in range(len(pts)):
        if seen[i]:
            continue
        tol = MERGE_TOL * (1.0 + abs(locs[i]))
        group = [j for j in tree.query_ball_point([locs[i].real, locs[i].imag], tol) if not seen[j]]
        seen[group] = True
        m = int(np.sum(mults[group]))
        if m:
            z = complex(np.mean(locs[group]))
            out.append(DivisorEntry(z, abs(m), "zero" if m > 0 else "pole"))
    return Divisor(out, disc, method)


# ----------------------------------------------------------------------------------
# lattice enumeration helpers

def _line_points(p0: complex, d: complex, center: complex, radius: float):
    """Points p0 + k d (k integer) inside the disc."""
    dd = abs(d) ** 2
    t = ((center - p0) * d.conjugate()).real / dd
    span = radius / abs(d)
    k = np.arange(math.floor(t - span) - 1, math.ceil(t + span) + 2)
    z = p0 + k * d
    return z[np.abs(z - center) <= radius * (1 + 1e-12)]


def _geometric_points(rho: complex, center: complex, radius: float, start=0):
    """rho**j, j >= start, inside the disc (|rho| > 1)."""
    jmax = int(math.ceil(math.log(abs(center) + radius + 1.0) / math.log(abs(rho)))) + 1
    j = np.arange(start, max(start, jmax) + 1)
    z = np.power(complex(rho), j)
    return z[np.abs(z - center) <= radius * (1 + 1e-12)]


def _catalog_points(name: str, params: dict, center: complex, radius: float):
    """(location, signed multiplicity) pairs of a library function in u-space."""
    if name == "sin":
        return [(z, 1) for z in _line_points(0j, math.pi, center, radius)]
    if name == "cos":
        return [(z, 1) for z in _line_points(math.pi / 2, math.pi, center, radius)]
    if name in ("gamma", "rgamma"):
        s = -1 if name == "gamma" else 1
        pts = _line_points(0j, -1.0, center, radius)
        return [(z, s) for z in pts if z.real <= 0.5]
    if name in ("qgamma", "rqgamma"):
        q = complex(params["q"])
        if not 0 < abs(q) < 1:
            from .errors import BadScale
            raise BadScale(f"q-gamma needs 0 < |q| < 1, got {q}")
        s = -1 if name == "qgamma" else 1
        return [(z, s) for z in _geometric_points(1.0 / q, center, radius)]
    if name == "prodq":
        rho = complex(params["q"])
        return [(z, 1) for z in _geometric_points(rho, center, radius)]
    if name in ("sn", "cn", "dn"):
        ed = elliptic_data(float(params["k"]))
        K, Kp = ed.K, ed.Kp
        zero_off = {"sn": 0j, "cn": K + 0j, "dn": K + 1j * Kp}[name]
        pole_off = 1j * Kp
        out = []
        for off, s in ((zero_off, 1), (pole_off, -1)):
            # rectangular lattice off + 2nK + 2miK'
            n = np.arange(math.floor((center.real - radius - off.real) / (2 * K)) - 1,
                          math.ceil((center.real + radius - off.real) / (2 * K)) + 2)
            m = np.arange(math.floor((center.imag - radius - off.imag) / (2 * Kp)) - 1,
                          math.ceil((center.imag + radius - off.imag) / (2 * Kp)) + 2)
            zz = (off + 2 * K * n[:, None] + 2j * Kp * m[None, :]).ravel()
            zz = zz[np.abs(zz - center) <= radius * (1 + 1e-12)]
            out.extend((z, s) for z in zz)
        return out
    if name == "exp":
        return []
    raise UnknownFunction(name)


CATALOG_NAMES = ("sin", "cos", "gamma", "rgamma", "qgamma", "rqgamma", "prodq", "sn", "cn", "dn", "exp")


def catalog_divisor(name: str, params: dict | None, d: Disc, affine=(1.0, 0.0)) -> Divisor:
    """Exact divisor of ``name(a z + b)`` in the disc (default a=1, b=0).

    ``qgamma`` is gamma_q (poles at q^-k), ``rqgamma`` its reciprocal,
    ``prodq`` the product prod_j (1 - u/q^j) with |q| > 1.
    """
    params = dict(params or {})
    a, b = complex(affine[0]), complex(affine[1])
    pts = _catalog_points(name, params, a * d.center + b, abs(a) * d.radius)
    return _combine([((u - b) / a, m) for u, m in pts], d, "catalog")


# ----------------------------------------------------------------------------------
# argument principle

class _Contaminated(Exception):
    pass


def _logderiv_fn(f: N.Expr):
    df = N.differentiate(f)

    def lf(z):
        with np.errstate(all="ignore"):
            r = df.evaluate(z) / f.evaluate(z)
            bad = ~np.isfinite(r)
            if np.any(bad):
                r[bad] = np.exp(df.log_evaluate(z[bad]) - f.log_evaluate(z[bad]))
        if not np.all(np.isfinite(r)):
            raise _Contaminated
        return r

    return lf


def _circle_winding(lf, center, r, tol=1e-7):
    def integrand(t):
        w = r * np.exp(1j * t)
        return lf(center + w) * w

    bp = 0.31830988618379 + np.linspace(0.0, TWO_PI, 17)
    res = quadrature.integrate(integrand, bp, tol=tol * TWO_PI, max_panels=40000, strict=False)
    return res.value / TWO_PI, res.error / TWO_PI, res.converged


def _perturbed_radii(r):
    yield r
    for j in range(1, PERTURB_STEPS + 1):
        yield r * (1 + j * PERTURB_SIZE)
        yield r * (1 - j * PERTURB_SIZE)


def _count(f: N.Expr, d: Disc):
    lf = _logderiv_fn(f)
    contaminated = False
    for r in _perturbed_radii(d.radius):
        try:
            val, err, conv = _circle_winding(lf, d.center, r)
        except _Contaminated:
            contaminated = True
            continue
        n = round(val.real)
        if conv and abs(val - n) < 0.25:
            return int(n), r
    if contaminated:
        raise BoundaryContamination(f"zeros/poles of {f} on |z - {d.center}| = {d.radius} after perturbation")
    raise QuadratureDivergence(f"winding integral of {f} on radius {d.radius} did not settle to an integer")


def count_zeros_minus_poles(f: N.Expr, d: Disc) -> int:
    """Winding number of f around the boundary of d (argument principle)."""
    return _count(f, d)[0]


_SPLITS = (0.0137, -0.0291, 0.0419, -0.0557, 0.0733)


def _cell_moments(lf, x0, x1, y0, y1, nmom=5):
    zc = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
    h = 0.5 * math.hypot(x1 - x0, y1 - y0)
    corners = np.array([complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1), complex(x0, y0)])
    edges = np.diff(corners)
    powers = np.arange(nmom)

    def integrand(t):
        k = np.minimum(t.astype(int), 3)
        s = t - k
        z = corners[k] + s * edges[k]
        g = lf(z) * edges[k] / (TWO_PI * 1j)
        w = (z - zc) / h
        return g[:, None] * w[:, None] ** powers[None, :]

    res = quadrature.integrate(integrand, [0.0, 1.0, 2.0, 3.0, 4.0], tol=1e-9, max_panels=20000, strict=False)
    return zc, h, np.asarray(res.value), res.converged


def _central(I, m):
    w0 = I[1] / m
    mu2 = I[2] - 2 * w0 * I[1] + w0 ** 2 * I[0]
    mu3 = I[3] - 3 * w0 * I[2] + 3 * w0 ** 2 * I[1] - w0 ** 3 * I[0]
    mu4 = I[4] - 4 * w0 * I[3] + 6 * w0 ** 2 * I[2] - 4 * w0 ** 3 * I[1] + w0 ** 4 * I[0]
    return w0, max(abs(mu2), abs(mu3), abs(mu4))


def _newton(lf, z, m, box, tol):
    x0, x1, y0, y1 = box
    sign = 1 if m > 0 else -1
    for _ in range(40):
        try:
            g = lf(np.array([z]))[0]
        except _Contaminated:
            return z  # landed exactly on the point
        if g == 0:
            return z
        step = sign * abs(m) / g
        z_new = z - step
        if not (x0 - tol <= z_new.real <= x1 + tol and y0 - tol <= z_new.imag <= y1 + tol):
            return z
        z = z_new
        if abs(step) <= tol * (1 + abs(z)):
            return z
    return z


def locate_divisor(f: N.Expr, d: Disc, tol: float = 1e-13) -> Divisor:
    """Zeros and poles of f in d by moment-based quadrisection and Newton steps."""
    total, r_used = _count(f, d)
    disc = Disc(d.center, r_used)
    lf = _logderiv_fn(f)
    min_size = MIN_CELL * d.radius
    eps = 1e-6
    found = []

    def process(box):
        stack = [box]
        while stack:
            x0, x1, y0, y1 = stack.pop()
            for split in _SPLITS:
                xm = 0.5 * (x0 + x1) + split * (x1 - x0)
                ym = 0.5 * (y0 + y1) - 0.7 * split * (y1 - y0)
                kids = [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)]
                try:
                    results = [_classify(k) for k in kids]
                except _Contaminated:
                    continue
                if any(r is None for r in results):
                    continue
                break
            else:
                raise BoundaryContamination(f"cell edges keep hitting zeros/poles near {complex(x0, y0)}")
            for kid, res in zip(kids, results):
                status, payload = res
                if status == "empty":
                    continue
                if status == "point":
                    found.append(payload)
                    continue
                kx0, kx1, ky0, ky1 = kid
                if max(kx1 - kx0, ky1 - ky0) < min_size:
                    raise ClusterUnresolved(
                        f"cell of size {kx1 - kx0:.2e} still holds net count {payload}", cell=kid
                    )
                stack.append(kid)

    def _classify(box):
        zc, h, I, conv = _cell_moments(lf, *box)
        m = round(I[0].real)
        if not conv or abs(I[0] - m) >= 0.25:
            return None
        if m == 0:
            if np.max(np.abs(I[1:])) < eps:
                return ("empty", None)
            return ("split", 0)
        w0, spread = _central(I, m)
        if spread < eps * abs(m):
            z = _newton(lf, zc + h * w0, m, box, tol)
            return ("point", (z, m))
        return ("split", m)

    R = d.radius
    c = d.center
    for grow in (1.0123, 1.0371, 1.0619):
        half = R * grow
        box = (c.real - half, c.real + half, c.imag - half, c.imag + half)
        try:
            top = _classify(box)
        except _Contaminated:
            continue
        if top is None:
            continue
        found.clear()
        if top[0] == "point":
            found.append(top[1])
        elif top[0] == "split":
            process(box)
        break
    else:
        raise BoundaryContamination("could not place a clean bounding square")

    div = _combine(found, disc, "argument-principle")
    if div.degree != total:
        raise QuadratureDivergence(
            f"located divisor has degree {div.degree} but the boundary winding number is {total}"
        )
    return div


# ----------------------------------------------------------------------------------
# structural analysis

def _const_of(e: N.Expr):
    """Value of a z-free subtree, else None."""
    if e.has_z:
        return None
    if isinstance(e, N.Const):
        return e.value
    return complex(e.evaluate(0))


def affine_coeffs(e: N.Expr):
    """(a, b) with e == a z + b, or None."""
    if not e.has_z:
        return 0j, _const_of(e)
    if isinstance(e, N.Const):
        return 0j, e.value
    if isinstance(e, N.Var):
        return 1 + 0j, 0j
    if isinstance(e, (N.Add, N.Sub)):
        p, q = affine_coeffs(e.args[0]), affine_coeffs(e.args[1])
        if p is None or q is None:
            return None
        s = 1 if isinstance(e, N.Add) else -1
        return p[0] + s * q[0], p[1] + s * q[1]
    if isinstance(e, N.Neg):
        p = affine_coeffs(e.args[0])
        return None if p is None else (-p[0], -p[1])
    if isinstance(e, N.Mul):
        p, q = affine_coeffs(e.args[0]), affine_coeffs(e.args[1])
        if p is None or q is None:
            return None
        if p[0] != 0 and q[0] != 0:
            return None
        return p[0] * q[1] + q[0] * p[1], p[1] * q[1]
    if isinstance(e, N.Div):
        p, q = affine_coeffs(e.args[0]), affine_coeffs(e.args[1])
        if p is None or q is None or q[0] != 0 or q[1] == 0:
            return None
        return p[0] / q[1], p[1] / q[1]
    return None


def poly_coeffs(e: N.Expr, max_degree=64):
    """Low-to-high coefficient array if e is a polynomial in z, else None."""
    P = np.polynomial.polynomial
    if not e.has_z:
        return np.array([_const_of(e)])
    if isinstance(e, N.Var):
        return np.array([0j, 1 + 0j])
    if isinstance(e, (N.Add, N.Sub, N.Mul)):
        p, q = poly_coeffs(e.args[0]), poly_coeffs(e.args[1])
        if p is None or q is None:
            return None
        if isinstance(e, N.Add):
            return P.polyadd(p, q)
        if isinstance(e, N.Sub):
            return P.polysub(p, q)
        if len(p) + len(q) - 2 > max_degree:
            return None
        return P.polymul(p, q)
    if isinstance(e, N.Neg):
        p = poly_coeffs(e.args[0])
        return None if p is None else -p
    if isinstance(e, N.Div):
        p, q = poly_coeffs(e.args[0]), poly_coeffs(e.args[1])
        if p is None or q is None or len(np.trim_zeros(q, "b")) != 1:
            return None
        return p / q[0]
    if isinstance(e, N.IntPow) and e.n >= 0:
        p = poly_coeffs(e.args[0])
        if p is None or (len(p) - 1) * e.n > max_degree:
            return None
        return P.polypow(p, e.n)
    return None


def _cluster_roots(roots, rel=1e-6):
    """Group numerically split multiple roots; returns [(root, multiplicity)]."""
    roots = list(np.asarray(roots, dtype=complex))
    out = []
    while roots:
        r0 = roots.pop(0)
        group = [r0] + [r for r in roots if abs(r - r0) <= rel * (1 + abs(r0))]
        roots = [r for r in roots if abs(r - r0) > rel * (1 + abs(r0))]
        out.append((complex(np.mean(group)), len(group)))
    return out


def _poly_roots(c):
    c = np.trim_zeros(np.asarray(c, dtype=complex), "b")
    scale = np.max(np.abs(c)) if c.size else 0.0
    if c.size == 0 or scale == 0:
        raise ValueError("identically zero function has no divisor")
    c = np.where(np.abs(c) < 1e-15 * scale, 0, c)
    c = np.trim_zeros(c, "b")
    if c.size == 1:
        return []
    return _cluster_roots(np.polynomial.polynomial.polyroots(c), rel=1e-5)


def _entire(e: N.Expr) -> bool:
    """Conservative: True only for trees that are certainly entire."""
    ok = (N.Const, N.Var, N.Add, N.Sub, N.Neg, N.Mul, N.Exp, N.Sin, N.Cos, N.RGamma, N.GeomProduct)
    if isinstance(e, N.IntPow):
        return e.n >= 0 and _entire(e.args[0])
    if not e.has_z:
        return bool(np.isfinite(_const_of(e)))
    if isinstance(e, N.Div):
        return not e.args[1].has_z and _const_of(e.args[1]) != 0 and _entire(e.args[0])
    return isinstance(e, ok) and all(_entire(a) for a in e.args)


def exp_poly(e: N.Expr):
    """[(frequency a, coefficient c)] with e == sum c exp(a z), or None."""
    def norm(terms):
        out = []
        for a, c in terms:
            for i, (b, d) in enumerate(out):
                if abs(a - b) <= 1e-13 * (1 + abs(a)):
                    out[i] = (b, d + c)
                    break
            else:
                out.append((a, c))
        return out

    if not e.has_z:
        return [(0j, _const_of(e))]
    if isinstance(e, N.Exp):
        ab = affine_coeffs(e.args[0])
        if ab is None:
            return None
        return [(ab[0], np.exp(ab[1]))]
    if isinstance(e, (N.Add, N.Sub)):
        p, q = exp_poly(e.args[0]), exp_poly(e.args[1])
        if p is None or q is None:
            return None
        s = 1 if isinstance(e, N.Add) else -1
        return norm(p + [(a, s * c) for a, c in q])
    if isinstance(e, N.Neg):
        p = exp_poly(e.args[0])
        return None if p is None else [(a, -c) for a, c in p]
    if isinstance(e, N.Mul):
        p, q = exp_poly(e.args[0]), exp_poly(e.args[1])
        if p is None or q is None or len(p) * len(q) > 256:
            return None
        return norm([(a + b, c * d) for a, c in p for b, d in q])
    if isinstance(e, N.Div):
        q = exp_poly(e.args[1])
        p = exp_poly(e.args[0])
        if p is None or q is None or len(q) != 1:
            return None
        b, d = q[0]
        return [(a - b, c / d) for a, c in p]
    if isinstance(e, N.IntPow) and e.n >= 0:
        p = exp_poly(e.args[0])
        if p is None:
            return None
        out = [(0j, 1 + 0j)]
        for _ in range(e.n):
            out = norm([(a + b, c * d) for a, c in out for b, d in p])
            if len(out) > 256:
                return None
        return out
    return None


def _exp_poly_points(terms, disc: Disc):
    scale = max(abs(c) for _, c in terms) if terms else 0.0
    terms = [(a, c) for a, c in terms if abs(c) > 1e-14 * scale]
    if not terms:
        raise ValueError("identically zero function has no divisor")
    if len(terms) == 1:
        return []
    freqs = np.array([a for a, _ in terms])
    diffs = freqs - freqs[0]
    nz = diffs[np.abs(diffs) > 0]
    base = nz[np.argmin(np.abs(nz))]
    ratios = diffs / base
    if np.max(np.abs(ratios - np.round(ratios.real))) > 1e-9:
        return None
    n = np.round(ratios.real).astype(int)
    shift = n.min()
    n = n - shift
    # sum c_i w^{n_i} with w = exp(base z), times a zero-free exponential
    coeffs = np.zeros(n.max() + 1, dtype=complex)
    for k, (_, c) in zip(n, terms):
        coeffs[k] += c
    pts = []
    for w, mult in _poly_roots(coeffs):
        if w == 0:
            continue
        # base z = log w + 2 pi i k
        u_center = base * disc.center
        for u in _line_points(np.log(w), TWO_PI * 1j, u_center, abs(base) * disc.radius):
            pts.append((u / base, mult))
    return pts


def _lin_in(e: N.Expr):
    """(c1, c0, T) with e == c1 T + c0 for a single recognised node T."""
    if not e.has_z:
        return 0j, _const_of(e), None
    if _is_pattern(e):
        return 1 + 0j, 0j, e
    if isinstance(e, (N.Add, N.Sub)):
        p, q = _lin_in(e.args[0]), _lin_in(e.args[1])
        if p is None or q is None:
            return None
        if p[2] is not None and q[2] is not None and p[2] != q[2]:
            return None
        s = 1 if isinstance(e, N.Add) else -1
        return p[0] + s * q[0], p[1] + s * q[1], p[2] if p[2] is not None else q[2]
    if isinstance(e, N.Neg):
        p = _lin_in(e.args[0])
        return None if p is None else (-p[0], -p[1], p[2])
    if isinstance(e, N.Mul):
        p, q = _lin_in(e.args[0]), _lin_in(e.args[1])
        if p is None or q is None:
            return None
        if p[2] is None:
            return p[1] * q[0], p[1] * q[1], q[2]
        if q[2] is None:
            return q[1] * p[0], q[1] * p[1], p[2]
        return None
    if isinstance(e, N.Div) and not e.args[1].has_z and _const_of(e.args[1]) != 0:
        p = _lin_in(e.args[0])
        v = _const_of(e.args[1])
        return None if p is None else (p[0] / v, p[1] / v, p[2])
    return None


def _is_pattern(e):
    if isinstance(e, (N.Sin, N.Cos)):
        return affine_coeffs(e.args[0]) is not None
    if isinstance(e, N.Exp) and isinstance(e.args[0], N.Exp):
        return affine_coeffs(e.args[0].args[0]) is not None
    return False


def _pattern_points(c1, c0, T, disc: Disc):
    if c1 == 0:
        if c0 == 0:
            raise ValueError("identically zero function has no divisor")
        return []
    w = -c0 / c1
    if isinstance(T, N.Exp):
        a, b = affine_coeffs(T.args[0].args[0])
        if a == 0:
            return None
        if w == 0:
            return []
        U = a * disc.center + b
        rho = abs(a) * disc.radius
        lw = np.log(complex(w))
        vmax = math.exp(U.real + rho)
        kmax = int(vmax / TWO_PI + abs(lw) / TWO_PI) + 2
        pts = []
        for k in range(-kmax, kmax + 1):
            v = lw + TWO_PI * 1j * k
            if v == 0:
                continue
            for u in _line_points(np.log(v), TWO_PI * 1j, U, rho):
                pts.append(((u - b) / a, 1))
        return pts
    a, b = affine_coeffs(T.args[0])
    if a == 0:
        return None
    U = a * disc.center + b
    rho = abs(a) * disc.radius
    w = complex(w)
    double = abs(w - 1) < 1e-14 or abs(w + 1) < 1e-14
    if isinstance(T, N.Sin):
        base = [complex(np.arcsin(w))] if double else [complex(np.arcsin(w)), math.pi - complex(np.arcsin(w))]
    else:
        base = [complex(np.arccos(w))] if double else [complex(np.arccos(w)), -complex(np.arccos(w))]
    mult = 2 if double else 1
    pts = []
    for u0 in base:
        for u in _line_points(u0, TWO_PI + 0j, U, rho):
            pts.append(((u - b) / a, mult))
    return pts


_CATALOG_NODES = {N.Sin: "sin", N.Cos: "cos", N.Gamma: "gamma", N.RGamma: "rgamma"}


def _rec(f: N.Expr, disc: Disc, tol: float):
    """Returns (points, numeric_used)."""
    if not f.has_z:
        if _const_of(f) == 0:
            raise ValueError("identically zero function has no divisor")
        return [], False
    pc = poly_coeffs(f)
    if pc is not None:
        return [(z, m) for z, m in _poly_roots(pc)], False
    if isinstance(f, N.Mul):
        p, a = _rec(f.args[0], disc, tol)
        q, b = _rec(f.args[1], disc, tol)
        return p + q, a or b
    if isinstance(f, N.Div):
        p, a = _rec(f.args[0], disc, tol)
        q, b = _rec(f.args[1], disc, tol)
        return p + [(z, -m) for z, m in q], a or b
    if isinstance(f, N.Neg):
        return _rec(f.args[0], disc, tol)
    if isinstance(f, N.IntPow):
        p, a = _rec(f.args[0], disc, tol)
        return [(z, m * f.n) for z, m in p], a
    ab = affine_coeffs(f.args[0]) if f.args else None
    if ab is not None and ab[0] != 0:
        name, params = None, {}
        if type(f) in _CATALOG_NODES:
            name = _CATALOG_NODES[type(f)]
        elif isinstance(f, N.GeomProduct):
            name, params = "prodq", {"q": f.rho}
        elif isinstance(f, N.Jacobi):
            name, params = f.which, {"k": f.k}
        if name is not None:
            return [(e.location, e.signed) for e in catalog_divisor(name, params, disc, ab)], False
    if isinstance(f, N.Exp) and _entire(f.args[0]):
        return [], False
    ep = exp_poly(f)
    if ep is not None:
        pts = _exp_poly_points(ep, disc)
        if pts is not None:
            return pts, False
    lin = _lin_in(f)
    if lin is not None and lin[2] is not None:
        pts = _pattern_points(*lin, disc)
        if pts is not None:
            return pts, False
    div = locate_divisor(f, disc, tol)
    return [(e.location, e.signed) for e in div], True


def divisor(f: N.Expr, d: Disc, tol: float = 1e-13) -> Divisor:
    """Divisor of f in d, exact where the structure allows, numeric otherwise."""
    pts, numeric = _rec(f, d, tol)
    return _combine(pts, d, "argument-principle" if numeric else "catalog")
