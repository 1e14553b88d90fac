"""Hyperplane families, holomorphic curves and the structural checks on them."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    BadScale,
    CoverageInsufficient,
    DimensionMismatch,
    NotPrime,
    SampleDegeneracy,
    UnsolvableConstants,
)
from .expr import nodes as N

SINGULAR_TOL = 1e-10
MATCH_TOL = 1e-7
GOLDEN = 0.6180339887498949


@dataclass(frozen=True)
class Hyperplane:
    coeffs: tuple

    def __post_init__(self):
        v = tuple(complex(x) for x in self.coeffs)
        if not v or all(x == 0 for x in v):
            raise ValueError("hyperplane coefficient vector must be nonzero")
        object.__setattr__(self, "coeffs", v)

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    def vector(self):
        return np.array(self.coeffs, dtype=complex)

    def scaled(self, lam) -> "Hyperplane":
        return Hyperplane(tuple(complex(lam) * x for x in self.coeffs))

    def to_json(self):
        return [[x.real, x.imag] for x in self.coeffs]


@dataclass
class Curve:
    coords: list
    label: str = ""
    reduced: bool = True  # claimed absence of common zeros

    def __post_init__(self):
        self.coords = [N.as_expr(c) for c in self.coords]

    @property
    def n(self) -> int:
        return len(self.coords) - 1

    def __len__(self):
        return len(self.coords)

    def evaluate(self, z):
        return np.stack([c.evaluate(z) for c in self.coords])

    def shifted(self, c) -> "Curve":
        return Curve([N.shift(g, c) for g in self.coords], self.label + f" shifted by {c}")


def as_hyperplanes(rows):
    return [r if isinstance(r, Hyperplane) else Hyperplane(tuple(r)) for r in rows]


# ----------------------------------------------------------------------------------
# general position

@dataclass
class GeneralPositionResult:
    ok: bool
    witness: tuple | None
    min_scaled_det: float
    checked: int
    singular: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def scaled_minors(vectors, subsets):
    """|det| of each subset of rows divided by the product of row norms."""
    A = np.asarray(vectors, dtype=complex)
    idx = np.asarray(subsets, dtype=int)
    sub = A[idx]
    dets = np.abs(np.linalg.det(sub))
    norms = np.prod(np.linalg.norm(sub, axis=2), axis=1)
    return dets / norms


def general_position(hs, tol: float = SINGULAR_TOL, chunk: int = 20000) -> GeneralPositionResult:
    """Every (n+1)-subset of the coefficient vectors must be independent."""
    hs = as_hyperplanes(hs)
    if not hs:
        return GeneralPositionResult(True, None, math.inf, 0)
    dim = hs[0].dim
    if any(h.dim != dim for h in hs):
        raise DimensionMismatch("hyperplanes have different numbers of coefficients")
    if len(hs) < dim:
        raise DimensionMismatch(f"need at least {dim} hyperplanes in P^{dim - 1}, got {len(hs)}")
    A = np.array([h.vector() for h in hs])
    combos = itertools.combinations(range(len(hs)), dim)
    min_det = math.inf
    singular = []
    checked = 0
    while True:
        block = list(itertools.islice(combos, chunk))
        if not block:
            break
        vals = scaled_minors(A, block)
        checked += len(block)
        min_det = min(min_det, float(vals.min()))
        for i in np.flatnonzero(vals < tol):
            singular.append(tuple(block[i]))
    witness = singular[0] if singular else None
    return GeneralPositionResult(not singular, witness, min_det, checked, singular)


def is_prime(m: int) -> bool:
    if m < 2:
        return False
    for d in range(2, int(math.isqrt(m)) + 1):
        if m % d == 0:
            return False
    return True


def vandermonde_matrix(m: int):
    eps = np.exp(2j * np.pi / m)
    k = np.arange(m)
    return eps ** np.outer(k, k)


def vandermonde_family(m: int, allow_composite: bool = False):
    """The 2m vectors e_0..e_{m-1} followed by the rows of (eps^{lk})."""
    m = int(m)
    if not is_prime(m) and not allow_composite:
        raise NotPrime(f"{m} is not prime (pass allow_composite=True to build it anyway)")
    V = vandermonde_matrix(m)
    rows = list(np.eye(m, dtype=complex)) + list(V)
    return [Hyperplane(tuple(r)) for r in rows]


def vandermonde_minor(m: int, rows, cols) -> complex:
    """det(eps^{a_i b_j}) for the given exponent sets."""
    eps = np.exp(2j * np.pi / m)
    a = np.asarray(rows)
    b = np.asarray(cols)
    return complex(np.linalg.det(eps ** np.outer(a, b)))


# ----------------------------------------------------------------------------------
# applying hyperplanes

def apply(h, f: Curve) -> N.Expr:
    """The entire function sum_k h_k f_k."""
    h = h if isinstance(h, Hyperplane) else Hyperplane(tuple(h))
    if h.dim != len(f.coords):
        raise DimensionMismatch(f"hyperplane has {h.dim} coefficients, curve has {len(f.coords)} coordinates")
    out = None
    for a, g in zip(h.coeffs, f.coords):
        if a == 0:
            continue
        term = g if a == 1 else N.mul(N.Const(a), g)
        out = term if out is None else N.add(out, term)
    return out


# ----------------------------------------------------------------------------------
# forward invariance

@dataclass
class InvarianceResult:
    ok: bool
    violations: list
    checked: int

    def __bool__(self):
        return self.ok


def _invariance(div, image, inner_radius, need_radius, kind):
    d = div.disc
    if d.radius < need_radius * (1 - 1e-9):
        raise CoverageInsufficient(
            f"divisor radius {d.radius} < {need_radius} needed for inner radius {inner_radius}"
        )
    locs = div.locations(kind)
    mults = div.multiplicities(kind)
    if locs.size == 0:
        return InvarianceResult(True, [], 0)
    tree = cKDTree(np.column_stack([locs.real, locs.imag]))
    inner = np.abs(locs - d.center) <= inner_radius
    violations = []
    for z0, m in zip(locs[inner], mults[inner]):
        w = image(z0)
        hits = tree.query_ball_point([w.real, w.imag], MATCH_TOL * (1 + abs(z0)))
        got = int(sum(mults[i] for i in hits))
        if got < m:
            violations.append({"point": complex(z0), "mult": int(m), "image": complex(w), "image_mult": got})
    return InvarianceResult(not violations, violations, int(inner.sum()))


def forward_invariant(div, c, inner_radius: float, kind: str = "zero") -> InvarianceResult:
    """Every point within inner_radius reappears at z + c with at least its multiplicity."""
    c = complex(c)
    return _invariance(div, lambda z: z + c, inner_radius, inner_radius + abs(c), kind)


def forward_invariant_q(div, q, inner_radius: float, kind: str = "zero") -> InvarianceResult:
    """As forward_invariant for the rescaling z -> q z (disc centred at 0)."""
    q = complex(q)
    if q == 0:
        raise BadScale("rescaling factor must be nonzero")
    need = abs(div.disc.center) + inner_radius * max(1.0, abs(q))
    return _invariance(div, lambda z: q * z, inner_radius, need, kind)


# ----------------------------------------------------------------------------------
# Borel partition

@dataclass
class Partition:
    classes: list
    evidence: list  # max relative periodicity residual per pair
    passed: list  # boolean pair matrix
    transitivity_violations: list = field(default_factory=list)
    class_sums: list = field(default_factory=list)
    label: str = "consistent with periodicity (finite sample, not a proof)"

    def to_json(self):
        return {
            "classes": [sorted(s) for s in self.classes],
            "evidence": self.evidence,
            "passed": self.passed,
            "transitivity_violations": self.transitivity_violations,
            "class_sums": self.class_sums,
            "label": self.label,
        }


def periodicity_samples(n=32, radii=(1.0, 3.0), offset=0.0):
    k = np.arange(n)
    theta = 2 * np.pi * np.mod(offset + 0.1 + k * GOLDEN, 1.0)
    return np.asarray(radii)[k % len(radii)] * np.exp(1j * theta)


def _log_coords(coords, z):
    return np.stack([c.log_evaluate(z) for c in coords])


def borel_partition(g: Curve, c, tol: float = 1e-6, n_samples: int = 32,
                    assert_sum_zero: bool = False) -> Partition:
    """Group coordinates whose pairwise ratios look c-periodic at the samples."""
    coords = list(getattr(g, "coords", g))
    c = complex(c)
    n = len(coords)
    for attempt in range(6):
        z = periodicity_samples(n_samples, offset=0.137 * attempt)
        L0 = _log_coords(coords, z)
        L1 = _log_coords(coords, z + c)
        if np.all(np.isfinite(L0.real)) and np.all(np.isfinite(L1.real)):
            break
    else:
        raise SampleDegeneracy("a coordinate vanishes at the sample points after 5 resamplings")
    ev = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            # ratio change: (g_i/g_j)(z + c) / (g_i/g_j)(z) - 1, computed in logs
            d = (L1[i] - L1[j]) - (L0[i] - L0[j])
            ev[i, j] = float(np.max(np.abs(np.expm1(d))))
    passed = ev < tol
    np.fill_diagonal(passed, True)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            if passed[i, j] and passed[j, i]:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    classes = sorted((sorted(v) for v in groups.values()), key=lambda s: s[0])
    trans = []
    for cl in classes:
        for i, j in itertools.combinations(cl, 2):
            if not passed[i, j]:
                trans.append((i, j))
    sums = []
    if assert_sum_zero:
        V = np.stack([cc.evaluate(z) for cc in coords])
        for cl in classes:
            s = np.abs(V[cl].sum(axis=0))
            scale = np.abs(V[cl]).sum(axis=0)
            sums.append(float(np.max(s / np.maximum(scale, 1e-300))))
    return Partition(classes, ev.tolist(), passed.tolist(), trans, sums)


def is_periodic_curve(g: Curve, c, tol: float = 1e-3, n_samples: int = 32):
    """Largest relative change of the coordinate ratios g_k/g_0 under z -> z + c."""
    part = borel_partition(g, c, tol=tol, n_samples=n_samples)
    worst = max(part.evidence[k][0] for k in range(1, len(g.coords))) if len(g.coords) > 1 else 0.0
    return worst <= tol, worst


# ----------------------------------------------------------------------------------
# sharpness constructions

@dataclass
class SharpnessConstruction:
    curve: Curve
    hyperplanes: list
    constants: list  # c_1..c_p
    phis: list  # phi_1..phi_s
    blocks: np.ndarray  # coordinate matrix: f = blocks @ phi
    d: list  # d_j with (h_j, f) = d_j phi_{k_j}
    k: list  # k_j (1-based)
    image_dimension: int


def _block_constants(p: int, m: int = 11):
    """Nonzero c_1..c_p with sum_i eps^{l(i-1)} c_i = 0 for l = 0..p-2 (c_p = 1)."""
    if p == 1:
        return np.array([1.0 + 0j])
    eps = np.exp(2j * np.pi / m)
    A = eps ** np.outer(np.arange(p - 1), np.arange(p))
    try:
        sol = np.linalg.solve(A[:, :-1], -A[:, -1])
    except np.linalg.LinAlgError as exc:
        raise UnsolvableConstants(f"no constants for p={p}") from exc
    c = np.append(sol, 1.0)
    if np.any(np.abs(c) < 1e-12):
        raise UnsolvableConstants(f"constants for p={p} contain zeros: {c}")
    return c


def sharpness_phis(s: int, c) -> list:
    """phi_k = 1/Gamma(-z/c + omega^k), omega a primitive s-th root of unity.

    Zeros sit at c (omega^k + j), j >= 0: forward invariant under z -> z + c.
    """
    omega = np.exp(2j * np.pi / s)
    c = complex(c)
    return [N.rgamma(N.add(N.mul(N.Const(-1 / c), N.Z), N.Const(omega ** k))) for k in range(1, s + 1)]


def _block_matrix(n_coords, p, s, consts):
    B = np.zeros((n_coords, s), dtype=complex)
    for idx in range(n_coords):
        B[idx, idx // p] = consts[idx % p]
    return B


def _curve_from_blocks(B, phis, label):
    coords = []
    for row in B:
        k = int(np.flatnonzero(row)[0])
        coords.append(N.mul(N.Const(row[k]), phis[k]))
    return Curve(coords, label)


def _decompose_forms(H, B, tol=1e-10):
    d, kk = [], []
    for j, h in enumerate(H):
        w = h @ B
        nz = np.flatnonzero(np.abs(w) > tol * max(1.0, np.max(np.abs(w))))
        if len(nz) != 1:
            raise UnsolvableConstants(f"form {j + 1} is not a single multiple of one phi: {w}")
        d.append(complex(w[nz[0]]))
        kk.append(int(nz[0]) + 1)
    return d, kk


def green_sharpness_curve(n: int = 10, p: int = 3, c=1.0) -> SharpnessConstruction:
    """Curve in P^n with n+p hyperplanes from the m = n+1 family (n+1 prime)."""
    m = n + 1
    if not is_prime(m):
        raise NotPrime(f"n+1 = {m} must be prime")
    if not 1 <= p <= n:
        raise UnsolvableConstants(f"p must lie in 1..{n}")
    s = n // p + 1
    consts = _block_constants(p, m)
    B = _block_matrix(m, p, s, consts)
    phis = sharpness_phis(s, c)
    curve = _curve_from_blocks(B, phis, f"sharpness n={n} p={p}")
    hs = vandermonde_family(m)[: n + p]
    H = np.array([h.vector() for h in hs])
    d, kk = _decompose_forms(H, B)
    dim = int(np.linalg.matrix_rank(B)) - 1
    return SharpnessConstruction(curve, hs, list(consts), phis, B, d, kk, dim)


def projected_sharpness_curve(p: int, c=1.0) -> SharpnessConstruction:
    """The P^9 projection of the n=10 construction (p not dividing 10)."""
    n, m = 10, 11
    if n % p == 0:
        raise UnsolvableConstants(f"projection needs p not dividing 10, got {p}")
    s = n // p + 1
    consts = _block_constants(p, m)
    B = _block_matrix(n, p, s, consts)
    phis = sharpness_phis(s, c)
    curve = _curve_from_blocks(B, phis, f"projected sharpness p={p}")
    full = vandermonde_family(m)[: n + p]
    hs = [Hyperplane(h.coeffs[:n]) for j, h in enumerate(full) if j != n]
    H = np.array([h.vector() for h in hs])
    d, kk = _decompose_forms(H, B)
    dim = int(np.linalg.matrix_rank(B)) - 1
    return SharpnessConstruction(curve, hs, list(consts), phis, B, d, kk, dim)


def q_sharpness_functions(q, j: int) -> N.Expr:
    """1/gamma_q(q^{(j-1)/2} z), with gamma_q(u) = (q;q)_inf / (u;q)_inf."""
    q = complex(q)
    if not 0 < abs(q) < 1:
        raise BadScale(f"need 0 < |q| < 1, got {q}")
    scale = q ** ((j - 1) / 2)
    return N.qgamma_recip(q, N.mul(N.Const(scale), N.Z))
