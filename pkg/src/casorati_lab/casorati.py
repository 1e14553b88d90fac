"""Casorati, q-Casorati and Wronskian determinants; dependence over periodic fields."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import BadScale, TooLarge
from .expr import nodes as N

# cofactor expansion into expression trees up to this size, Det nodes beyond
EXPAND_MAX = 4
SIZE_MAX = 8
GOLDEN = 0.6180339887498949


def _det_tree(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return N.sub(N.mul(rows[0][0], rows[1][1]), N.mul(rows[0][1], rows[1][0]))
    total = None
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in rows[1:]]
        term = N.mul(rows[0][j], _det_tree(minor))
        if total is None:
            total = term
        elif j % 2:
            total = N.sub(total, term)
        else:
            total = N.add(total, term)
    return total


def determinant(rows) -> N.Expr:
    """Determinant of a square matrix of Exprs (tree or numeric Det node)."""
    n = len(rows)
    if n > SIZE_MAX:
        raise TooLarge(f"determinant of size {n} exceeds {SIZE_MAX}")
    if n <= EXPAND_MAX:
        return _det_tree([[N.as_expr(x) for x in row] for row in rows])
    return N.det_node(rows)


def casorati_matrix(gs, c):
    return [[N.shift(g, j * complex(c)) if j else g for g in gs] for j in range(len(gs))]


def casorati(gs, c) -> N.Expr:
    """C(g_0..g_n): rows are the shifts g(z + j c), j = 0..n."""
    gs = [N.as_expr(g) for g in gs]
    if not 1 <= len(gs) <= SIZE_MAX:
        raise TooLarge(f"Casorati determinant needs 1..{SIZE_MAX} functions, got {len(gs)}")
    return determinant(casorati_matrix(gs, c))


def q_casorati(gs, q) -> N.Expr:
    """q-Casorati determinant: rows are g(q^j z), j = 0..n."""
    q = complex(q)
    if q == 0 or q == 1:
        raise BadScale(f"q-Casorati needs q not in {{0, 1}}, got {q}")
    gs = [N.as_expr(g) for g in gs]
    if not 1 <= len(gs) <= SIZE_MAX:
        raise TooLarge(f"q-Casorati determinant needs 1..{SIZE_MAX} functions, got {len(gs)}")
    rows = [[N.rescale(g, q ** j) if j else g for g in gs] for j in range(len(gs))]
    return determinant(rows)


def wronskian(gs) -> N.Expr:
    """W(g_0..g_n): rows are derivatives of order 0..n."""
    gs = [N.as_expr(g) for g in gs]
    if not 1 <= len(gs) <= SIZE_MAX:
        raise TooLarge(f"Wronskian needs 1..{SIZE_MAX} functions, got {len(gs)}")
    rows = [gs]
    for _ in range(len(gs) - 1):
        rows.append([N.differentiate(g) for g in rows[-1]])
    return determinant(rows)


@dataclass
class DependenceCertificate:
    verdict: str  # dependent | independent | inconclusive
    witness: list
    threshold: float
    sample_points: list
    relative_dets: list = field(default_factory=list)
    notes: str = ""

    def to_json(self):
        def enc(v):
            if isinstance(v, complex):
                return [v.real, v.imag]
            if isinstance(v, (list, tuple)):
                return [enc(x) for x in v]
            return v

        d = asdict(self)
        return {k: enc(v) for k, v in d.items()}

    def dumps(self):
        return json.dumps(self.to_json())


def sample_points(n_samples=24, radii=(1.0, 3.0), start=0):
    """Quasi-random points: golden-ratio angles alternating between circles."""
    k = np.arange(start, start + n_samples)
    theta = 2 * np.pi * np.mod(0.25 + k * GOLDEN, 1.0)
    r = np.asarray(radii)[k % len(radii)]
    return r * np.exp(1j * theta)


def _matrix_at(gs, c, z):
    n = len(gs)
    return np.array([[complex(g.evaluate(z + j * c)) for g in gs] for j in range(n)])


def _normalised_null(M):
    _, s, vh = np.linalg.svd(M)
    v = vh[-1].conj()
    return v, s


def dependence_over_periodic(gs, c, n_samples: int = 24, tol: float = 1e-10,
                             threshold: float = 1e-6) -> DependenceCertificate:
    """Decide (numerically) whether C(g_0..g_n) vanishes identically.

    The per-sample statistic is |det M(z)| divided by the product of the
    column norms of the Casorati matrix M(z) (Hadamard bound), which is
    scale free and unchanged when a column is multiplied by a c-periodic
    function.  All below ``tol``: dependent (coefficient vectors are then
    recovered from null spaces and checked for c-periodicity).  Some sample
    above ``threshold``: independent.  Otherwise inconclusive.
    """
    gs = [N.as_expr(g) for g in gs]
    c = complex(c)
    pts, rel, mats = [], [], []
    k = 0
    while len(pts) < n_samples and k < 20 * n_samples:
        z = complex(sample_points(1, start=k)[0])
        k += 1
        M = _matrix_at(gs, c, z)
        if not np.all(np.isfinite(M)) or np.any(np.abs(M[0]) < 1e-300):
            continue
        bound = float(np.prod(np.linalg.norm(M, axis=0)))
        d = abs(np.linalg.det(M))
        pts.append(z)
        mats.append(M)
        rel.append(d / bound if bound > 0 else 0.0)
    rel_arr = np.array(rel)
    if rel_arr.size == 0:
        return DependenceCertificate("inconclusive", [], threshold, [], [], "no admissible sample points")
    if np.any(rel_arr > threshold):
        wit = [p for p, v in zip(pts, rel) if v > threshold]
        return DependenceCertificate("independent", wit, threshold, pts, rel,
                                     "growth hypothesis (hyper-order < 1) not checked")
    if np.all(rel_arr < tol):
        coeffs, per_err = [], 0.0
        for z, M in zip(pts, mats):
            v, s = _normalised_null(M)
            i = int(np.argmax(np.abs(v)))
            v = v / v[i]
            v2, _ = _normalised_null(_matrix_at(gs, c, z + c))
            v2 = v2 / v2[i] if abs(v2[i]) > 0 else v2
            per_err = max(per_err, float(np.max(np.abs(v - v2)) / (1 + np.max(np.abs(v)))))
            coeffs.append([complex(x) for x in v])
        notes = f"coefficient vectors c-periodic to {per_err:.2e} at the samples"
        if len(gs) > 1 and per_err > 1e-6:
            notes += " (null space not one-dimensional or coefficients not periodic)"
        return DependenceCertificate("dependent", coeffs, tol, pts, rel, notes)
    return DependenceCertificate("inconclusive", [], threshold, pts, rel,
                                 f"max relative determinant {rel_arr.max():.3g} between tol and threshold")


def casorati_identity_residual(gs, c, z) -> float:
    """|C(z)| relative to the Hadamard bound at a single point (diagnostic)."""
    M = _matrix_at([N.as_expr(g) for g in gs], complex(c), complex(z))
    return float(abs(np.linalg.det(M)) / max(np.prod(np.linalg.norm(M, axis=0)), 1e-300))


__all__ = [
    "casorati", "q_casorati", "wronskian", "determinant", "casorati_matrix",
    "dependence_over_periodic", "DependenceCertificate", "sample_points",
]
