"""Adaptive Gauss-Kronrod (G7/K15) quadrature, vectorised over panels.

All panels that still need work are evaluated in a single call of the
integrand, so integrands built on numpy expression trees stay fast.  Nodes
are interior to each panel: integrable endpoint singularities (log|f| at a
zero, for instance) are never evaluated directly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import QuadratureDivergence

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# 15 nodes on [-1, 1] and matching Kronrod / Gauss weights
NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
W_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
W_GAUSS = np.zeros(15)
_gauss_pos = [1, 3, 5, 7]
for _k, _w in zip(_gauss_pos, _WG):
    W_GAUSS[_k] = _w
    W_GAUSS[14 - _k] = _w


@dataclass
class QuadResult:
    value: complex | float
    error: float
    panels: int
    converged: bool


def gk15(func, a, b):
    """One K15/G7 pass on arrays of panels [a, b]; returns (kronrod, |k - g|)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    t = mid[:, None] + half[:, None] * NODES[None, :]
    y = np.asarray(func(t.ravel()))
    y = y.reshape(t.shape + y.shape[1:])
    # vector-valued integrands: trailing axes are components
    scale = half.reshape((-1,) + (1,) * (y.ndim - 2))
    k = scale * np.tensordot(y, W_KRONROD, axes=([1], [0]))
    g = scale * np.tensordot(y, W_GAUSS, axes=([1], [0]))
    return k, np.abs(k - g)


def integrate(func, breakpoints, tol=1e-9, rtol=0.0, max_panels=20000, strict=True) -> QuadResult:
    """Integrate ``func`` over [breakpoints[0], breakpoints[-1]].

    ``func`` maps a 1-d float array to values of the same length.  Interior
    breakpoints split the range (place them at known singularities).  The
    target is ``err <= max(tol, rtol * |integral|)``.
    """
    bp = np.unique(np.asarray(breakpoints, dtype=float))
    if bp.size < 2:
        return QuadResult(0.0, 0.0, 0, True)
    length = bp[-1] - bp[0]
    done_val = 0.0
    done_err = 0.0
    lo, hi = bp[:-1], bp[1:]
    n_total = lo.size
    while True:
        k, e = gk15(func, lo, hi)
        if k.ndim > 1:
            e = e.reshape(e.shape[0], -1).max(axis=1)
        bad = ~np.isfinite(k)
        if bad.ndim > 1:
            bad = bad.reshape(bad.shape[0], -1).any(axis=1)
        if np.any(bad):
            # a node landed on a singularity: treat the panel as maximally uncertain
            k = np.where(bad.reshape((-1,) + (1,) * (k.ndim - 1)), 0.0, k)
            e = np.where(bad, np.inf, e)
        total = done_val + np.sum(k, axis=0)
        target = max(tol, rtol * float(np.max(np.abs(total))))
        # global acceptance: panels next to an integrable singularity shrink
        # their error only linearly in the width, so never meet a width share
        if done_err + float(np.sum(e)) <= target:
            return QuadResult(total, done_err + float(np.sum(e)), n_total, True)
        # local acceptance: each panel gets a share proportional to its width
        share = target * (hi - lo) / length
        ok = e <= 0.5 * share
        done_val = done_val + np.sum(k[ok], axis=0)
        done_err = done_err + float(np.sum(e[ok]))
        if np.all(ok):
            return QuadResult(done_val, done_err, n_total, True)
        lo, hi = lo[~ok], hi[~ok]
        widths = hi - lo
        if n_total + lo.size > max_panels or np.any(widths < 1e-13 * length):
            rest_err = float(np.sum(e[~ok]))
            value = done_val + np.sum(k[~ok], axis=0)
            if strict:
                raise QuadratureDivergence(
                    f"adaptive quadrature stalled with error {done_err + rest_err:.3g} > {target:.3g}"
                )
            return QuadResult(value, done_err + rest_err, n_total, False)
        mid = 0.5 * (lo + hi)
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        n_total += lo.size // 2


def circle_mean(func_theta, singular_angles=(), tol=1e-9, offset=0.6180339887498949, **kw) -> QuadResult:
    """(1/2pi) * integral over a full turn of func_theta(theta).

    The turn is [offset, offset + 2pi]; singular angles are mapped into it
    and used as breakpoints.
    """
    two_pi = 2.0 * np.pi
    angles = np.asarray(list(singular_angles), dtype=float)
    angles = offset + np.mod(angles - offset, two_pi)
    # a handful of uniform breakpoints keeps the first pass well resolved
    base = offset + np.linspace(0.0, two_pi, 9)
    bp = np.concatenate([base, angles])
    res = integrate(func_theta, bp, tol=tol * two_pi, **kw)
    return QuadResult(res.value / two_pi, res.error / two_pi, res.panels, res.converged)
