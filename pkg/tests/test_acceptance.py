"""Acceptance criteria: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python3 tests/test_acceptance.py`` for the summary lines only.
"""
import math
import time

import numpy as np
import pytest

from casorati_lab import casorati as C
from casorati_lab import catalog
from casorati_lab import hyperplanes as H
from casorati_lab import nevanlinna as NV
from casorati_lab import verify as V
from casorati_lab.expr import nodes as N
from casorati_lab.expr import parse


def _line(n, ok, detail):
    return f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"


# ---------------------------------------------------------------- criteria

def criterion_1():
    f = parse("gamma(z + 1)/gamma(z)")
    worst_err, worst_t = 0.0, 0.0
    for r in (5.0, 10.0, 50.0):
        t = time.perf_counter()
        m, _ = NV.proximity(f, r)
        worst_t = max(worst_t, time.perf_counter() - t)
        worst_err = max(worst_err, abs(m - math.log(r)))
    ok = worst_err < 1e-6 and worst_t < 1.0
    return ok, f"Gamma ratio m(r) = log r: max |error| {worst_err:.2e}, slowest radius {worst_t:.3f} s"


def criterion_2():
    K = V.BoundParams(2, 0.5, 1).K
    t = time.perf_counter()
    rep = V.logdiff_bound_suite(100, seed=0)
    dt = time.perf_counter() - t
    ok = rep.verdict == "pass" and not rep.violations and K == 152 and dt < 60
    return ok, f"log-difference bound suite: {len(rep.violations)} violations / 100, K(2,1/2,1) = {K:g}, {dt:.1f} s"


def criterion_3():
    t = time.perf_counter()
    rep = V.ineq_lemma_suite(200, seed=0)
    dt = time.perf_counter() - t
    ok = rep.verdict == "pass" and not rep.violations and dt < 30
    return ok, f"log+ inequality suite: {len(rep.violations)} violations / 200, {dt:.2f} s"


def criterion_4():
    t = time.perf_counter()
    details, ok = [], True
    for m, count in ((3, 20), (5, 252), (7, 3432)):
        res = H.general_position(H.vandermonde_family(m))
        ok &= res.ok and res.checked == count and res.min_scaled_det > 1e-10
        details.append(f"m={m}: {res.checked} minors, min {res.min_scaled_det:.3g}")
    minor = abs(H.vandermonde_minor(4, [1, 3], [1, 3]))
    dt = time.perf_counter() - t
    ok &= minor < 1e-12 and dt < 5
    return ok, "Vandermonde " + "; ".join(details) + f"; m=4 minor {minor:.1e}; {dt:.2f} s"


def criterion_5():
    t = time.perf_counter()
    rep = catalog.run_example("example-1.2")
    dt = time.perf_counter() - t
    parts = {p.scenario: p for p in rep.parts}
    inv = [parts[f"h{j}"].checks["forward_invariant"] for j in range(1, 8)]
    classes = parts["borel-partition"].checks["classes"]
    worst = parts["curve-not-periodic"].checks["worst_ratio_change"]
    ok = all(inv) and classes == [[0, 1], [2, 3]] and worst > 1e-3 and dt < 120
    return ok, (f"example-1.2: {sum(inv)}/7 preimages forward invariant, classes {classes}, "
                f"max ratio change {worst:.3g}, {dt:.1f} s")


def criterion_6():
    f = parse("exp(2^z)")
    ratio = N.div(N.shift(f, 1), f)
    vals = []
    for r in (3.0, 5.0, 8.0):
        m, _ = NV.proximity(ratio, r)
        T = NV.characteristic(f, r).T
        vals.append(m / T)
    ok = all(0.999 <= v <= 1.001 for v in vals)
    return ok, "exp(2^z): m(r, g(z+1)/g(z)) / T(r, g) = " + ", ".join(f"{v:.9f}" for v in vals)


def criterion_7():
    g = H.Curve([parse("1"), parse("exp(z)")])
    rep = V.check_smt(g, [[1, 0], [0, 1], [1, 1]], 1, np.geomspace(5, 50, 10))
    slope = rep.checks["margin_slope"]
    ok = abs(slope) < 0.02 / math.pi
    return ok, f"second main theorem desk instance: margin slope {slope:.2e} (limit {0.02 / math.pi:.2e})"


def criterion_8():
    rep = catalog.run_example("example-7.3")
    parts = {p.scenario: p for p in rep.parts}
    gp = parts["general-position"].checks["observed"]
    inv = [parts[f"h{j}"].checks["forward_invariant"] for j in range(1, 6)]
    sigma = parts["order-fit"].checks["sigma"]
    ok = gp and all(inv) and 0.9 <= sigma <= 1.1
    return ok, f"example-7.3: general position {gp}, {sum(inv)}/5 invariant under z -> 4z, sigma fit {sigma:.6f}"


def _jensen_suite():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(50):
        a = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        f = N.exp(N.mul(N.Const(a), N.Z))
        for b in rng.uniform(-4, 4, 2) + 1j * rng.uniform(-4, 4, 2):
            f = N.mul(f, N.sub(N.Z, N.Const(complex(b))))
        for b in rng.uniform(-4, 4, 2) + 1j * rng.uniform(-4, 4, 2):
            f = N.div(f, N.sub(N.Z, N.Const(complex(b))))
        f0 = abs(complex(f.evaluate(np.array([0j]))[0]))
        for r in (1, 2, 5, 10):
            s, t = NV.characteristic(f, r), NV.characteristic(N.div(1, f), r)
            bound = 5 * (s.quadrature_error + t.quadrature_error) + 1e-12
            worst = max(worst, abs(s.T - t.T - math.log(f0)) / bound)
    return worst


def _determinant_suite():
    fam = [parse(s) for s in ("1", "exp(z)", "z^2 + 1", "sin(z)")]
    z = np.array([0.3 + 0.1j, -0.7 + 0.4j, 1.1 - 0.6j])
    worst = 0.0
    for n in (2, 3, 4):
        gs = fam[:n]
        for build in (lambda g: C.casorati(g, 0.6), lambda g: C.q_casorati(g, 1.3), C.wronskian):
            a = build(gs).evaluate(z)
            b = build([gs[1], gs[0]] + gs[2:]).evaluate(z)
            worst = max(worst, float(np.max(np.abs(a + b) / np.abs(a))))
        lam = 0.7 - 1.9j
        a = C.casorati([N.mul(N.Const(lam), gs[0])] + gs[1:], 0.6).evaluate(z)
        b = C.casorati(gs, 0.6).evaluate(z)
        worst = max(worst, float(np.max(np.abs(a - lam * b) / np.abs(a))))
    return worst


def _derivative_suite():
    rng = np.random.default_rng(1)
    exprs = [parse(s) for s in ("exp(sin(z))*z^2", "gamma(z + 2)", "sn(z; 0.6)", "exp(2^z)",
                                "cos(z)/(z + 3)", "qgamma(0.5; z)")]
    worst, h = 0.0, 1e-5
    for f in exprs:
        d = N.differentiate(f)
        for _ in range(10):
            z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            fd = (f.evaluate(np.array([z + h]))[0] - f.evaluate(np.array([z - h]))[0]) / (2 * h)
            exact = d.evaluate(np.array([z]))[0]
            worst = max(worst, abs(fd - exact) / (1 + abs(exact)))
    return worst


def _composition_suite():
    rng = np.random.default_rng(2)
    f = parse("exp(sin(z)) * gamma(z + 3) / (z^2 + 4)")
    worst = 0.0
    for _ in range(50):
        z, c1, c2 = (complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(3))
        q1, q2 = (complex(rng.uniform(0.5, 1.5), rng.uniform(-0.5, 0.5)) for _ in range(2))
        a = N.shift(N.shift(f, c1), c2).evaluate(np.array([z]))[0]
        b = N.shift(f, c1 + c2).evaluate(np.array([z]))[0]
        worst = max(worst, abs(a - b) / abs(b))
        a = N.rescale(N.rescale(f, q1), q2).evaluate(np.array([z]))[0]
        b = N.rescale(f, q1 * q2).evaluate(np.array([z]))[0]
        worst = max(worst, abs(a - b) / abs(b))
    return worst


def criterion_9():
    j = _jensen_suite()
    d = _determinant_suite()
    fd = _derivative_suite()
    comp = _composition_suite()
    ok = j <= 1 and d <= 1e-12 and fd <= 1e-6 and comp <= 1e-12
    return ok, (f"properties: Jensen residual/(5 err) {j:.2f}, determinants {d:.1e}, "
                f"derivatives {fd:.1e}, shift/rescale composition {comp:.1e}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9]


@pytest.mark.parametrize("n", range(1, 10))
def test_criterion(n, capsys):
    ok, detail = CRITERIA[n - 1]()
    with capsys.disabled():
        print("\n" + _line(n, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    for i, fn in enumerate(CRITERIA, 1):
        print(_line(i, *fn()), flush=True)
