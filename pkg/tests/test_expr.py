import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casorati_lab import expr as E
from casorati_lab.errors import EvalOverflow, ParseError, SingularPoint, ZeroScale
from casorati_lab.expr import nodes as N
from casorati_lab.expr import special

Z = N.Z


def ev(f, z):
    return complex(N.eval_expr(f, z))


# ---------------------------------------------------------------- evaluation

def test_eval_examples():
    assert ev(E.parse("exp(z)"), 0) == 1
    assert ev(E.parse("gamma(z)"), 5) == 24
    assert ev(E.parse("exp(exp(z))"), math.log(2)) == pytest.approx(math.e ** 2, rel=1e-15)


def test_gamma_pole_is_singular():
    with pytest.raises(SingularPoint):
        N.eval_expr(E.parse("gamma(z)"), -2)
    assert ev(E.parse("rgamma(z)"), -2) == 0


def test_overflow_reported_and_log_channel_finite():
    f = E.parse("exp(exp(z))")
    with pytest.raises(EvalOverflow):
        N.eval_expr(f, 8.0)
    assert N.log_abs(f, np.array([8.0]))[0] == pytest.approx(math.exp(8.0), rel=1e-14)


def test_log_channel_matches_direct():
    f = E.parse("(z - 1)^2 * exp(z) / (z + 2) + sin(z)")
    z = np.array([0.3 + 0.2j, -1.1 + 2j, 2.5 - 0.7j])
    assert np.allclose(np.real(f.log_evaluate(z)), np.log(np.abs(f.evaluate(z))), rtol=1e-12)


def test_gamma_recurrence_grid():
    g = E.parse("gamma(z)")
    xs = np.linspace(-4.7, 4.3, 31)
    ys = np.linspace(-3, 3, 7)
    z = (xs[:, None] + 1j * ys[None, :]).ravel()
    lhs = g.evaluate(z + 1)
    rhs = z * g.evaluate(z)
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=0)


@pytest.mark.parametrize("which", ["sn", "cn", "dn"])
@pytest.mark.parametrize("k", [0.1, 0.6, 0.95])
def test_jacobi_against_mpmath(which, k):
    f = N.jacobi(which, Z, k)
    for z in (0.3 + 0.1j, 1.7 - 0.8j, -2.2 + 1.3j, 4.0 + 0.5j):
        ref = complex(mp.ellipfun(which, z, m=k * k))
        assert ev(f, z) == pytest.approx(ref, rel=1e-11, abs=1e-12)


def test_qgamma_at_origin_is_q_pochhammer():
    f = E.parse("qgamma(0.5; z)")
    ref = np.prod(1 - 0.5 ** np.arange(1, 80))
    assert ev(f, 0) == pytest.approx(ref, rel=1e-14)
    assert ev(f, 0).real == pytest.approx(0.288788, abs=1e-6)


def test_polygamma_against_mpmath():
    f = E.parse("polygamma(1; z)")
    assert ev(f, 2.5 + 1j) == pytest.approx(complex(mp.psi(1, 2.5 + 1j)), rel=1e-12)


def test_precision_mode_matches_mpmath():
    f = E.parse("gamma(z) * exp(z) - sin(z)")
    z = 1.3 + 0.4j
    v = N.eval_expr(f, z, prec=200)
    with mp.workprec(200):
        zz = mp.mpc(z)
        ref = mp.gamma(zz) * mp.exp(zz) - mp.sin(zz)
    assert abs(complex(v) - complex(ref)) < 1e-15


# ---------------------------------------------------------------- differentiation

def test_derivative_examples():
    assert ev(N.differentiate(E.parse("z^2")), 3) == pytest.approx(6)
    d = N.differentiate(E.parse("exp(2^z)"))
    assert ev(d, 0) == pytest.approx(math.e * math.log(2), rel=1e-14)
    assert ev(N.differentiate(E.parse("sin(z)")), 0) == pytest.approx(1)


def test_gamma_and_sn_derivatives():
    dg = N.differentiate(E.parse("gamma(z)"))
    z = 1.7 + 0.3j
    assert ev(dg, z) == pytest.approx(complex(mp.gamma(z) * mp.psi(0, z)), rel=1e-12)
    k = 0.6
    ds = N.differentiate(N.sn(Z, k))
    ref = complex(mp.ellipfun("cn", z, m=k * k) * mp.ellipfun("dn", z, m=k * k))
    assert ev(ds, z) == pytest.approx(ref, rel=1e-10)


# random expression trees for property checks
_LEAVES = [E.parse(s) for s in ("z", "2.5", "(1+2i)", "z - 1.5")]
_UNARY = [N.exp, N.sin, N.cos, lambda a: N.ipow(a, 2), lambda a: N.ipow(a, 3), N.neg]
_BINARY = [N.add, N.sub, N.mul, N.div]


def _tree(draw_ints, depth):
    kind = next(draw_ints) % 3 if depth > 0 else 0
    if kind == 0:
        return _LEAVES[next(draw_ints) % len(_LEAVES)]
    if kind == 1:
        return _UNARY[next(draw_ints) % len(_UNARY)](_tree(draw_ints, depth - 1))
    op = _BINARY[next(draw_ints) % len(_BINARY)]
    return op(_tree(draw_ints, depth - 1), _tree(draw_ints, depth - 1))


trees = st.lists(st.integers(0, 1000), min_size=40, max_size=40).map(lambda xs: _tree(iter(xs * 4), 3))
points = st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False)


@settings(max_examples=250, deadline=None)
@given(trees, points)
def test_derivative_matches_central_difference(f, z):
    h = 1e-5
    with np.errstate(all="ignore"):
        vals = f.evaluate(np.array([z - h, z, z + h]))
        d = complex(N.differentiate(f).evaluate(np.array([z]))[0])
    if not np.all(np.isfinite(vals)) or not np.isfinite(d) or np.max(np.abs(vals)) > 1e6:
        return
    # skip points near singularities where the difference quotient is unreliable
    d2 = complex(N.differentiate(N.differentiate(f)).evaluate(np.array([z]))[0])
    if not np.isfinite(d2) or abs(d2) * h > 1e-2 * (1 + abs(d)):
        return
    fd = (vals[2] - vals[0]) / (2 * h)
    assert abs(d - fd) <= 1e-6 * (1 + abs(d)) * max(1.0, abs(vals[1]))


@settings(max_examples=200, deadline=None)
@given(trees, points, points, points)
def test_shift_composition(f, z, c1, c2):
    a = N.shift(N.shift(f, c1), c2).evaluate(np.array([z]))[0]
    b = N.shift(f, c1 + c2).evaluate(np.array([z]))[0]
    if not (np.isfinite(a) and np.isfinite(b)) or abs(b) > 1e8:
        return
    assert abs(a - b) <= 1e-12 * max(1.0, abs(b)) * 1e3


@settings(max_examples=200, deadline=None)
@given(trees, points,
       st.complex_numbers(min_magnitude=0.3, max_magnitude=1.5, allow_nan=False, allow_infinity=False),
       st.complex_numbers(min_magnitude=0.3, max_magnitude=1.5, allow_nan=False, allow_infinity=False))
def test_rescale_composition(f, z, q1, q2):
    a = N.rescale(N.rescale(f, q1), q2).evaluate(np.array([z]))[0]
    b = N.rescale(f, q1 * q2).evaluate(np.array([z]))[0]
    if not (np.isfinite(a) and np.isfinite(b)) or abs(b) > 1e8:
        return
    assert abs(a - b) <= 1e-12 * max(1.0, abs(b)) * 1e3


# ---------------------------------------------------------------- shift / rescale

def test_shift_examples():
    assert ev(N.shift(Z, 1), 0) == 1
    g = E.parse("gamma(z)")
    assert ev(N.div(N.shift(g, 1), g), 3) == pytest.approx(3)
    f = E.parse("exp(2^z)")
    for z in (0.2, 0.5 + 0.5j, 1.1 - 0.3j):
        assert ev(N.shift(f, 1), z) == pytest.approx(ev(f, z) ** 2, rel=1e-13)


def test_shift_is_exact_substitution():
    f = E.parse("sin(z)*exp(z)/(z+3)")
    z = 0.7 - 0.2j
    assert ev(N.shift(f, 0.25 + 1j), z) == ev(f, z + 0.25 + 1j)


def test_rescale_examples():
    q = 2.0 + 1.0j
    assert ev(N.rescale(Z, q), 1) == q
    assert ev(N.rescale(E.parse("exp(z)"), 2), 1) == pytest.approx(math.e ** 2)
    Pi = N.prodq(3.0, Z)
    for z in (0.4 + 0.2j, -1.3 + 0.7j, 2.2):
        assert ev(N.rescale(Pi, 3.0), z) == pytest.approx((1 - 3.0 * z) * ev(Pi, z), rel=1e-13)
    with pytest.raises(ZeroScale):
        N.rescale(Z, 0)


# ---------------------------------------------------------------- parser

@pytest.mark.parametrize("src", [
    "exp(z)", "z^2 + 3*z - 1", "gamma(z + 1)/gamma(z)", "sn(z; 0.6)", "qgamma(0.5; z)", "prodq(2; z)",
    "shift(exp(z); 1)", "rescale(sin(z); 2i)", "det(1, z; z, 1)", "-(z - 1)^3", "exp(2^z)", "rgamma(-z + 2)",
    "(1+2i)*z", "cn(2*z; 0.3) + dn(z; 0.3)", "polygamma(1; z)", "rqgamma(0.25; z)", "log(z + 2)",
])
def test_parse_print_round_trip(src):
    f = E.parse(src)
    g = E.parse(str(f))
    assert g == f
    assert str(g) == str(f)


def test_parse_values():
    assert ev(E.parse("2+3i"), 0) == 2 + 3j
    assert ev(E.parse("pi"), 0) == pytest.approx(math.pi)
    assert ev(E.parse("e^2"), 0) == pytest.approx(math.e ** 2)
    assert ev(E.parse("det(1, z; z, 1)"), 2) == pytest.approx(-3)
    assert ev(E.parse("shift(z^2; 1)"), 2) == pytest.approx(9)
    assert ev(E.parse("z^0.5"), 4) == pytest.approx(2)
    assert ev(E.parse("prodq(2; z)"), 1) == 0


@pytest.mark.parametrize("src, line, col", [
    ("exp(z", 1, 6),
    ("z +* 2", 1, 4),
    ("foo(z)", 1, 1),
    ("1 +\n  $", 2, 3),
])
def test_parse_errors_report_position(src, line, col):
    with pytest.raises(ParseError) as info:
        E.parse(src)
    assert (info.value.line, info.value.column) == (line, col)
    assert f"line {line}, column {col}" in str(info.value)


def test_parameters_must_be_constant():
    with pytest.raises(ParseError):
        E.parse("sn(z; z)")


def test_structural_equality_and_hash():
    a = E.parse("sin(z) + 1")
    b = E.parse("sin(z) + 1")
    assert a == b and hash(a) == hash(b)
    assert a != E.parse("sin(z) + 2")


def test_agm_and_theta_constants():
    assert special.agm(1.0, math.sqrt(0.5)) == pytest.approx(float(mp.agm(1, mp.sqrt(0.5))), rel=1e-15)
    d = special.elliptic_data(0.6)
    assert d.K == pytest.approx(float(mp.ellipk(0.36)), rel=1e-14)
    assert d.Kp == pytest.approx(float(mp.ellipk(0.64)), rel=1e-14)


def test_complex_literal_exp_i_pi():
    assert ev(E.parse("exp(pi*i)"), 0) == pytest.approx(-1)
    assert cmath.isclose(ev(E.parse("cos(z)^2 + sin(z)^2"), 1.3 + 2j), 1, rel_tol=1e-12)
