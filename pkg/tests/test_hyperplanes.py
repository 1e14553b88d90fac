import math

import numpy as np
import pytest

from casorati_lab import hyperplanes as H
from casorati_lab import roots as R
from casorati_lab.catalog import OMEGA_12, example_12_curve, example_12_hyperplanes
from casorati_lab.errors import (
    BadScale,
    CoverageInsufficient,
    DimensionMismatch,
    NotPrime,
    UnsolvableConstants,
)
from casorati_lab.expr import nodes as N
from casorati_lab.expr import parse

C12 = 2 * math.log(6)


def test_hyperplane_basics():
    h = H.Hyperplane((1, 2j, 0))
    assert h.dim == 3
    assert np.allclose(h.scaled(2).vector(), [2, 4j, 0])
    with pytest.raises(ValueError):
        H.Hyperplane((0, 0))


def test_example_hyperplanes_in_general_position():
    res = H.general_position(example_12_hyperplanes())
    assert res.ok and res.witness is None
    assert res.checked == math.comb(7, 4)


def test_general_position_scale_invariant():
    rng = np.random.default_rng(0)
    hs = example_12_hyperplanes()
    scaled = [h.scaled(complex(rng.normal(), rng.normal()) * 10 ** rng.uniform(-3, 3)) for h in hs]
    a, b = H.general_position(hs), H.general_position(scaled)
    assert a.ok == b.ok
    assert a.min_scaled_det == pytest.approx(b.min_scaled_det, rel=1e-9)


def test_general_position_failure_and_mismatch():
    res = H.general_position(H.as_hyperplanes([[1, 0], [0, 1], [2, 0]]))
    assert not res.ok and res.witness == (0, 2)
    with pytest.raises(DimensionMismatch):
        H.general_position(H.as_hyperplanes([[1, 0], [0, 1, 1]]))


@pytest.mark.parametrize("m, count", [(2, 6), (3, 20), (5, 252), (7, 3432)])
def test_vandermonde_prime_families(m, count):
    res = H.general_position(H.vandermonde_family(m))
    assert res.ok
    assert res.checked == count
    assert res.min_scaled_det > 1e-10


def test_vandermonde_composite():
    with pytest.raises(NotPrime):
        H.vandermonde_family(4)
    res = H.general_position(H.vandermonde_family(4, allow_composite=True))
    assert not res.ok
    assert abs(H.vandermonde_minor(4, [1, 3], [1, 3])) < 1e-12
    # every singular subset is two unit vectors plus two rows of V whose
    # complementary 2x2 minor vanishes
    assert len(res.singular) == 4
    for subset in res.singular:
        units = [j for j in subset if j < 4]
        rows = [j - 4 for j in subset if j >= 4]
        cols = [j for j in range(4) if j not in units]
        assert len(units) == 2 and abs(H.vandermonde_minor(4, rows, cols)) < 1e-12


def test_apply_example_h5():
    f = example_12_curve()
    h5 = example_12_hyperplanes()[4]
    val = H.apply(h5, f)
    z = np.array([0.2 + 0.1j, -0.4 + 0.3j, 0.7 - 0.2j])
    assert np.allclose(val.evaluate(z), np.exp(np.exp(z)) - 1, rtol=1e-12)
    with pytest.raises(DimensionMismatch):
        H.apply(H.Hyperplane((1, 1)), f)


def test_forward_invariance_examples():
    s2 = N.ipow(N.sin(N.mul(N.Const(OMEGA_12), N.Z)), 2)
    d = R.divisor(s2, R.Disc(0, 4 + C12))
    res = H.forward_invariant(d, C12, 4)
    assert res.ok and res.checked > 0
    assert all(m == 2 for m in d.multiplicities("zero"))
    d = R.divisor(parse("exp(exp(z)) - 1"), R.Disc(0, 2 + C12))
    assert H.forward_invariant(d, C12, 2).ok
    # not invariant under an unrelated shift
    d = R.divisor(parse("exp(exp(z)) - 1"), R.Disc(0, 4.5))
    res = H.forward_invariant(d, 1.0, 3.5)
    assert res.checked > 0 and not res.ok


def test_forward_invariance_multiplicity_level():
    # zero of order 2 at 0 whose image under z -> z + 1 has order 1
    d = R.Divisor([R.DivisorEntry(0j, 2, "zero"), R.DivisorEntry(1 + 0j, 1, "zero")], R.Disc(0, 3))
    res = H.forward_invariant(d, 1, 0.5)
    assert not res.ok and res.violations[0]["image_mult"] == 1


def test_forward_invariance_coverage():
    d = R.divisor(parse("sin(z)"), R.Disc(0, 4))
    with pytest.raises(CoverageInsufficient):
        H.forward_invariant(d, math.pi, 2)


def test_forward_invariance_compositional():
    d = R.divisor(parse("sin(pi*z)"), R.Disc(0, 9))
    assert H.forward_invariant(d, 1, 8).ok
    assert H.forward_invariant(d, 2, 7).ok


def test_forward_invariance_q():
    Pi = N.prodq(2.0, N.Z)
    d = R.divisor(Pi, R.Disc(0, 40))
    assert H.forward_invariant_q(d, 2.0, 20).ok
    with pytest.raises(BadScale):
        H.forward_invariant_q(d, 0, 1)
    d = R.divisor(parse("exp(z) - exp(2*pi*i/3)^2"), R.Disc(0, 24))
    assert H.forward_invariant_q(d, 4, 6).ok


def test_borel_partition_example_12():
    part = H.borel_partition(example_12_curve(), C12)
    assert [sorted(c) for c in part.classes] == [[0, 1], [2, 3]]
    assert not part.transitivity_violations
    periodic, worst = H.is_periodic_curve(example_12_curve(), C12)
    assert not periodic and worst > 1e-3


def test_borel_partition_simple():
    g = H.Curve([parse("1"), parse("exp(z)"), parse("exp(z^2)")])
    assert [sorted(c) for c in H.borel_partition(g, 1).classes] == [[0], [1], [2]]
    g = H.Curve([parse("1"), parse("exp(z)"), parse("exp(z) + 3")])
    part = H.borel_partition(g, 2j * math.pi)
    assert [sorted(c) for c in part.classes] == [[0, 1, 2]]


def test_borel_partition_sum_zero():
    g = H.Curve([parse("exp(z)"), parse("-exp(z)"), parse("z"), parse("-z")])
    part = H.borel_partition(g, 1, assert_sum_zero=True)
    assert [sorted(c) for c in part.classes] == [[0, 1], [2, 3]]
    assert max(part.class_sums) < 1e-14


def test_sharpness_p3():
    cons = H.green_sharpness_curve(10, 3)
    assert cons.image_dimension == 3
    assert len(cons.hyperplanes) == 13
    # every form is a single phi: h_j(f) = d_j * phi_{k_j}
    z = np.array([0.3 + 0.2j, -0.6 + 0.1j])
    for h, d, k in zip(cons.hyperplanes, cons.d, cons.k):
        val = H.apply(h, cons.curve).evaluate(z)
        assert np.allclose(val, d * cons.phis[k - 1].evaluate(z), rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("p", range(1, 11))
def test_sharpness_image_dimension(p):
    assert H.green_sharpness_curve(10, p).image_dimension == 10 // p


def test_sharpness_errors():
    with pytest.raises(NotPrime):
        H.green_sharpness_curve(9, 3)
    with pytest.raises(UnsolvableConstants):
        H.projected_sharpness_curve(5)


def test_q_sharpness_functions():
    f = H.q_sharpness_functions(0.5, 1)
    assert complex(f.evaluate(np.array([0j]))[0]) == pytest.approx(1 / 0.288788095, rel=1e-6)
    d = R.divisor(f, R.Disc(0, 20))
    assert sorted(d.locations("zero").real) == pytest.approx([1, 2, 4, 8, 16])
    # zeros of 1/gamma_q are the poles of gamma_q; forward invariant under z -> q^-1 z
    assert H.forward_invariant_q(d, 2.0, 10).ok
    with pytest.raises(BadScale):
        H.q_sharpness_functions(2.0, 1)
