import math

import numpy as np
import pytest

from casorati_lab import quadrature as Q
from casorati_lab.errors import QuadratureDivergence


def test_weights_integrate_polynomials():
    assert np.sum(Q.W_KRONROD) == pytest.approx(2)
    assert np.sum(Q.W_GAUSS) == pytest.approx(2)
    # K15 is exact to degree 22
    assert np.dot(Q.W_KRONROD, Q.NODES ** 22) == pytest.approx(2 / 23, rel=1e-13)


def test_smooth_integral():
    res = Q.integrate(np.sin, [0, math.pi], tol=1e-13)
    assert res.converged and res.value == pytest.approx(2, abs=1e-13)


def test_log_endpoint_singularity():
    res = Q.integrate(lambda x: np.log(x), [0, 1], tol=1e-10)
    assert res.value == pytest.approx(-1, abs=1e-9)


def test_vector_valued():
    res = Q.integrate(lambda x: np.stack([x, x ** 2], axis=-1), [0, 1], tol=1e-12)
    assert np.allclose(res.value, [0.5, 1 / 3])


def test_circle_mean():
    res = Q.circle_mean(lambda t: np.cos(t) ** 2, tol=1e-12)
    assert res.value == pytest.approx(0.5, abs=1e-12)


def test_divergence_is_reported():
    with pytest.raises(QuadratureDivergence):
        Q.integrate(lambda x: 1 / x, [-1, 2], tol=1e-10, max_panels=200)
    res = Q.integrate(lambda x: 1 / x, [-1, 2], tol=1e-10, max_panels=200, strict=False)
    assert not res.converged
