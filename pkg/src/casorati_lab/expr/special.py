"""Numerical kernels behind the special-function nodes.

Jacobi elliptic functions are evaluated from theta-function quotients with
the nome obtained from the complete elliptic integrals (computed by the
arithmetic-geometric mean).  Geometric infinite products are truncated at
the first factor indistinguishable from one in binary64.
"""
from __future__ import annotations

import math
from functools import lru_cache

import mpmath
import numpy as np
from scipy import special as sp

from ..errors import BadScale

TAIL_EPS = 1e-17
# |rho| must exceed 1 + MIN_RATIO_GAP for the geometric products
MIN_RATIO_GAP = 1e-3


def agm(a: float, b: float) -> float:
    for _ in range(64):
        if abs(a - b) <= 4e-16 * abs(a):
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


class EllipticData:
    """Quarter periods, nome and theta constants for a modulus k in (0, 1)."""

    def __init__(self, k: float):
        k = float(k)
        if not 0.0 < k < 1.0:
            raise ValueError(f"elliptic modulus must lie in (0, 1), got {k}")
        self.k = k
        kp = math.sqrt(1.0 - k * k)
        self.K = math.pi / (2.0 * agm(1.0, kp))
        self.Kp = math.pi / (2.0 * agm(1.0, k))
        self.log_q = -math.pi * self.Kp / self.K
        self.q = math.exp(self.log_q)
        # enough terms that q^(n^2 - n - 3/4) < 1e-17 after period reduction
        n = 2
        while (n * n - n - 0.75) * -self.log_q < 40.0:
            n += 1
        self.nterms = n + 1
        self.t2 = float(self._theta(2, np.zeros(1))[0].real)
        self.t3 = float(self._theta(3, np.zeros(1))[0].real)
        self.t4 = float(self._theta(4, np.zeros(1))[0].real)

    def _theta(self, which: int, v: np.ndarray) -> np.ndarray:
        q = self.q
        out = np.zeros_like(v, dtype=complex)
        if which in (1, 2):
            for n in range(self.nterms):
                w = q ** ((n + 0.5) ** 2)
                if which == 1:
                    out += (-1) ** n * w * np.sin((2 * n + 1) * v)
                else:
                    out += w * np.cos((2 * n + 1) * v)
            return 2.0 * out
        out += 1.0
        for n in range(1, self.nterms):
            w = q ** (n * n)
            if which == 4:
                w = (-1) ** n * w
            out += 2.0 * w * np.cos(2 * n * v)
        return out

    def reduce(self, u: np.ndarray) -> np.ndarray:
        # 4K and 4iK' are common periods of sn, cn and dn
        re = np.mod(u.real + 2.0 * self.K, 4.0 * self.K) - 2.0 * self.K
        im = np.mod(u.imag + 2.0 * self.Kp, 4.0 * self.Kp) - 2.0 * self.Kp
        return re + 1j * im

    def sncndn(self, u, which: str) -> np.ndarray:
        u = self.reduce(np.asarray(u, dtype=complex))
        v = np.pi * u / (2.0 * self.K)
        t4v = self._theta(4, v)
        if which == "sn":
            return (self.t3 / self.t2) * self._theta(1, v) / t4v
        if which == "cn":
            return (self.t4 / self.t2) * self._theta(2, v) / t4v
        if which == "dn":
            return (self.t4 / self.t3) * self._theta(3, v) / t4v
        raise ValueError(which)


@lru_cache(maxsize=64)
def elliptic_data(k: float) -> EllipticData:
    return EllipticData(k)


def check_ratio(rho: complex) -> complex:
    rho = complex(rho)
    if not abs(rho) > 1.0 + MIN_RATIO_GAP:
        raise BadScale(f"geometric product needs |ratio| > 1 (+{MIN_RATIO_GAP}), got {rho}")
    return rho


def _nfactors(rho: complex, umax: float) -> int:
    if umax == 0.0:
        return 1
    return max(1, int(math.ceil(math.log(umax / TAIL_EPS) / math.log(abs(rho)))) + 1)


def geom_product(u: np.ndarray, rho: complex) -> np.ndarray:
    """prod_{j>=0} (1 - u / rho**j) for |rho| > 1."""
    u = np.asarray(u, dtype=complex)
    out = np.ones_like(u)
    umax = float(np.max(np.abs(u[np.isfinite(u)]), initial=0.0))
    p = 1.0 + 0j
    for _ in range(_nfactors(rho, umax)):
        out = out * (1.0 - u / p)
        p *= rho
    return out


def geom_product_log(u: np.ndarray, rho: complex) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    out = np.zeros_like(u)
    umax = float(np.max(np.abs(u[np.isfinite(u)]), initial=0.0))
    p = 1.0 + 0j
    for _ in range(_nfactors(rho, umax)):
        out = out + np.log1p(-u / p)
        p *= rho
    return out


def geom_pole_sum(u: np.ndarray, rho: complex, power: int) -> np.ndarray:
    """sum_{j>=0} (u - rho**j)**(-power): the logarithmic-derivative series."""
    u = np.asarray(u, dtype=complex)
    out = np.zeros_like(u)
    umax = float(np.max(np.abs(u[np.isfinite(u)]), initial=1.0))
    p = 1.0 + 0j
    for _ in range(_nfactors(rho, umax) + 4):
        out = out + (u - p) ** (-power)
        p *= rho
    return out


def q_pochhammer_q(q: complex) -> complex:
    """(q; q)_inf = prod_{k>=1} (1 - q**k) for 0 < |q| < 1."""
    q = complex(q)
    out = 1.0 + 0j
    t = q
    while abs(t) > TAIL_EPS:
        out *= 1.0 - t
        t *= q
    return out


# scalar high-precision counterparts -----------------------------------------

def mp_geom_product(u, rho):
    u = mpmath.mpc(u)
    rho = mpmath.mpc(rho)
    out = mpmath.mpc(1)
    p = mpmath.mpc(1)
    eps = mpmath.mpf(2) ** (-mpmath.mp.prec - 4)
    while True:
        t = u / p
        out *= 1 - t
        if abs(t) < eps:
            return out
        p *= rho


def mp_geom_pole_sum(u, rho, power):
    u = mpmath.mpc(u)
    rho = mpmath.mpc(rho)
    out = mpmath.mpc(0)
    p = mpmath.mpc(1)
    eps = mpmath.mpf(2) ** (-mpmath.mp.prec - 4)
    while True:
        t = (u - p) ** (-power)
        out += t
        if abs(p) > 1 and abs(t) < eps * max(abs(out), eps):
            return out
        p *= rho


def polygamma(n: int, u: np.ndarray) -> np.ndarray:
    if n == 0:
        return sp.psi(u)
    f = np.frompyfunc(lambda x: complex(mpmath.psi(n, x)), 1, 1)
    return np.asarray(f(u), dtype=complex)
