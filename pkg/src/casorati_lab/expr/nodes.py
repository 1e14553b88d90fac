"""Immutable expression trees for meromorphic functions of one variable z.

Every node evaluates on numpy arrays through two channels:

* ``evaluate`` returns the complex value (may overflow to ``inf``);
* ``log_evaluate`` returns a complex logarithm ``L`` with ``Re L = log|f|``
  that stays finite where the value itself would overflow.  The imaginary
  part is *some* argument of ``f``, not necessarily the principal one.

A scalar high-precision path (``_mp``) mirrors ``evaluate`` through mpmath.
"""
from __future__ import annotations

import cmath
import math
from functools import lru_cache

import mpmath
import numpy as np
from scipy import special as sp

from ..errors import EvalOverflow, SingularPoint, Unsupported, ZeroScale
from . import special

_LOG2I = cmath.log(2j)
_LOG2 = math.log(2.0)


def _lse(a, b):
    """log(exp(a) + exp(b)) for complex arrays, stable in the real part."""
    a, b = np.broadcast_arrays(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
    swap = b.real > a.real
    hi = np.where(swap, b, a)
    lo = np.where(swap, a, b)
    out = hi + np.log1p(np.exp(lo - hi))
    out = np.where(np.isneginf(hi.real), complex(-np.inf), out)
    out = np.where(np.isposinf(hi.real), hi, out)
    return out


def _fmt_number(c: complex) -> str:
    c = complex(c)
    if c.real == 0.0 and c.imag != 0.0:
        s = repr(c.imag) + "i"
        return s if c.imag > 0 else f"({s})"
    if c.imag == 0.0:
        s = repr(c.real)
        if s.endswith(".0") and abs(c.real) < 1e15:
            s = s[:-2]
        return s if c.real >= 0 else f"({s})"
    re = repr(c.real)
    im = repr(abs(c.imag))
    sign = "-" if c.imag < 0 or (c.imag == 0.0 and math.copysign(1, c.imag) < 0) else "+"
    return f"({re}{sign}{im}i)"


class Expr:
    """Base node.  Children live in ``args``; hashable node data in ``params``."""

    __slots__ = ("args", "params", "has_z", "_hash")
    prec = 100  # printing precedence

    def __init__(self, *args, params=()):
        self.args = tuple(args)
        self.params = tuple(params)
        self.has_z = isinstance(self, Var) or any(a.has_z for a in self.args)
        self._hash = hash((type(self).__name__, self.params, self.args))

    # identity -----------------------------------------------------------------
    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return (
            type(self) is type(other)
            and self._hash == other._hash
            and self.params == other.params
            and self.args == other.args
        )

    def __repr__(self):
        return f"Expr({self})"

    # arithmetic ---------------------------------------------------------------
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        if isinstance(n, (int, np.integer)):
            return ipow(self, int(n))
        return exp(mul(as_expr(n), log(self)))

    # evaluation ---------------------------------------------------------------
    def evaluate(self, z):
        """Vectorized value; poles give ``inf`` or ``nan``, nothing is raised."""
        with np.errstate(all="ignore"):
            out = self._ev(np.asarray(z, dtype=complex))
        return out

    def log_evaluate(self, z):
        """Vectorized complex logarithm with ``Re = log|f|`` (never overflows)."""
        with np.errstate(all="ignore"):
            out = self._lev(np.asarray(z, dtype=complex))
        return out

    def _ev(self, z):
        raise NotImplementedError

    def _lev(self, z):
        return np.log(self._ev(z))

    def _mp(self, z):
        raise Unsupported(f"no high-precision rule for {type(self).__name__}")

    def _d(self) -> "Expr":
        raise Unsupported(f"no derivative rule for {type(self).__name__}")

    def _sub(self, g: "Expr") -> "Expr":
        """Substitute the variable z by the expression g."""
        if not self.has_z:
            return self
        return self._rebuild(tuple(a._sub(g) for a in self.args))

    def _rebuild(self, args):
        out = object.__new__(type(self))
        Expr.__init__(out, *args, params=self.params)
        return out

    def walk(self):
        yield self
        for a in self.args:
            yield from a.walk()


# leaves ------------------------------------------------------------------------

class Const(Expr):
    __slots__ = ()

    def __init__(self, value):
        super().__init__(params=(complex(value),))

    @property
    def value(self) -> complex:
        return self.params[0]

    def _ev(self, z):
        return np.full(z.shape, self.value, dtype=complex)

    def _lev(self, z):
        return np.full(z.shape, np.log(self.value + 0j) if self.value != 0 else -np.inf, dtype=complex)

    def _mp(self, z):
        return mpmath.mpc(self.value)

    def _d(self):
        return ZERO

    def __str__(self):
        return _fmt_number(self.value)


class Var(Expr):
    __slots__ = ()

    def __init__(self):
        super().__init__()

    def _ev(self, z):
        return z.copy()

    def _lev(self, z):
        return np.log(z)

    def _mp(self, z):
        return z

    def _d(self):
        return ONE

    def _sub(self, g):
        return g

    def __str__(self):
        return "z"


# arithmetic --------------------------------------------------------------------

class Add(Expr):
    __slots__ = ()
    prec = 1

    def _ev(self, z):
        return self.args[0]._ev(z) + self.args[1]._ev(z)

    def _lev(self, z):
        return _lse(self.args[0]._lev(z), self.args[1]._lev(z))

    def _mp(self, z):
        return self.args[0]._mp(z) + self.args[1]._mp(z)

    def _d(self):
        return add(differentiate(self.args[0]), differentiate(self.args[1]))

    def __str__(self):
        a, b = self.args
        return f"{_wrap(a, 1)} + {_wrap(b, 1)}"


class Sub(Expr):
    __slots__ = ()
    prec = 1

    def _ev(self, z):
        return self.args[0]._ev(z) - self.args[1]._ev(z)

    def _lev(self, z):
        return _lse(self.args[0]._lev(z), self.args[1]._lev(z) + 1j * np.pi)

    def _mp(self, z):
        return self.args[0]._mp(z) - self.args[1]._mp(z)

    def _d(self):
        return sub(differentiate(self.args[0]), differentiate(self.args[1]))

    def __str__(self):
        a, b = self.args
        return f"{_wrap(a, 1)} - {_wrap(b, 2)}"


class Neg(Expr):
    __slots__ = ()
    prec = 3

    def _ev(self, z):
        return -self.args[0]._ev(z)

    def _lev(self, z):
        return self.args[0]._lev(z) + 1j * np.pi

    def _mp(self, z):
        return -self.args[0]._mp(z)

    def _d(self):
        return neg(differentiate(self.args[0]))

    def __str__(self):
        return f"-{_wrap(self.args[0], 4)}"


class Mul(Expr):
    __slots__ = ()
    prec = 2

    def _ev(self, z):
        return self.args[0]._ev(z) * self.args[1]._ev(z)

    def _lev(self, z):
        return self.args[0]._lev(z) + self.args[1]._lev(z)

    def _mp(self, z):
        return self.args[0]._mp(z) * self.args[1]._mp(z)

    def _d(self):
        a, b = self.args
        return add(mul(differentiate(a), b), mul(a, differentiate(b)))

    def __str__(self):
        a, b = self.args
        return f"{_wrap(a, 2)}*{_wrap(b, 2)}"


class Div(Expr):
    __slots__ = ()
    prec = 2

    def _ev(self, z):
        return self.args[0]._ev(z) / self.args[1]._ev(z)

    def _lev(self, z):
        return self.args[0]._lev(z) - self.args[1]._lev(z)

    def _mp(self, z):
        return self.args[0]._mp(z) / self.args[1]._mp(z)

    def _d(self):
        a, b = self.args
        return div(sub(mul(differentiate(a), b), mul(a, differentiate(b))), ipow(b, 2))

    def __str__(self):
        a, b = self.args
        return f"{_wrap(a, 2)}/{_wrap(b, 3)}"


class IntPow(Expr):
    __slots__ = ()
    prec = 4

    @property
    def n(self) -> int:
        return self.params[0]

    def _ev(self, z):
        return self.args[0]._ev(z) ** self.n

    def _lev(self, z):
        return self.n * self.args[0]._lev(z)

    def _mp(self, z):
        return self.args[0]._mp(z) ** self.n

    def _d(self):
        a = self.args[0]
        return mul(mul(Const(self.n), ipow(a, self.n - 1)), differentiate(a))

    def __str__(self):
        n = str(self.n) if self.n >= 0 else f"({self.n})"
        return f"{_wrap(self.args[0], 5)}^{n}"


# elementary functions ------------------------------------------------------------

class Exp(Expr):
    __slots__ = ()

    def _ev(self, z):
        return np.exp(self.args[0]._ev(z))

    def _lev(self, z):
        return self.args[0]._ev(z)

    def _mp(self, z):
        return mpmath.exp(self.args[0]._mp(z))

    def _d(self):
        return mul(self, differentiate(self.args[0]))

    def __str__(self):
        return f"exp({self.args[0]})"


class Log(Expr):
    """Principal branch of the logarithm."""

    __slots__ = ()

    def _ev(self, z):
        la = self.args[0]._lev(z)
        return la.real + 1j * np.angle(np.exp(1j * la.imag))

    def _mp(self, z):
        return mpmath.log(self.args[0]._mp(z))

    def _d(self):
        a = self.args[0]
        return div(differentiate(a), a)

    def __str__(self):
        return f"log({self.args[0]})"


class Sin(Expr):
    __slots__ = ()

    def _ev(self, z):
        return np.sin(self.args[0]._ev(z))

    def _lev(self, z):
        u = self.args[0]._ev(z)
        return _lse(1j * u, -1j * u + 1j * np.pi) - _LOG2I

    def _mp(self, z):
        return mpmath.sin(self.args[0]._mp(z))

    def _d(self):
        a = self.args[0]
        return mul(Cos(a), differentiate(a))

    def __str__(self):
        return f"sin({self.args[0]})"


class Cos(Expr):
    __slots__ = ()

    def _ev(self, z):
        return np.cos(self.args[0]._ev(z))

    def _lev(self, z):
        u = self.args[0]._ev(z)
        return _lse(1j * u, -1j * u) - _LOG2

    def _mp(self, z):
        return mpmath.cos(self.args[0]._mp(z))

    def _d(self):
        a = self.args[0]
        return neg(mul(Sin(a), differentiate(a)))

    def __str__(self):
        return f"cos({self.args[0]})"


# special functions -----------------------------------------------------------------

def _nonpos_int(u):
    return (u.imag == 0) & (u.real <= 0) & (u.real == np.round(u.real))


class Gamma(Expr):
    __slots__ = ()

    def _ev(self, z):
        u = self.args[0]._ev(z)
        out = sp.gamma(u)
        # the real routine is exact on small integers, the complex one is not
        real = u.imag == 0
        out = np.where(real, sp.gamma(u.real) + 0j, out)
        return np.where(_nonpos_int(u), complex(np.inf), out)

    def _lev(self, z):
        u = self.args[0]._ev(z)
        out = sp.loggamma(u)
        return np.where(_nonpos_int(u), complex(np.inf), out)

    def _mp(self, z):
        return mpmath.gamma(self.args[0]._mp(z))

    def _d(self):
        a = self.args[0]
        return mul(mul(self, Polygamma(a, params=(0,))), differentiate(a))

    def __str__(self):
        return f"gamma({self.args[0]})"


class RGamma(Expr):
    """1/Gamma, an entire function."""

    __slots__ = ()

    def _ev(self, z):
        return sp.rgamma(self.args[0]._ev(z))

    def _lev(self, z):
        u = self.args[0]._ev(z)
        out = -sp.loggamma(u)
        return np.where(_nonpos_int(u), complex(-np.inf), out)

    def _mp(self, z):
        return mpmath.rgamma(self.args[0]._mp(z))

    def _d(self):
        a = self.args[0]
        return neg(mul(mul(self, Polygamma(a, params=(0,))), differentiate(a)))

    def __str__(self):
        return f"rgamma({self.args[0]})"


class Polygamma(Expr):
    __slots__ = ()

    @property
    def order(self) -> int:
        return self.params[0]

    def _ev(self, z):
        return special.polygamma(self.order, self.args[0]._ev(z))

    def _mp(self, z):
        return mpmath.psi(self.order, self.args[0]._mp(z))

    def _d(self):
        a = self.args[0]
        return mul(Polygamma(a, params=(self.order + 1,)), differentiate(a))

    def __str__(self):
        return f"polygamma({self.order}; {self.args[0]})"


class GeomProduct(Expr):
    """prod_{j>=0} (1 - u/rho^j), |rho| > 1; zeros exactly at u = rho^j."""

    __slots__ = ()

    @property
    def rho(self) -> complex:
        return self.params[0]

    def _ev(self, z):
        return special.geom_product(self.args[0]._ev(z), self.rho)

    def _lev(self, z):
        return special.geom_product_log(self.args[0]._ev(z), self.rho)

    def _mp(self, z):
        return special.mp_geom_product(self.args[0]._mp(z), self.rho)

    def _d(self):
        a = self.args[0]
        return mul(mul(self, GeomPoleSum(a, params=(self.rho, 1))), differentiate(a))

    def __str__(self):
        return f"prodq({_fmt_number(self.rho)}; {self.args[0]})"


class GeomPoleSum(Expr):
    """sum_{j>=0} (u - rho^j)^(-p): derivatives of log prod(1 - u/rho^j)."""

    __slots__ = ()

    @property
    def rho(self) -> complex:
        return self.params[0]

    @property
    def power(self) -> int:
        return self.params[1]

    def _ev(self, z):
        return special.geom_pole_sum(self.args[0]._ev(z), self.rho, self.power)

    def _mp(self, z):
        return special.mp_geom_pole_sum(self.args[0]._mp(z), self.rho, self.power)

    def _d(self):
        a = self.args[0]
        p = self.power
        return mul(mul(Const(-p), GeomPoleSum(a, params=(self.rho, p + 1))), differentiate(a))

    def __str__(self):
        return f"qpolesum({_fmt_number(self.rho)}; {self.power}; {self.args[0]})"


class Jacobi(Expr):
    """Jacobi elliptic sn, cn or dn with modulus k in (0, 1)."""

    __slots__ = ()

    @property
    def which(self) -> str:
        return self.params[0]

    @property
    def k(self) -> float:
        return self.params[1]

    def _ev(self, z):
        return special.elliptic_data(self.k).sncndn(self.args[0]._ev(z), self.which)

    def _mp(self, z):
        return mpmath.ellipfun(self.which, self.args[0]._mp(z), m=mpmath.mpf(self.k) ** 2)

    def _d(self):
        a = self.args[0]
        sn, cn, dn = (Jacobi(a, params=(w, self.k)) for w in ("sn", "cn", "dn"))
        if self.which == "sn":
            d = mul(cn, dn)
        elif self.which == "cn":
            d = neg(mul(sn, dn))
        else:
            d = mul(Const(-self.k ** 2), mul(sn, cn))
        return mul(d, differentiate(a))

    def __str__(self):
        return f"{self.which}({self.args[0]}; {_fmt_number(self.k)})"


class Det(Expr):
    """Determinant of a square matrix of expressions, evaluated numerically."""

    __slots__ = ()

    @property
    def size(self) -> int:
        return self.params[0]

    def rows(self):
        n = self.size
        return [self.args[i * n:(i + 1) * n] for i in range(n)]

    def _matrix(self, z):
        n = self.size
        vals = [a._ev(z) for a in self.args]
        m = np.stack(vals, axis=-1).reshape(z.shape + (n, n))
        return m

    def _ev(self, z):
        return np.linalg.det(self._matrix(z))

    def _lev(self, z):
        sign, logabs = np.linalg.slogdet(self._matrix(z))
        return logabs + 1j * np.angle(sign)

    def _mp(self, z):
        m = mpmath.matrix([[a._mp(z) for a in row] for row in self.rows()])
        return mpmath.det(m)

    def _d(self):
        rows = self.rows()
        total = ZERO
        for i in range(self.size):
            new = [list(r) for r in rows]
            new[i] = [differentiate(a) for a in rows[i]]
            total = add(total, det_node(new))
        return total

    def __str__(self):
        rows = "; ".join(", ".join(str(a) for a in row) for row in self.rows())
        return f"det({rows})"


def _wrap(e: Expr, prec: int) -> str:
    s = str(e)
    if e.prec < prec:
        return f"({s})"
    return s


# constructors with light simplification -------------------------------------------

ZERO = Const(0)
ONE = Const(1)
Z = Var()


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float, complex, np.number)):
        return Const(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def _is_const(e, v=None):
    return isinstance(e, Const) and (v is None or e.value == v)


def const(value) -> Const:
    return Const(value)


def add(a, b):
    a, b = as_expr(a), as_expr(b)
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    return Add(a, b)


def sub(a, b):
    a, b = as_expr(a), as_expr(b)
    if _is_const(b, 0):
        return a
    if _is_const(a, 0):
        return neg(b)
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    return Sub(a, b)


def neg(a):
    a = as_expr(a)
    if _is_const(a):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.args[0]
    return Neg(a)


def mul(a, b):
    a, b = as_expr(a), as_expr(b)
    if _is_const(a, 0) or _is_const(b, 0):
        return ZERO
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    return Mul(a, b)


def div(a, b):
    a, b = as_expr(a), as_expr(b)
    if _is_const(b, 1):
        return a
    if _is_const(a, 0):
        return ZERO
    if _is_const(a) and _is_const(b) and b.value != 0:
        return Const(a.value / b.value)
    return Div(a, b)


def ipow(a, n: int):
    a = as_expr(a)
    if n == 0:
        return ONE
    if n == 1:
        return a
    if _is_const(a) and (a.value != 0 or n > 0):
        return Const(a.value ** n)
    return IntPow(a, params=(int(n),))


def exp(a):
    return Exp(as_expr(a))


def log(a):
    return Log(as_expr(a))


def sin(a):
    return Sin(as_expr(a))


def cos(a):
    return Cos(as_expr(a))


def gamma(a):
    return Gamma(as_expr(a))


def rgamma(a):
    return RGamma(as_expr(a))


def polygamma(n: int, a):
    return Polygamma(as_expr(a), params=(int(n),))


def prodq(q, a):
    """Pi(u) = prod_{j>=0} (1 - u/q^j) for |q| > 1."""
    return GeomProduct(as_expr(a), params=(special.check_ratio(q),))


def qgamma_recip(q, a):
    """1/gamma_q(u) = (u; q)_inf / (q; q)_inf for 0 < |q| < 1 (entire)."""
    q = complex(q)
    if not 0 < abs(q) < 1:
        from ..errors import BadScale
        raise BadScale(f"q-gamma needs 0 < |q| < 1, got {q}")
    rho = special.check_ratio(1.0 / q)
    return div(GeomProduct(as_expr(a), params=(rho,)), Const(special.q_pochhammer_q(q)))


def qgamma(q, a):
    """gamma_q(u) = (q; q)_inf / (u; q)_inf: poles exactly at q^-k, k >= 0."""
    q = complex(q)
    if not 0 < abs(q) < 1:
        from ..errors import BadScale
        raise BadScale(f"q-gamma needs 0 < |q| < 1, got {q}")
    rho = special.check_ratio(1.0 / q)
    return div(Const(special.q_pochhammer_q(q)), GeomProduct(as_expr(a), params=(rho,)))


def jacobi(which: str, a, k: float):
    if which not in ("sn", "cn", "dn"):
        raise ValueError(which)
    special.elliptic_data(float(k))  # validates k
    return Jacobi(as_expr(a), params=(which, float(k)))


def sn(a, k):
    return jacobi("sn", a, k)


def det_node(rows):
    n = len(rows)
    flat = [as_expr(x) for row in rows for x in row]
    if any(len(r) != n for r in rows):
        raise ValueError("determinant needs a square matrix")
    return Det(*flat, params=(n,))


# public operations ----------------------------------------------------------------

@lru_cache(maxsize=4096)
def differentiate(f: Expr) -> Expr:
    """Exact symbolic derivative tree."""
    return f._d()


def substitute(f: Expr, g: Expr) -> Expr:
    return f._sub(as_expr(g))


def shift(f: Expr, c) -> Expr:
    """Tree computing z -> f(z + c)."""
    return f._sub(Add(Z, Const(c)))


def rescale(f: Expr, q) -> Expr:
    """Tree computing z -> f(q z)."""
    if complex(q) == 0:
        raise ZeroScale("rescale factor must be nonzero")
    return f._sub(Mul(Const(q), Z))


def eval_expr(f: Expr, z, prec: int | None = None):
    """Strict evaluation: raises instead of returning non-finite values.

    With ``prec`` (mantissa bits) the scalar mpmath path is used and an
    ``mpmath.mpc`` is returned.
    """
    if prec is not None:
        with mpmath.workprec(int(prec)):
            try:
                v = f._mp(mpmath.mpc(z))
            except ZeroDivisionError as exc:
                raise SingularPoint(f"{f} is singular at {z}") from exc
            if not mpmath.isfinite(v):
                raise SingularPoint(f"{f} is singular at {z}")
            return +v
    z_arr = np.asarray(z, dtype=complex)
    v = f.evaluate(z_arr)
    bad = ~np.isfinite(v)
    if np.any(bad):
        lv = f.log_evaluate(z_arr)
        if np.any(bad & np.isfinite(lv.real)):
            raise EvalOverflow(f"|{f}| exceeds the binary64 range at {z}; use log_evaluate")
        raise SingularPoint(f"{f} is singular at {z}")
    return complex(v) if v.ndim == 0 else v


def log_abs(f: Expr, z):
    """log|f(z)| through the log channel."""
    return np.real(f.log_evaluate(z))


def logderiv(f: Expr, z):
    """f'/f evaluated through the log channel (overflow safe)."""
    df = differentiate(f)
    with np.errstate(all="ignore"):
        return np.exp(df.log_evaluate(z) - f.log_evaluate(z))
