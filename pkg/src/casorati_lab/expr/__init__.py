"""Expression trees for meromorphic functions of one complex variable."""
from .nodes import (
    Z,
    Const,
    Det,
    Expr,
    Var,
    add,
    as_expr,
    const,
    cos,
    det_node,
    differentiate,
    div,
    eval_expr,
    exp,
    gamma,
    ipow,
    jacobi,
    log,
    log_abs,
    logderiv,
    mul,
    neg,
    polygamma,
    prodq,
    qgamma,
    qgamma_recip,
    rescale,
    rgamma,
    shift,
    sin,
    sn,
    sub,
    substitute,
)
from .parse import parse

# the operation is called ``eval`` in the interface description
eval = eval_expr  # noqa: A001

__all__ = [
    "Z", "Const", "Det", "Expr", "Var", "add", "as_expr", "const", "cos", "det_node",
    "differentiate", "div", "eval", "eval_expr", "exp", "gamma", "ipow", "jacobi", "log",
    "log_abs", "logderiv", "mul", "neg", "parse", "polygamma", "prodq", "qgamma",
    "qgamma_recip", "rescale", "rgamma", "shift", "sin", "sn", "sub", "substitute",
]
