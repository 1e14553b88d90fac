"""Recursive-descent parser for the expression text grammar.

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?
    atom   := number ['i'] | 'i' | 'z' | 'pi' | 'e' | name '(' args ')' | '(' expr ')'

Function arguments are separated by ';' (``det`` uses ',' within a row and
';' between rows).  Parameters such as q, k, c must be constant expressions.
"""
from __future__ import annotations

import math
import re

from ..errors import ParseError
from . import nodes as N

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),;]))"
)


class _Tok:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"{self.kind}:{self.text}"


def _tokenize(src: str):
    toks = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        # track newlines swallowed by whitespace
        ws_end = pos
        while ws_end < len(src) and src[ws_end].isspace():
            if src[ws_end] == "\n":
                line += 1
                line_start = ws_end + 1
            ws_end += 1
        if ws_end >= len(src):
            break
        if m is None or m.end() <= ws_end:
            raise ParseError(f"unexpected character {src[ws_end]!r}", line, ws_end - line_start + 1)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), line, m.start(kind) - line_start + 1))
        pos = m.end()
    end_col = len(src) - line_start + 1
    toks.append(_Tok("end", "", line, end_col))
    return toks


def _const_value(e: N.Expr, what: str, tok) -> complex:
    if e.has_z:
        raise ParseError(f"{what} must be a constant", tok.line, tok.col)
    v = complex(e.evaluate(0))
    if not math.isfinite(v.real) or not math.isfinite(v.imag):
        raise ParseError(f"{what} is not finite", tok.line, tok.col)
    return v


class _Parser:
    def __init__(self, src: str):
        self.toks = _tokenize(src)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def _err(self, msg, tok=None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def _eat(self, text=None, kind=None):
        t = self.tok
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = repr(text) if text is not None else kind
            got = repr(t.text) if t.kind != "end" else "end of input"
            raise self._err(f"expected {want}, got {got}")
        self.i += 1
        return t

    def parse(self):
        e = self.expr()
        if self.tok.kind != "end":
            raise self._err(f"unexpected {self.tok.text!r}")
        return e

    def expr(self):
        e = self.term()
        while self.tok.text in ("+", "-"):
            op = self._eat().text
            rhs = self.term()
            e = N.add(e, rhs) if op == "+" else N.sub(e, rhs)
        return e

    def term(self):
        e = self.unary()
        while self.tok.text in ("*", "/"):
            op = self._eat().text
            rhs = self.unary()
            e = N.mul(e, rhs) if op == "*" else N.div(e, rhs)
        return e

    def unary(self):
        if self.tok.text == "-":
            self._eat()
            return N.neg(self.unary())
        if self.tok.text == "+":
            self._eat()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.text == "^":
            t = self._eat()
            ex = self.unary()
            if not ex.has_z:
                v = _const_value(ex, "exponent", t)
                if v.imag == 0 and v.real == round(v.real) and abs(v.real) < 1e6:
                    return N.ipow(base, int(round(v.real)))
            return N.exp(N.mul(ex, N.log(base)))
        return base

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self._eat()
            v = float(t.text)
            nxt = self.tok
            if nxt.kind == "name" and nxt.text == "i" and nxt.col == t.col + len(t.text) and nxt.line == t.line:
                self._eat()
                return N.Const(1j * v)
            return N.Const(v)
        if t.text == "(":
            self._eat()
            e = self.expr()
            self._eat(")")
            return e
        if t.kind == "name":
            self._eat()
            name = t.text
            if self.tok.text == "(":
                return self.call(name, t)
            if name == "z":
                return N.Z
            if name == "i":
                return N.Const(1j)
            if name == "pi":
                return N.Const(math.pi)
            if name == "e":
                return N.Const(math.e)
            raise self._err(f"unknown name {name!r}", t)
        got = repr(t.text) if t.kind != "end" else "end of input"
        raise self._err(f"unexpected {got}")

    def _args(self, seps=(";",)):
        """Parse '(' expr (sep expr)* ')' returning [(expr, token, sep)]."""
        self._eat("(")
        out = []
        while True:
            t = self.tok
            e = self.expr()
            out.append((e, t))
            if self.tok.text == ")":
                self._eat()
                return out
            if self.tok.text not in seps:
                raise self._err(f"expected {' or '.join(repr(s) for s in seps)} or ')'")
            out.append((None, self._eat()))

    def call(self, name, name_tok):
        unary = {"exp": N.exp, "log": N.log, "sin": N.sin, "cos": N.cos,
                 "gamma": N.gamma, "rgamma": N.rgamma}
        if name == "det":
            return self._det(name_tok)
        raw = self._args()
        args = [a for a in raw if a[0] is not None]

        def need(k):
            if len(args) != k:
                raise ParseError(f"{name} takes {k} argument(s), got {len(args)}", name_tok.line, name_tok.col)

        try:
            if name in unary:
                need(1)
                return unary[name](args[0][0])
            if name in ("sn", "cn", "dn"):
                need(2)
                k = _const_value(args[1][0], "elliptic modulus", args[1][1])
                if k.imag != 0 or not 0 < k.real < 1:
                    raise ParseError("elliptic modulus must be real in (0, 1)", args[1][1].line, args[1][1].col)
                return N.jacobi(name, args[0][0], k.real)
            if name in ("qgamma", "rqgamma", "prodq"):
                need(2)
                q = _const_value(args[0][0], "q", args[0][1])
                fn = {"qgamma": N.qgamma, "rqgamma": N.qgamma_recip, "prodq": N.prodq}[name]
                return fn(q, args[1][0])
            if name == "polygamma":
                need(2)
                n = _const_value(args[0][0], "polygamma order", args[0][1])
                if n.imag != 0 or n.real != int(n.real) or n.real < 0:
                    raise ParseError("polygamma order must be a nonnegative integer", args[0][1].line, args[0][1].col)
                return N.polygamma(int(n.real), args[1][0])
            if name == "qpolesum":
                need(3)
                rho = _const_value(args[0][0], "ratio", args[0][1])
                p = _const_value(args[1][0], "power", args[1][1])
                from .special import check_ratio
                return N.GeomPoleSum(args[2][0], params=(check_ratio(rho), int(p.real)))
            if name == "shift":
                need(2)
                return N.shift(args[0][0], _const_value(args[1][0], "shift", args[1][1]))
            if name == "rescale":
                need(2)
                return N.rescale(args[0][0], _const_value(args[1][0], "scale", args[1][1]))
        except ParseError:
            raise
        except (ValueError, ArithmeticError) as exc:
            raise ParseError(str(exc), name_tok.line, name_tok.col) from exc
        raise ParseError(f"unknown function {name!r}", name_tok.line, name_tok.col)

    def _det(self, name_tok):
        raw = self._args(seps=(",", ";"))
        rows, row = [], []
        for e, t in raw:
            if e is not None:
                row.append(e)
            elif t.text == ";":
                rows.append(row)
                row = []
        rows.append(row)
        if any(len(r) != len(rows) for r in rows):
            raise ParseError("det needs a square matrix", name_tok.line, name_tok.col)
        return N.det_node(rows)


def parse(src: str) -> N.Expr:
    """Parse expression text into an Expr; errors carry line and column."""
    if not isinstance(src, str):
        raise TypeError("expression source must be a string")
    return _Parser(src).parse()
