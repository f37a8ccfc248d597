"""A small expression language for bounded symbols on a ball.

The grammar (whitespace insensitive)::

    expr    := ['-'] term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := atom ['^' uint]
    atom    := number | 'i' | coord | 'r' uint | func '(' expr ')' | '(' expr ')'
    coord   := 'z' [uint] | 'zc' [uint]
    func    := 're' | 'im' | 'conj' | 'abs2' | 'sqrt'
    product := 'prod(' 'a' '=' expr ',' 'c' '=' expr ')'

``z<i>`` indexes ball coordinates starting at 1; ``zc<i>`` indexes the
second coordinate block (offset by the split point on the full ball, no
offset on the z''-ball itself).  Bare ``z`` and ``zc`` denote the whole
tuple and are only meaningful under ``abs2``.  ``r<j>`` is the modulus of
the j-th coordinate group under a declared partition; it is also the
natural variable for profiles living on the set of group radii.

ASTs are immutable; evaluation is vectorized over arrays of points.
"""

from __future__ import annotations

import math
import re as _re
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import BallGeometry
from .errors import DomainError

_BOUNDARY_SLACK = 1e-12


class SymbolSyntaxError(DomainError):
    """Parse failure with a 1-based source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Const:
    value: complex
    pos: Tuple[int, int] = field(default=(1, 1), compare=False)


@dataclass(frozen=True)
class Coord:
    part: str  # "z" or "zc"
    index: Optional[int]  # 1-based, None for the whole tuple
    pos: Tuple[int, int] = field(default=(1, 1), compare=False)


@dataclass(frozen=True)
class GroupRadius:
    group: int  # 1-based
    pos: Tuple[int, int] = field(default=(1, 1), compare=False)


@dataclass(frozen=True)
class Func:
    name: str  # re | im | conj | abs2 | sqrt
    arg: "SymbolExpr"
    pos: Tuple[int, int] = field(default=(1, 1), compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * /
    lhs: "SymbolExpr"
    rhs: "SymbolExpr"
    pos: Tuple[int, int] = field(default=(1, 1), compare=False)


@dataclass(frozen=True)
class Power:
    base: "SymbolExpr"
    exponent: int
    pos: Tuple[int, int] = field(default=(1, 1), compare=False)


@dataclass(frozen=True)
class Neg:
    arg: "SymbolExpr"
    pos: Tuple[int, int] = field(default=(1, 1), compare=False)


SymbolExpr = Union[Const, Coord, GroupRadius, Func, BinOp, Power, Neg]


@dataclass(frozen=True)
class ProductSymbol:
    """f(z) = a(z' / sqrt(1 - |z''|^2)) * c(z'') on the full ball.

    A geometry is needed to evaluate or assemble the symbol; parsing
    without one still yields the AST for display and round-tripping.
    """

    a: SymbolExpr
    c: SymbolExpr
    geometry: Optional[BallGeometry]


@dataclass(frozen=True)
class SymbolClass:
    kind: str  # General | TorusInvariant | QuasiRadial | Radial | CzOnly | Product
    k: Optional[Tuple[int, ...]] = None

    def __str__(self) -> str:
        if self.kind == "QuasiRadial" and self.k is not None:
            return f"QuasiRadial{self.k}"
        return self.kind


# ---------------------------------------------------------------------------
# Tokenizer / parser

_FUNCS = ("re", "im", "conj", "abs2", "sqrt")


@dataclass
class _Token:
    kind: str  # num | name | op | end
    text: str
    line: int
    col: int


_NUM_RE = _re.compile(r"\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?")
_NAME_RE = _re.compile(r"[A-Za-z][A-Za-z0-9]*")


def _tokenize(text: str) -> List[_Token]:
    tokens: List[_Token] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch == "\n":
            line += 1
            pos += 1
            line_start = pos
            continue
        if ch.isspace():
            pos += 1
            continue
        col = pos - line_start + 1
        m = _NUM_RE.match(text, pos)
        if m:
            tokens.append(_Token("num", m.group(), line, col))
            pos = m.end()
            continue
        m = _NAME_RE.match(text, pos)
        if m:
            tokens.append(_Token("name", m.group(), line, col))
            pos = m.end()
            continue
        if ch in "-+*/^(),=":
            tokens.append(_Token("op", ch, line, col))
            pos += 1
            continue
        raise SymbolSyntaxError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("end", "", line, n - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: List[_Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> _Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != op:
            found = repr(tok.text) if tok.text else "end of input"
            raise SymbolSyntaxError(f"expected {op!r}, found {found}", tok.line, tok.col)
        return self.next()

    def parse_expr(self) -> SymbolExpr:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.next()
            node: SymbolExpr = Neg(self.parse_term(), pos=(tok.line, tok.col))
        else:
            node = self.parse_term()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "+-":
                self.next()
                rhs = self.parse_term()
                node = BinOp(tok.text, node, rhs, pos=(tok.line, tok.col))
            else:
                return node

    def parse_term(self) -> SymbolExpr:
        node = self.parse_factor()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "*/":
                self.next()
                rhs = self.parse_factor()
                node = BinOp(tok.text, node, rhs, pos=(tok.line, tok.col))
            else:
                return node

    def parse_factor(self) -> SymbolExpr:
        node = self.parse_atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.next()
            exp_tok = self.peek()
            if exp_tok.kind != "num" or not exp_tok.text.isdigit():
                raise SymbolSyntaxError(
                    "exponent must be a nonnegative integer", exp_tok.line, exp_tok.col
                )
            self.next()
            node = Power(node, int(exp_tok.text), pos=(tok.line, tok.col))
        return node

    def parse_atom(self) -> SymbolExpr:
        tok = self.peek()
        if tok.kind == "num":
            self.next()
            text = tok.text
            if _re.fullmatch(r"\d+", text):
                value: complex = complex(int(text))
            else:
                value = complex(float(text))
            return Const(value, pos=(tok.line, tok.col))
        if tok.kind == "name":
            return self.parse_name()
        if tok.kind == "op" and tok.text == "(":
            self.next()
            inner = self.parse_expr()
            self.expect_op(")")
            return inner
        found = repr(tok.text) if tok.text else "end of input"
        raise SymbolSyntaxError(f"expected a value, found {found}", tok.line, tok.col)

    def parse_name(self) -> SymbolExpr:
        tok = self.next()
        name = tok.text
        pos = (tok.line, tok.col)
        if name == "i":
            return Const(1j, pos=pos)
        if name in _FUNCS:
            self.expect_op("(")
            arg = self.parse_expr()
            self.expect_op(")")
            return Func(name, arg, pos=pos)
        m = _re.fullmatch(r"zc(\d*)", name)
        if m:
            idx = int(m.group(1)) if m.group(1) else None
            if idx == 0:
                raise SymbolSyntaxError("coordinate indices start at 1", *pos)
            return Coord("zc", idx, pos=pos)
        m = _re.fullmatch(r"z(\d*)", name)
        if m:
            idx = int(m.group(1)) if m.group(1) else None
            if idx == 0:
                raise SymbolSyntaxError("coordinate indices start at 1", *pos)
            return Coord("z", idx, pos=pos)
        m = _re.fullmatch(r"r(\d+)", name)
        if m:
            grp = int(m.group(1))
            if grp == 0:
                raise SymbolSyntaxError("group indices start at 1", *pos)
            return GroupRadius(grp, pos=pos)
        raise SymbolSyntaxError(f"unknown identifier {name!r}", *pos)


def parse_symbol(
    text: str, geometry: Optional[BallGeometry] = None
) -> Union[SymbolExpr, ProductSymbol]:
    """Parse a symbol, returning a ProductSymbol for prod(a=..., c=...).

    When a geometry is supplied, coordinate and group indices are checked
    against it (z against n, zc against n - ell, r against the partition).
    """
    tokens = _tokenize(text)
    parser = _Parser(tokens)
    first = parser.peek()
    if first.kind == "name" and first.text == "prod":
        if geometry is not None and geometry.d_inner < 1:
            raise DomainError("a product symbol needs a nonempty second block")
        parser.next()
        parser.expect_op("(")
        key = parser.next()
        if not (key.kind == "name" and key.text == "a"):
            raise SymbolSyntaxError("expected 'a ='", key.line, key.col)
        parser.expect_op("=")
        a = parser.parse_expr()
        parser.expect_op(",")
        key = parser.next()
        if not (key.kind == "name" and key.text == "c"):
            raise SymbolSyntaxError("expected 'c ='", key.line, key.col)
        parser.expect_op("=")
        c = parser.parse_expr()
        parser.expect_op(")")
        tail = parser.peek()
        if tail.kind != "end":
            raise SymbolSyntaxError(
                f"unexpected trailing input {tail.text!r}", tail.line, tail.col
            )
        if geometry is not None:
            _validate(a, dim=geometry.ell, geometry=geometry, allow_radius=True)
            _validate(c, dim=geometry.d_inner, geometry=None, allow_radius=False)
        else:
            _validate(a, dim=None, geometry=None, allow_radius=True)
            _validate(c, dim=None, geometry=None, allow_radius=False)
        return ProductSymbol(a=a, c=c, geometry=geometry)
    expr = parser.parse_expr()
    tail = parser.peek()
    if tail.kind != "end":
        raise SymbolSyntaxError(
            f"unexpected trailing input {tail.text!r}", tail.line, tail.col
        )
    if geometry is not None:
        _validate(expr, dim=geometry.n, geometry=geometry, allow_radius=True)
    return expr


def _validate(
    expr: SymbolExpr,
    dim: Optional[int],
    geometry: Optional[BallGeometry],
    allow_radius: bool,
) -> None:
    """Range-check coordinate and group indices against a dimension.

    ``dim=None`` skips the range checks but keeps the structural ones
    (radius placement), for parsing without a geometry.
    """

    def walk(node: SymbolExpr) -> None:
        if isinstance(node, Coord):
            if node.index is not None:
                limit = dim
                if node.part == "zc" and geometry is not None:
                    limit = geometry.d_inner
                if limit is not None and node.index > limit:
                    raise SymbolSyntaxError(
                        f"coordinate {node.part}{node.index} exceeds dimension {limit}",
                        *node.pos,
                    )
        elif isinstance(node, GroupRadius):
            if not allow_radius:
                raise SymbolSyntaxError(
                    "group radius is not available for this symbol", *node.pos
                )
            if geometry is not None and node.group > geometry.m:
                raise SymbolSyntaxError(
                    f"group r{node.group} exceeds the partition size {geometry.m}",
                    *node.pos,
                )
        elif isinstance(node, Func):
            walk(node.arg)
        elif isinstance(node, Neg):
            walk(node.arg)
        elif isinstance(node, BinOp):
            walk(node.lhs)
            walk(node.rhs)
        elif isinstance(node, Power):
            walk(node.base)

    walk(expr)


# ---------------------------------------------------------------------------
# Canonical printer

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 1, "^": 3}


def _print(node: SymbolExpr, parent_prec: int, right_side: bool) -> str:
    if isinstance(node, Const):
        v = node.value
        if v == 1j:
            s, prec = "i", 4
        elif v.imag == 0.0:
            x = v.real
            s = str(int(x)) if x == int(x) and abs(x) < 1e15 else repr(x)
            prec = 4 if x >= 0 else 1
        else:
            s = f"{_print(Const(complex(v.real)), 0, False)} + {_print(Const(complex(v.imag)), 2, False)}*i"
            prec = 1
        return f"({s})" if prec < parent_prec or (prec == parent_prec and right_side) else s
    if isinstance(node, Coord):
        return f"{node.part}{node.index if node.index is not None else ''}"
    if isinstance(node, GroupRadius):
        return f"r{node.group}"
    if isinstance(node, Func):
        return f"{node.name}({_print(node.arg, 0, False)})"
    if isinstance(node, Neg):
        inner = _print(node.arg, 2, False)
        s = f"-{inner}"
        return f"({s})" if parent_prec >= 2 or right_side else s
    if isinstance(node, Power):
        s = f"{_print(node.base, 4, False)}^{node.exponent}"
        return f"({s})" if parent_prec > 3 else s
    if isinstance(node, BinOp):
        prec = _PRECEDENCE[node.op]
        lhs = _print(node.lhs, prec, False)
        rhs = _print(node.rhs, prec, True)
        s = f"{lhs} {node.op} {rhs}"
        # Equal precedence on the right needs parentheses: the grammar is
        # left associative, so "a - (b - c)" must not round-trip to "a - b - c".
        return f"({s})" if prec < parent_prec or (prec == parent_prec and right_side) else s
    raise TypeError(f"unexpected node {node!r}")


def symbol_to_text(expr: Union[SymbolExpr, ProductSymbol]) -> str:
    """Canonical text form; parsing it back gives a structurally equal AST."""
    if isinstance(expr, ProductSymbol):
        return f"prod(a = {_print(expr.a, 0, False)}, c = {_print(expr.c, 0, False)})"
    return _print(expr, 0, False)


# ---------------------------------------------------------------------------
# Evaluation


@dataclass
class _EvalContext:
    z: Optional[np.ndarray]  # (..., d) complex, or None for pure profiles
    r: Optional[np.ndarray]  # (..., m) real group radii, or None
    zc_offset: int = 0
    k: Optional[Tuple[int, ...]] = None

    def coord(self, part: str, index: int, pos: Tuple[int, int]) -> np.ndarray:
        if self.z is None:
            raise DomainError(
                f"line {pos[0]}, column {pos[1]}: coordinates are not available "
                "on a radial-profile domain"
            )
        offset = self.zc_offset if part == "zc" else 0
        axis = offset + index - 1
        if axis >= self.z.shape[-1]:
            raise DomainError(
                f"line {pos[0]}, column {pos[1]}: coordinate {part}{index} "
                f"exceeds dimension {self.z.shape[-1] - offset}"
            )
        return self.z[..., axis]

    def tuple_abs2(self, part: Optional[str]) -> np.ndarray:
        if self.z is None:
            if self.r is None:
                raise DomainError("no point data to evaluate abs2 against")
            return np.sum(self.r * self.r, axis=-1)
        if part == "zc" and self.zc_offset > 0:
            block = self.z[..., self.zc_offset :]
        else:
            block = self.z
        return np.sum(np.abs(block) ** 2, axis=-1)

    def radius(self, group: int, pos: Tuple[int, int]) -> np.ndarray:
        if self.r is not None:
            if group > self.r.shape[-1]:
                raise DomainError(
                    f"line {pos[0]}, column {pos[1]}: group r{group} exceeds "
                    f"the profile dimension {self.r.shape[-1]}"
                )
            return self.r[..., group - 1]
        if self.z is None or self.k is None:
            raise DomainError(
                f"line {pos[0]}, column {pos[1]}: r{group} needs a declared partition"
            )
        if group > len(self.k):
            raise DomainError(
                f"line {pos[0]}, column {pos[1]}: group r{group} exceeds "
                f"the partition size {len(self.k)}"
            )
        start = sum(self.k[: group - 1])
        stop = start + self.k[group - 1]
        return np.sqrt(np.sum(np.abs(self.z[..., start:stop]) ** 2, axis=-1))


def _eval(node: SymbolExpr, ctx: _EvalContext) -> np.ndarray:
    if isinstance(node, Const):
        return np.asarray(node.value)
    if isinstance(node, Coord):
        if node.index is None:
            raise DomainError(
                f"line {node.pos[0]}, column {node.pos[1]}: bare {node.part!r} "
                "is only valid inside abs2(...)"
            )
        return ctx.coord(node.part, node.index, node.pos)
    if isinstance(node, GroupRadius):
        return ctx.radius(node.group, node.pos).astype(complex)
    if isinstance(node, Neg):
        return -_eval(node.arg, ctx)
    if isinstance(node, Func):
        if node.name == "abs2":
            arg = node.arg
            if isinstance(arg, Coord) and arg.index is None:
                return ctx.tuple_abs2(arg.part).astype(complex)
            v = _eval(arg, ctx)
            return (np.abs(v) ** 2).astype(complex)
        v = _eval(node.arg, ctx)
        if node.name == "re":
            return np.real(v).astype(complex)
        if node.name == "im":
            return np.imag(v).astype(complex)
        if node.name == "conj":
            return np.conj(v)
        if node.name == "sqrt":
            real = np.real(v)
            if np.any(np.abs(np.imag(v)) > 1e-10) or np.any(real < -1e-12):
                raise DomainError(
                    f"line {node.pos[0]}, column {node.pos[1]}: sqrt needs a "
                    "nonnegative real argument"
                )
            return np.sqrt(np.clip(real, 0.0, None)).astype(complex)
        raise AssertionError(f"unknown function {node.name}")
    if isinstance(node, Power):
        return _eval(node.base, ctx) ** node.exponent
    if isinstance(node, BinOp):
        lhs = _eval(node.lhs, ctx)
        rhs = _eval(node.rhs, ctx)
        if node.op == "+":
            return lhs + rhs
        if node.op == "-":
            return lhs - rhs
        if node.op == "*":
            return lhs * rhs
        with np.errstate(divide="ignore", invalid="ignore"):
            return lhs / rhs
    raise TypeError(f"unexpected node {node!r}")


def eval_on_points(
    expr: Union[SymbolExpr, ProductSymbol],
    z: np.ndarray,
    *,
    geometry: Optional[BallGeometry] = None,
    zc_offset: Optional[int] = None,
    check_ball: bool = True,
    allow_boundary: bool = False,
) -> np.ndarray:
    """Evaluate on an array of ball points of shape (..., d).

    ``zc_offset`` controls where zc-coordinates start; by default it is the
    geometry's split point (full-ball evaluation) or 0 without a geometry
    (evaluation directly on the z''-ball).
    """
    z = np.asarray(z, dtype=complex)
    if z.ndim == 1:
        z = z[None, :]
    if check_ball:
        t = np.sum(np.abs(z) ** 2, axis=-1)
        bad = t > 1.0 + _BOUNDARY_SLACK if allow_boundary else t >= 1.0
        if np.any(bad):
            idx = tuple(np.argwhere(bad)[0])
            raise DomainError(
                f"point {z[idx]} lies outside the closed unit ball"
                if allow_boundary
                else f"point {z[idx]} lies outside the open unit ball"
            )
    if isinstance(expr, ProductSymbol):
        geo = expr.geometry
        if geo is None:
            raise DomainError(
                "this product symbol was parsed without a geometry; "
                "reparse it with one to evaluate"
            )
        if z.shape[-1] != geo.n:
            raise DomainError(
                f"product symbol needs points in dimension {geo.n}, got {z.shape[-1]}"
            )
        z_in = z[..., geo.ell :]
        t_in = np.sum(np.abs(z_in) ** 2, axis=-1)
        stretch = np.sqrt(np.clip(1.0 - t_in, 0.0, None))
        with np.errstate(divide="ignore", invalid="ignore"):
            z_out = z[..., : geo.ell] / stretch[..., None]
        a_ctx = _EvalContext(z=z_out, r=None, zc_offset=0, k=geo.k)
        c_ctx = _EvalContext(z=z_in, r=None, zc_offset=0, k=None)
        return np.asarray(_eval(expr.a, a_ctx) * _eval(expr.c, c_ctx))
    if zc_offset is None:
        zc_offset = geometry.ell if geometry is not None else 0
    ctx = _EvalContext(
        z=z, r=None, zc_offset=zc_offset, k=geometry.k if geometry else None
    )
    out = _eval(expr, ctx)
    return np.broadcast_to(np.asarray(out), z.shape[:-1]).copy()


def eval_symbol(
    expr: Union[SymbolExpr, ProductSymbol],
    point: Sequence[complex],
    *,
    geometry: Optional[BallGeometry] = None,
    allow_boundary: bool = False,
) -> complex:
    """Evaluate at a single point of the open ball (closed if allowed)."""
    z = np.asarray(tuple(point), dtype=complex)
    values = eval_on_points(
        expr, z[None, :], geometry=geometry, allow_boundary=allow_boundary
    )
    return complex(values[0])


def eval_profile(expr: SymbolExpr, radii: np.ndarray) -> np.ndarray:
    """Evaluate a quasi-radial profile on group-radius tuples (..., m)."""
    r = np.asarray(radii, dtype=float)
    if r.ndim == 1:
        r = r[:, None]
    ctx = _EvalContext(z=None, r=r, zc_offset=0, k=None)
    out = _eval(expr, ctx)
    return np.broadcast_to(np.asarray(out), r.shape[:-1]).copy()


# ---------------------------------------------------------------------------
# Classification


def _winding(node: SymbolExpr, geometry: BallGeometry) -> Optional[Tuple[int, ...]]:
    """Phase degree of the node under the per-group torus action on z'.

    Returns a vector of per-group winding numbers for phase-homogeneous
    expressions and None when homogeneity cannot be established; None means
    the symbol is treated as non-invariant (sound, not complete).
    """
    m = geometry.m
    zero = (0,) * m

    if isinstance(node, Const):
        return zero
    if isinstance(node, GroupRadius):
        return zero
    if isinstance(node, Coord):
        if node.index is None:
            # Whole-tuple coordinates only appear under abs2, handled there.
            return None
        axis = node.index - 1 if node.part == "z" else geometry.ell + node.index - 1
        if axis >= geometry.ell:
            return zero
        out = [0] * m
        out[geometry.group_of(axis)] = 1
        return tuple(out)
    if isinstance(node, Neg):
        return _winding(node.arg, geometry)
    if isinstance(node, Func):
        if node.name == "abs2":
            arg = node.arg
            if isinstance(arg, Coord) and arg.index is None:
                return zero
            w = _winding(arg, geometry)
            return zero if w is not None else None
        if node.name == "conj":
            w = _winding(node.arg, geometry)
            return tuple(-v for v in w) if w is not None else None
        # re, im and sqrt preserve invariance only for invariant arguments.
        w = _winding(node.arg, geometry)
        return zero if w == zero else None
    if isinstance(node, Power):
        w = _winding(node.base, geometry)
        if w is None:
            return None
        return tuple(node.exponent * v for v in w)
    if isinstance(node, BinOp):
        wl = _winding(node.lhs, geometry)
        wr = _winding(node.rhs, geometry)
        if wl is None or wr is None:
            return None
        if node.op == "*":
            return tuple(a + b for a, b in zip(wl, wr))
        if node.op == "/":
            return tuple(a - b for a, b in zip(wl, wr))
        return wl if wl == wr else None
    raise TypeError(f"unexpected node {node!r}")


def _node_census(node: SymbolExpr, acc: dict) -> None:
    if isinstance(node, Coord):
        if node.index is None:
            acc["full_z" if node.part == "z" else "full_zc"] = True
        else:
            acc["coords"].add((node.part, node.index))
    elif isinstance(node, GroupRadius):
        acc["radii"].add(node.group)
    elif isinstance(node, Func):
        if node.name == "abs2" and isinstance(node.arg, Coord) and node.arg.index is None:
            acc["full_z" if node.arg.part == "z" else "full_zc"] = True
        else:
            _node_census(node.arg, acc)
    elif isinstance(node, Neg):
        _node_census(node.arg, acc)
    elif isinstance(node, BinOp):
        _node_census(node.lhs, acc)
        _node_census(node.rhs, acc)
    elif isinstance(node, Power):
        _node_census(node.base, acc)


def classify_symbol(
    expr: Union[SymbolExpr, ProductSymbol],
    geometry: Optional[BallGeometry] = None,
) -> SymbolClass:
    """Syntactic classification of a symbol.

    The verdict is sound but not complete: every QuasiRadial or
    TorusInvariant answer implies true invariance under the group torus
    action, while a disguised invariant expression may come back General.
    """
    if isinstance(expr, ProductSymbol):
        geo = expr.geometry if expr.geometry is not None else geometry
        return SymbolClass("Product", k=geo.k if geo is not None else None)

    acc: dict = {"coords": set(), "radii": set(), "full_z": False, "full_zc": False}
    _node_census(expr, acc)
    uses_coords = bool(acc["coords"])
    uses_radii = bool(acc["radii"])
    k = geometry.k if geometry is not None else None

    if not uses_coords and not acc["full_zc"]:
        # Only group radii, |z|^2 and constants.
        if not uses_radii:
            return SymbolClass("Radial", k=k)
        if geometry is None or geometry.m == 1:
            if acc["full_z"]:
                return SymbolClass("QuasiRadial", k=k)
            return SymbolClass("Radial", k=k) if (k is not None and len(k) == 1) else SymbolClass("QuasiRadial", k=k)
        return SymbolClass("QuasiRadial", k=k)

    if geometry is not None:
        inner_only = not acc["full_z"] and not uses_radii and all(
            (part == "zc") or (idx > geometry.ell)
            for part, idx in acc["coords"]
        )
        if inner_only:
            return SymbolClass("CzOnly", k=k)
        w = _winding(expr, geometry)
        if w == (0,) * geometry.m:
            return SymbolClass("TorusInvariant", k=k)
    return SymbolClass("General", k=k)


def radial_profile(
    expr: SymbolExpr,
) -> Optional[Callable[[np.ndarray], np.ndarray]]:
    """Interpret the symbol as a function of t = |z|^2 on its own ball.

    Returns a vectorized profile a(t) when the expression uses only
    abs2(z) of the full tuple, r1 with a single-group partition, and
    constants; otherwise None.
    """
    acc: dict = {"coords": set(), "radii": set(), "full_z": False, "full_zc": False}
    _node_census(expr, acc)
    if acc["coords"] or acc["full_zc"]:
        return None
    if acc["radii"] and acc["radii"] != {1}:
        return None

    def profile(t: np.ndarray) -> np.ndarray:
        t_arr = np.asarray(t, dtype=float)
        r = np.sqrt(np.clip(t_arr, 0.0, None))[..., None]
        ctx = _EvalContext(z=None, r=r, zc_offset=0, k=None)
        out = _eval(expr, ctx)
        return np.broadcast_to(np.asarray(out), t_arr.shape).copy()

    return profile


def quasi_radial_profile(
    expr: SymbolExpr, m: int
) -> Optional[Callable[[np.ndarray], np.ndarray]]:
    """Interpret the symbol as a profile a(r_1, ..., r_m), or None."""
    acc: dict = {"coords": set(), "radii": set(), "full_z": False, "full_zc": False}
    _node_census(expr, acc)
    if acc["coords"] or acc["full_zc"]:
        return None
    if any(g > m for g in acc["radii"]):
        return None

    def profile(radii: np.ndarray) -> np.ndarray:
        return eval_profile(expr, radii)

    return profile


def rebase_inner(expr: SymbolExpr) -> SymbolExpr:
    """Rename zc coordinates to plain z ones.

    On the z''-ball itself the two alias the same axes, so the renaming
    preserves values while letting the inner factor of a product symbol
    hit every single-ball fast path.
    """
    if isinstance(expr, Coord):
        if expr.part == "zc":
            return Coord("z", expr.index, pos=expr.pos)
        return expr
    if isinstance(expr, Func):
        return Func(expr.name, rebase_inner(expr.arg), pos=expr.pos)
    if isinstance(expr, Neg):
        return Neg(rebase_inner(expr.arg), pos=expr.pos)
    if isinstance(expr, BinOp):
        return BinOp(
            expr.op, rebase_inner(expr.lhs), rebase_inner(expr.rhs), pos=expr.pos
        )
    if isinstance(expr, Power):
        return Power(rebase_inner(expr.base), expr.exponent, pos=expr.pos)
    return expr


def symbol_degree_hint(expr: Union[SymbolExpr, ProductSymbol]) -> int:
    """Crude bound on the polynomial degree in (z, conj z), for quadrature
    order selection.  Division contributes its numerator only; rational
    symbols are handled by raising the order, not by exactness."""
    if isinstance(expr, ProductSymbol):
        return symbol_degree_hint(expr.a) + symbol_degree_hint(expr.c)
    if isinstance(expr, Const):
        return 0
    if isinstance(expr, Coord):
        return 1
    if isinstance(expr, GroupRadius):
        return 1
    if isinstance(expr, Neg):
        return symbol_degree_hint(expr.arg)
    if isinstance(expr, Func):
        if expr.name == "abs2":
            return 2 * max(1, symbol_degree_hint(expr.arg))
        return symbol_degree_hint(expr.arg)
    if isinstance(expr, Power):
        return expr.exponent * symbol_degree_hint(expr.base)
    if isinstance(expr, BinOp):
        if expr.op == "*":
            return symbol_degree_hint(expr.lhs) + symbol_degree_hint(expr.rhs)
        if expr.op == "/":
            return symbol_degree_hint(expr.lhs)
        return max(symbol_degree_hint(expr.lhs), symbol_degree_hint(expr.rhs))
    raise TypeError(f"unexpected node {expr!r}")
