"""Small arithmetic expression language with exact symbolic derivatives.

Carries the time-dependent coefficients b(t) and the Hamiltonians H(q, p, ...)
used throughout the package.  The language is deliberately tiny: real literals,
named variables, ``+ - * / ^``, unary minus, and the functions sin, cos, exp,
sqrt.  Exponents must be variable-free, which keeps differentiation total
while still expressing things like ``c/q^2`` or ``q^-3``.

Grammar (see docs/expression-grammar.md for the EBNF):

    sum     := product (('+' | '-') product)*
    product := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?        -- exponent folded to a constant
    atom    := NUMBER | NAME | NAME '(' sum ')' | '(' sum ')'

``^`` binds tighter than unary minus and is right-associative, so ``-x^2``
is ``-(x^2)`` and ``x^-2`` parses.  Derivatives are simplified only by
constant folding and identity elimination (0+x, 0*x, 1*x, x^1), so their
shape is predictable and serialization round-trips bit-for-bit.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Union

__all__ = [
    "Expression",
    "Const",
    "Var",
    "Neg",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Pow",
    "Call",
    "ParseError",
    "UnboundVariable",
    "DomainError",
    "FUNCTIONS",
    "parse",
    "evaluate",
    "differentiate",
    "serialize",
    "variables",
]

FUNCTIONS: Mapping[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "sqrt": math.sqrt,
}


class ParseError(ValueError):
    """Malformed expression text; ``column`` is 1-based."""

    def __init__(self, message: str, column: int):
        super().__init__(f"{message} (column {column})")
        self.column = column


class UnboundVariable(LookupError):
    """An expression was evaluated with a free variable left unbound."""

    def __init__(self, name: str):
        super().__init__(f"variable {name!r} is not bound")
        self.name = name


class DomainError(ArithmeticError):
    """Evaluation left the real domain (x/0, sqrt of a negative, ...)."""


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expression"


@dataclass(frozen=True)
class Add:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Sub:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Mul:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Div:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Pow:
    base: "Expression"
    exponent: float


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expression"


Expression = Union[Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call]


# ---------------------------------------------------------------------------
# tokenizer / parser
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
      (?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
    | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
    | (?P<op>[-+*/^()])
    | (?P<ws>\s+)
    | (?P<bad>.)
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        if kind == "ws":
            continue
        if kind == "bad":
            raise ParseError(f"unexpected character {m.group()!r}", m.start() + 1)
        tokens.append((kind, m.group(), m.start() + 1))
    tokens.append(("eof", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, str, int]]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str) -> None:
        kind, value, col = self.peek()
        if kind == "op" and value == op:
            self.advance()
            return
        raise ParseError(f"expected {op!r}", col)

    def at_op(self, *ops: str) -> bool:
        kind, value, _ = self.peek()
        return kind == "op" and value in ops

    def parse_sum(self) -> Expression:
        node = self.parse_product()
        while self.at_op("+", "-"):
            _, op, _ = self.advance()
            rhs = self.parse_product()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def parse_product(self) -> Expression:
        node = self.parse_unary()
        while self.at_op("*", "/"):
            _, op, _ = self.advance()
            rhs = self.parse_unary()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def parse_unary(self) -> Expression:
        if self.at_op("-"):
            self.advance()
            return Neg(self.parse_unary())
        return self.parse_power()

    def parse_power(self) -> Expression:
        base = self.parse_atom()
        if not self.at_op("^"):
            return base
        _, _, caret_col = self.advance()
        exp_start = self.pos
        exp_ast = self.parse_unary()
        free = variables(exp_ast)
        if free:
            col = caret_col
            for kind, value, c in self.tokens[exp_start:self.pos]:
                if kind == "name" and value in free:
                    col = c
                    break
            raise ParseError("exponent must be a constant", col)
        try:
            exponent = evaluate(exp_ast, {})
        except DomainError:
            raise ParseError("exponent is not a finite real", caret_col) from None
        if not math.isfinite(exponent):
            raise ParseError("exponent is not a finite real", caret_col)
        return Pow(base, exponent)

    def parse_atom(self) -> Expression:
        kind, value, col = self.peek()
        if kind == "num":
            self.advance()
            return Const(float(value))
        if kind == "name":
            self.advance()
            nk, nv, _ = self.peek()
            if nk == "op" and nv == "(":
                if value not in FUNCTIONS:
                    raise ParseError(f"unknown function {value!r}", col)
                self.advance()
                arg = self.parse_sum()
                self.expect_op(")")
                return Call(value, arg)
            if value in FUNCTIONS:
                raise ParseError(f"function {value!r} needs an argument list", col)
            return Var(value)
        if kind == "op" and value == "(":
            self.advance()
            node = self.parse_sum()
            self.expect_op(")")
            return node
        if kind == "eof":
            raise ParseError("unexpected end of input", col)
        raise ParseError(f"expected a value, got {value!r}", col)


def parse(text: str) -> Expression:
    """Parse expression text; raises :class:`ParseError` with a 1-based column."""
    parser = _Parser(_tokenize(text))
    node = parser.parse_sum()
    kind, value, col = parser.peek()
    if kind != "eof":
        raise ParseError(f"unexpected trailing input {value!r}", col)
    return node


def as_expression(source: "Expression | str") -> Expression:
    """Coerce a string to a parsed tree; expressions pass through unchanged."""
    return parse(source) if isinstance(source, str) else source


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def evaluate(e: Expression, env: Mapping[str, float]) -> float:
    """IEEE double evaluation of ``e`` with free variables bound by ``env``."""
    match e:
        case Const(value=v):
            return v
        case Var(name=name):
            try:
                return env[name]
            except KeyError:
                raise UnboundVariable(name) from None
        case Add(left=l, right=r):
            return evaluate(l, env) + evaluate(r, env)
        case Sub(left=l, right=r):
            return evaluate(l, env) - evaluate(r, env)
        case Mul(left=l, right=r):
            return evaluate(l, env) * evaluate(r, env)
        case Div(left=l, right=r):
            denom = evaluate(r, env)
            if denom == 0.0:
                raise DomainError("division by zero")
            return evaluate(l, env) / denom
        case Neg(arg=a):
            return -evaluate(a, env)
        case Pow(base=b, exponent=c):
            base = evaluate(b, env)
            try:
                return math.pow(base, c)
            except (ValueError, OverflowError) as err:
                raise DomainError(f"pow({base!r}, {c!r}) is undefined") from err
        case Call(func=f, arg=a):
            x = evaluate(a, env)
            try:
                return FUNCTIONS[f](x)
            except (ValueError, OverflowError) as err:
                raise DomainError(f"{f}({x!r}) is undefined") from err
    raise TypeError(f"not an expression node: {e!r}")


def variables(e: Expression) -> frozenset[str]:
    """Free variable names of ``e``."""
    match e:
        case Const():
            return frozenset()
        case Var(name=name):
            return frozenset((name,))
        case Neg(arg=a) | Call(arg=a) | Pow(base=a):
            return variables(a)
        case Add(left=l, right=r) | Sub(left=l, right=r) | Mul(left=l, right=r) | Div(left=l, right=r):
            return variables(l) | variables(r)
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# construction with constant folding / identity elimination
# ---------------------------------------------------------------------------

def _const(e: Expression) -> float | None:
    return e.value if isinstance(e, Const) else None


def fold_add(l: Expression, r: Expression) -> Expression:
    lv, rv = _const(l), _const(r)
    if lv is not None and rv is not None:
        return Const(lv + rv)
    if lv == 0.0:
        return r
    if rv == 0.0:
        return l
    return Add(l, r)


def fold_sub(l: Expression, r: Expression) -> Expression:
    lv, rv = _const(l), _const(r)
    if lv is not None and rv is not None:
        return Const(lv - rv)
    if rv == 0.0:
        return l
    if lv == 0.0:
        return fold_neg(r)
    return Sub(l, r)


def fold_neg(a: Expression) -> Expression:
    v = _const(a)
    if v is not None:
        return Const(-v)
    return Neg(a)


def fold_mul(l: Expression, r: Expression) -> Expression:
    lv, rv = _const(l), _const(r)
    if lv is not None and rv is not None:
        return Const(lv * rv)
    if lv == 0.0 or rv == 0.0:
        return Const(0.0)
    if lv == 1.0:
        return r
    if rv == 1.0:
        return l
    return Mul(l, r)


def fold_div(l: Expression, r: Expression) -> Expression:
    lv, rv = _const(l), _const(r)
    if lv is not None and rv is not None and rv != 0.0:
        return Const(lv / rv)
    if rv == 1.0:
        return l
    return Div(l, r)


def fold_pow(base: Expression, exponent: float) -> Expression:
    if exponent == 1.0:
        return base
    if exponent == 0.0:
        return Const(1.0)
    v = _const(base)
    if v is not None:
        try:
            return Const(math.pow(v, exponent))
        except (ValueError, OverflowError):
            pass  # leave the domain error for evaluation time
    return Pow(base, exponent)


def fold_call(func: str, arg: Expression) -> Expression:
    v = _const(arg)
    if v is not None:
        try:
            return Const(FUNCTIONS[func](v))
        except (ValueError, OverflowError):
            pass
    return Call(func, arg)


# ---------------------------------------------------------------------------
# differentiation
# ---------------------------------------------------------------------------

def differentiate(e: Expression, var: str) -> Expression:
    """Exact symbolic derivative of ``e`` with respect to ``var``."""
    match e:
        case Const():
            return Const(0.0)
        case Var(name=name):
            return Const(1.0 if name == var else 0.0)
        case Neg(arg=a):
            return fold_neg(differentiate(a, var))
        case Add(left=l, right=r):
            return fold_add(differentiate(l, var), differentiate(r, var))
        case Sub(left=l, right=r):
            return fold_sub(differentiate(l, var), differentiate(r, var))
        case Mul(left=l, right=r):
            return fold_add(
                fold_mul(differentiate(l, var), r),
                fold_mul(l, differentiate(r, var)),
            )
        case Div(left=l, right=r):
            num = fold_sub(
                fold_mul(differentiate(l, var), r),
                fold_mul(l, differentiate(r, var)),
            )
            return fold_div(num, fold_pow(r, 2.0))
        case Pow(base=b, exponent=c):
            outer = fold_mul(Const(c), fold_pow(b, c - 1.0))
            return fold_mul(outer, differentiate(b, var))
        case Call(func=f, arg=a):
            da = differentiate(a, var)
            if f == "sin":
                return fold_mul(fold_call("cos", a), da)
            if f == "cos":
                return fold_neg(fold_mul(fold_call("sin", a), da))
            if f == "exp":
                return fold_mul(e, da)
            if f == "sqrt":
                return fold_div(da, fold_mul(Const(2.0), e))
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _literal(v: float) -> str:
    if v < 0.0 or math.copysign(1.0, v) < 0.0:
        return f"(-{repr(-v)})"
    return repr(v)


def serialize(e: Expression) -> str:
    """Canonical fully-parenthesized text; re-parsing preserves values exactly."""
    match e:
        case Const(value=v):
            return _literal(v)
        case Var(name=name):
            return name
        case Neg(arg=a):
            return f"(-{serialize(a)})"
        case Add(left=l, right=r):
            return f"({serialize(l)} + {serialize(r)})"
        case Sub(left=l, right=r):
            return f"({serialize(l)} - {serialize(r)})"
        case Mul(left=l, right=r):
            return f"({serialize(l)} * {serialize(r)})"
        case Div(left=l, right=r):
            return f"({serialize(l)} / {serialize(r)})"
        case Pow(base=b, exponent=c):
            exp_text = repr(c) if not (c < 0.0 or math.copysign(1.0, c) < 0.0) else f"-{repr(-c)}"
            return f"({serialize(b)} ^ {exp_text})"
        case Call(func=f, arg=a):
            return f"{f}({serialize(a)})"
    raise TypeError(f"not an expression node: {e!r}")
