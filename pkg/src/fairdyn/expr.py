"""Recursive-descent parser and evaluator for dynamics expressions.

Grammar (over the selection rates b0 and b1):

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '-' factor | power
    power   := atom ('^' factor)?          # right associative
    atom    := NUMBER | 'b0' | 'b1' | FUNC '(' expr (',' expr)* ')' | '(' expr ')'

Numbers are decimal or scientific literals. Available functions:
sin, cos, exp, abs (1 argument), min, max (2 arguments). Evaluation is a
pure fold over the tree, bit-reproducible on a given platform.
"""

from __future__ import annotations

import math
import re
from typing import Callable


class ExpressionError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ExpressionSyntaxError(ExpressionError):
    pass


class UnknownIdentifierError(ExpressionError):
    pass


class ArityError(ExpressionError):
    pass


_FUNCTIONS: dict[str, tuple[int, Callable[..., float]]] = {
    "sin": (1, math.sin),
    "cos": (1, math.cos),
    "exp": (1, math.exp),
    "abs": (1, abs),
    "min": (2, min),
    "max": (2, max),
}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            if source[pos:].strip() == "":
                break
            raise ExpressionSyntaxError(
                f"unexpected character {source[pos:].strip()[0]!r}", pos
            )
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "ident":
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> None:
        kind, value, pos = self.next()
        if kind != "op" or value != op:
            raise ExpressionSyntaxError(f"expected {op!r}, found {value or 'end'!r}", pos)

    def parse(self) -> Callable[[float, float], float]:
        fn = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected trailing {value!r}", pos)
        return fn

    def expr(self) -> Callable[[float, float], float]:
        fn = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.next()
                rhs = self.term()
                lhs = fn
                if value == "+":
                    fn = lambda b0, b1, l=lhs, r=rhs: l(b0, b1) + r(b0, b1)
                else:
                    fn = lambda b0, b1, l=lhs, r=rhs: l(b0, b1) - r(b0, b1)
            else:
                return fn

    def term(self) -> Callable[[float, float], float]:
        fn = self.factor()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.next()
                rhs = self.factor()
                lhs = fn
                if value == "*":
                    fn = lambda b0, b1, l=lhs, r=rhs: l(b0, b1) * r(b0, b1)
                else:
                    fn = lambda b0, b1, l=lhs, r=rhs: l(b0, b1) / r(b0, b1)
            else:
                return fn

    def factor(self) -> Callable[[float, float], float]:
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.next()
            inner = self.factor()
            return lambda b0, b1, f=inner: -f(b0, b1)
        return self.power()

    def power(self) -> Callable[[float, float], float]:
        base = self.atom()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.next()
            exponent = self.factor()
            return lambda b0, b1, b=base, e=exponent: b(b0, b1) ** e(b0, b1)
        return base

    def atom(self) -> Callable[[float, float], float]:
        kind, value, pos = self.next()
        if kind == "num":
            const = float(value)
            return lambda b0, b1, c=const: c
        if kind == "ident":
            nxt_kind, nxt_value, _ = self.peek()
            if nxt_kind == "op" and nxt_value == "(":
                if value not in _FUNCTIONS:
                    raise UnknownIdentifierError(f"unknown function {value!r}", pos)
                arity, impl = _FUNCTIONS[value]
                self.next()  # consume '('
                args = [self.expr()]
                while True:
                    kind2, value2, _ = self.peek()
                    if kind2 == "op" and value2 == ",":
                        self.next()
                        args.append(self.expr())
                    else:
                        break
                self.expect_op(")")
                if len(args) != arity:
                    raise ArityError(
                        f"{value} takes {arity} argument(s), got {len(args)}", pos
                    )
                if arity == 1:
                    arg = args[0]
                    return lambda b0, b1, f=impl, a=arg: f(a(b0, b1))
                a0, a1 = args
                return lambda b0, b1, f=impl, x=a0, y=a1: f(x(b0, b1), y(b0, b1))
            if value == "b0":
                return lambda b0, b1: b0
            if value == "b1":
                return lambda b0, b1: b1
            raise UnknownIdentifierError(f"unknown identifier {value!r}", pos)
        if kind == "op" and value == "(":
            fn = self.expr()
            self.expect_op(")")
            return fn
        raise ExpressionSyntaxError(f"unexpected {value or 'end'!r}", pos)


def compile_expression(source: str) -> Callable[[float, float], float]:
    """Compile a dynamics expression into a pure (b0, b1) -> float map."""
    return _Parser(source).parse()
