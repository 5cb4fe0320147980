"""A small expression language evaluated over jets.

Grammar (whitespace is insignificant)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right associative, constant exponent
    atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

Exponents must fold to a rational with denominator 1, 2 or 3.
"""

import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import jets
from .errors import ParseError, UnknownIdentifierError

FUNCTIONS = ("sin", "cos", "sinh", "cosh", "tanh", "exp", "log", "sqrt", "arcsin", "arctan")
CONSTANTS = {"pi": math.pi}
ALLOWED_DENOMINATORS = (1, 2, 3)


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: Fraction


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(src):
    tokens = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            bad = pos + len(src[pos:]) - len(src[pos:].lstrip())
            raise ParseError(f"unexpected character {src[bad]!r}", bad)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src, variables):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0
        self.variables = None if variables is None else set(variables)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, op):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != op:
            raise ParseError(f"expected {op!r}", tok[2])
        return self.take()

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected token {tok[1]!r}", tok[2])
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.take()
            at = self.peek()[2]
            exponent = _fold_rational(self.unary(), at)
            if exponent.denominator not in ALLOWED_DENOMINATORS:
                raise ParseError(
                    f"exponent {exponent} has denominator outside {ALLOWED_DENOMINATORS}", at
                )
            return Pow(base, exponent)
        return base

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if self.peek()[0] == "op" and self.peek()[1] == "(":
                if text not in FUNCTIONS:
                    raise ParseError(f"unknown function {text!r}", pos)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            if text in FUNCTIONS:
                raise ParseError(f"function {text!r} needs an argument", pos)
            if text in CONSTANTS:
                return Const(text)
            if self.variables is not None and text not in self.variables:
                raise UnknownIdentifierError(text, pos, self.variables)
            return Var(text)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected token {text!r}", pos)


def _fold_rational(node, offset):
    if isinstance(node, Num):
        return Fraction(node.value)
    if isinstance(node, Neg):
        return -_fold_rational(node.operand, offset)
    if isinstance(node, BinOp):
        left = _fold_rational(node.left, offset)
        right = _fold_rational(node.right, offset)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if right == 0:
            raise ParseError("zero denominator in exponent", offset)
        return left / right
    if isinstance(node, Pow):
        base = _fold_rational(node.base, offset)
        if node.exponent.denominator != 1:
            raise ParseError("exponent must be rational", offset)
        return base ** int(node.exponent)
    raise ParseError("exponent must be a constant rational", offset)


def parse(src, variables=None):
    """Parse ``src`` into an immutable AST.

    When ``variables`` is given, any other identifier (apart from the
    functions and ``pi``) is rejected.
    """
    return _Parser(src, variables).parse()


def free_variables(node):
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, (Num, Const)):
        return set()
    if isinstance(node, Neg):
        return free_variables(node.operand)
    if isinstance(node, BinOp):
        return free_variables(node.left) | free_variables(node.right)
    if isinstance(node, Pow):
        return free_variables(node.base)
    if isinstance(node, Call):
        return free_variables(node.arg)
    raise TypeError(f"not an expression node: {node!r}")


def to_string(node):
    """Fully parenthesised source text; ``parse(to_string(e)) == e``."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_string(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_string(node.left)} {node.op} {to_string(node.right)})"
    if isinstance(node, Pow):
        e = node.exponent
        exp = f"({e.numerator}/{e.denominator})" if e.denominator != 1 else f"({e.numerator})"
        return f"({to_string(node.base)})^{exp}"
    if isinstance(node, Call):
        return f"{node.func}({to_string(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def eval_jet(node, env):
    """Evaluate over jets; ``env`` maps variable names to Jets or plain numbers."""
    proto = next((v for v in env.values() if isinstance(v, jets.Jet)), None)

    def lift(value):
        if proto is None:
            raise TypeError("eval_jet needs at least one Jet in env")
        return jets.Jet.constant(np.broadcast_to(value, proto.shape), proto.num_vars, proto.degree)

    def ev(n):
        if isinstance(n, Num):
            return lift(n.value)
        if isinstance(n, Const):
            return lift(CONSTANTS[n.name])
        if isinstance(n, Var):
            try:
                v = env[n.name]
            except KeyError:
                raise KeyError(f"variable {n.name!r} not bound") from None
            return v if isinstance(v, jets.Jet) else lift(v)
        if isinstance(n, Neg):
            return -ev(n.operand)
        if isinstance(n, BinOp):
            left, right = ev(n.left), ev(n.right)
            if n.op == "+":
                return left + right
            if n.op == "-":
                return left - right
            if n.op == "*":
                return left * right
            return left / right
        if isinstance(n, Pow):
            return jets.pow_const(ev(n.base), n.exponent)
        if isinstance(n, Call):
            return jets.ELEMENTARY[n.func](ev(n.arg))
        raise TypeError(f"not an expression node: {n!r}")

    return ev(node)


def eval_float(node, env):
    """Plain floating-point evaluation (used as a finite-difference oracle)."""

    def ev(n):
        if isinstance(n, Num):
            return n.value
        if isinstance(n, Const):
            return CONSTANTS[n.name]
        if isinstance(n, Var):
            return float(env[n.name])
        if isinstance(n, Neg):
            return -ev(n.operand)
        if isinstance(n, BinOp):
            left, right = ev(n.left), ev(n.right)
            if n.op == "+":
                return left + right
            if n.op == "-":
                return left - right
            if n.op == "*":
                return left * right
            return left / right
        if isinstance(n, Pow):
            return ev(n.base) ** float(n.exponent)
        if isinstance(n, Call):
            return getattr(math, {"arcsin": "asin", "arctan": "atan"}.get(n.func, n.func))(ev(n.arg))
        raise TypeError(f"not an expression node: {n!r}")

    return ev(node)
