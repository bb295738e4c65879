# src/realizability/strainreal/fields/expressions.py
"""
Field expression mini-language

Grammar (whitespace insignificant):
    expr     := term (('+'|'-') term)*
    term     := factor (('*'|'/') factor)*
    factor   := ('+'|'-') factor | base ('^' exponent)?
    exponent := integer | '(' ['-'] integer ['/' integer] ')'
    base     := number | 'x' | 'y' | 'pi' | func '(' expr ')' | '(' expr ')'
    func     := 'sin' | 'cos' | 'exp' | 'log'

Expressions are held as sympy trees over two real symbols. Decimal literals
become exact rationals, so differentiation never rounds.
"""

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import numpy as np
import sympy

from ..errors import ExpressionSyntaxError, UnknownIdentifierError

X, Y = sympy.symbols("x y", real=True)

MAX_DERIVATIVE_ORDER = 6

_FUNCTIONS = {
    "sin": sympy.sin,
    "cos": sympy.cos,
    "exp": sympy.exp,
    "log": sympy.log,
}
_VARIABLES = {"x": X, "y": Y}

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        match = _TOKEN_RE.match(text, pos)
        if match is None or match.end() == pos:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = match.lastgroup
        start = match.start(kind)
        tokens.append(_Token(kind, match.group(kind), start))
        pos = match.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive descent over the token list; one method per grammar rule"""

    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def _advance(self) -> _Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _accept(self, op: str) -> bool:
        if self.current.kind == "op" and self.current.text == op:
            self.index += 1
            return True
        return False

    def _expect(self, op: str) -> None:
        if not self._accept(op):
            found = self.current.text or "end of input"
            raise ExpressionSyntaxError(f"expected {op!r}, found {found!r}", self.current.pos)

    def parse(self) -> sympy.Expr:
        if self.current.kind == "end":
            raise ExpressionSyntaxError("empty expression", 0)
        node = self.expr()
        if self.current.kind != "end":
            raise ExpressionSyntaxError(f"unexpected token {self.current.text!r}", self.current.pos)
        return node

    def expr(self) -> sympy.Expr:
        node = self.term()
        while True:
            if self._accept("+"):
                node = node + self.term()
            elif self._accept("-"):
                node = node - self.term()
            else:
                return node

    def term(self) -> sympy.Expr:
        node = self.factor()
        while True:
            if self._accept("*"):
                node = node * self.factor()
            elif self._accept("/"):
                pos = self.current.pos
                divisor = self.factor()
                if divisor == 0:
                    raise ExpressionSyntaxError("division by zero", pos)
                node = node / divisor
            else:
                return node

    def factor(self) -> sympy.Expr:
        if self._accept("+"):
            return self.factor()
        if self._accept("-"):
            return -self.factor()
        node = self.base()
        if self._accept("^"):
            node = node ** self.exponent()
        return node

    def exponent(self) -> sympy.Rational:
        if self.current.kind == "number":
            return self._integer()
        if self._accept("("):
            negative = self._accept("-")
            value = self._integer()
            if self._accept("/"):
                pos = self.current.pos
                denominator = self._integer()
                if denominator == 0:
                    raise ExpressionSyntaxError("zero denominator in exponent", pos)
                value = sympy.Rational(value, denominator)
            self._expect(")")
            return -value if negative else value
        raise ExpressionSyntaxError("exponent must be an integer or a parenthesised rational", self.current.pos)

    def _integer(self) -> sympy.Integer:
        token = self.current
        if token.kind != "number" or not token.text.isdigit():
            raise ExpressionSyntaxError(f"expected integer, found {token.text or 'end of input'!r}", token.pos)
        self._advance()
        return sympy.Integer(int(token.text))

    def base(self) -> sympy.Expr:
        token = self.current
        if token.kind == "number":
            self._advance()
            return sympy.Rational(token.text)
        if token.kind == "name":
            self._advance()
            if token.text in _VARIABLES:
                return _VARIABLES[token.text]
            if token.text == "pi":
                return sympy.pi
            if token.text in _FUNCTIONS:
                self._expect("(")
                argument = self.expr()
                self._expect(")")
                if token.text == "log" and argument.is_number and argument <= 0:
                    raise ExpressionSyntaxError("log of a non-positive constant", token.pos)
                return _FUNCTIONS[token.text](argument)
            raise UnknownIdentifierError(f"unknown identifier {token.text!r}", token.pos)
        if self._accept("("):
            node = self.expr()
            self._expect(")")
            return node
        found = token.text or "end of input"
        raise ExpressionSyntaxError(f"unexpected token {found!r}", token.pos)


def _wrap(node: sympy.Expr) -> str:
    text = to_text(node)
    if node.is_Symbol or (node.is_Integer and node >= 0) or node is sympy.pi:
        return text
    if text.startswith("(") and _balanced_outer(text):
        return text
    return f"({text})"


def _balanced_outer(text: str) -> bool:
    depth = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0 and i != len(text) - 1:
                return False
    return depth == 0


def _exponent_text(value: sympy.Rational) -> str:
    if value.is_Integer:
        return str(int(value))
    return f"({value.p}/{value.q})"


def to_text(node: sympy.Expr) -> str:
    """Print a tree back into the grammar accepted by parse_expression"""
    if node.is_Symbol:
        if node not in (X, Y):
            raise ValueError(f"symbol {node} is outside the field language")
        return str(node)
    if node is sympy.pi:
        return "pi"
    if node is sympy.E:
        return "exp(1)"
    if node.is_Integer:
        value = int(node)
        return str(value) if value >= 0 else f"({value})"
    if node.is_Rational:
        return f"({node.p}/{node.q})"
    if node.is_Float:
        return to_text(sympy.Rational(repr(float(node))))
    if node.is_Add:
        return "+".join(_wrap(arg) for arg in node.args)
    if node.is_Mul:
        return "*".join(_wrap(arg) for arg in node.args)
    if node.is_Pow:
        base, exponent = node.args
        if not exponent.is_Rational:
            raise ValueError(f"non-rational exponent in {node}")
        if exponent < 0:
            if exponent == -1:
                return f"1/{_wrap(base)}"
            return f"1/({_wrap(base)}^{_exponent_text(-exponent)})"
        return f"{_wrap(base)}^{_exponent_text(exponent)}"
    for name, func in _FUNCTIONS.items():
        if node.func == func:
            return f"{name}({to_text(node.args[0])})"
    raise ValueError(f"{type(node).__name__} is outside the field language")


@lru_cache(maxsize=512)
def _compiled(root: sympy.Expr):
    return sympy.lambdify((X, Y), root, "numpy")


def evaluate(root: sympy.Expr, x, y) -> np.ndarray:
    """Evaluate a tree on broadcastable numpy inputs, always returning a float array"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast_shapes(x.shape, y.shape)
    with np.errstate(all="ignore"):
        values = _compiled(root)(x, y)
    return np.array(np.broadcast_to(np.asarray(values, dtype=float), shape))


def differentiate(f: "ScalarFieldExpr", var: str, order: int = 1) -> "ScalarFieldExpr":
    if var not in _VARIABLES:
        raise ValueError(f"can only differentiate in x or y, got {var!r}")
    if not isinstance(order, (int, np.integer)) or not 1 <= order <= MAX_DERIVATIVE_ORDER:
        raise ValueError(f"derivative order must be in 1..{MAX_DERIVATIVE_ORDER}, got {order}")
    return ScalarFieldExpr(sympy.diff(f.root, _VARIABLES[var], int(order)), periodic=f.periodic)


FieldLike = Union["ScalarFieldExpr", sympy.Expr, int, float]


@dataclass(frozen=True)
class ScalarFieldExpr:
    root: sympy.Expr
    periodic: bool = field(default=False, compare=False)

    def __call__(self, x, y) -> np.ndarray:
        return evaluate(self.root, x, y)

    def diff(self, var: str, order: int = 1) -> "ScalarFieldExpr":
        return differentiate(self, var, order)

    @property
    def text(self) -> str:
        return to_text(self.root)

    @property
    def is_zero(self) -> bool:
        return self.root == 0

    def subs(self, x: sympy.Expr = X, y: sympy.Expr = Y) -> "ScalarFieldExpr":
        """Compose with a substitution of the coordinates (simultaneous)"""
        return ScalarFieldExpr(self.root.subs({X: x, Y: y}, simultaneous=True))

    def __add__(self, other: FieldLike) -> "ScalarFieldExpr":
        other = as_field(other)
        return ScalarFieldExpr(self.root + other.root, self.periodic and other.periodic)

    __radd__ = __add__

    def __sub__(self, other: FieldLike) -> "ScalarFieldExpr":
        other = as_field(other)
        return ScalarFieldExpr(self.root - other.root, self.periodic and other.periodic)

    def __rsub__(self, other: FieldLike) -> "ScalarFieldExpr":
        return as_field(other) - self

    def __mul__(self, other: FieldLike) -> "ScalarFieldExpr":
        other = as_field(other)
        return ScalarFieldExpr(self.root * other.root, self.periodic and other.periodic)

    __rmul__ = __mul__

    def __truediv__(self, other: FieldLike) -> "ScalarFieldExpr":
        other = as_field(other)
        return ScalarFieldExpr(self.root / other.root, self.periodic and other.periodic)

    def __rtruediv__(self, other: FieldLike) -> "ScalarFieldExpr":
        return as_field(other) / self

    def __neg__(self) -> "ScalarFieldExpr":
        return ScalarFieldExpr(-self.root, self.periodic)

    def __str__(self) -> str:
        return self.text


def as_field(value: FieldLike, periodic: bool = None) -> ScalarFieldExpr:
    if isinstance(value, ScalarFieldExpr):
        return value
    root = sympy.nsimplify(value) if isinstance(value, float) else sympy.sympify(value)
    if periodic is None:
        periodic = bool(root.is_number)
    return ScalarFieldExpr(root, periodic)


def parse_expression(text: str, periodic: bool = False) -> ScalarFieldExpr:
    """Parse a field expression; `periodic` declares 1-periodicity in x and y (never inferred)"""
    return ScalarFieldExpr(_Parser(text).parse(), periodic)
