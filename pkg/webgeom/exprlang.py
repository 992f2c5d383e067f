"""Expression language for web definitions.

A web W(3,2,2) is given by a map z = f(x, y) with two components written in
a small arithmetic language over the base variables x1, x2, y1, y2::

    # affine group web
    name = affine group
    f1 = x1 * y1
    f2 = x1 * y2 + x2

Grammar (EBNF)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := atom ('^' integer)?
    atom   := number | variable | func '(' expr ')' | '(' expr ')' | '-' atom

Unary minus binds tighter than '^', so ``-x1^2`` is ``(-x1)^2``. Numeric
literals are exact rationals; a quotient of two literals folds into one
literal, so ``3/2`` is a single number.
"""

import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, NamedTuple, Optional, Union

from models.geometry import BasePoint
from webgeom.base.errors import (
    ArityError,
    ExprSyntaxError,
    NonIntegerExponentError,
    SingularEvaluationError,
    UnknownVariableError,
)

logger = logging.getLogger(__name__)

VARIABLES = ("x1", "x2", "y1", "y2")
FUNCTIONS = ("sin", "cos", "exp", "log")


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Pow, Call]


@dataclass(frozen=True)
class WebDefinition:
    """Parsed web map f = (f1, f2)."""
    f1: Expr
    f2: Expr
    name: Optional[str] = None

    @property
    def components(self) -> tuple:
        return (self.f1, self.f2)


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)

_POINT_NUMBER_RE = re.compile(r"^[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?$")


def tokenize(text: str, line: int = 1, column_offset: int = 0) -> List[Token]:
    """Split expression text into tokens.

    Args:
        text: Expression source
        line: Line number reported in errors
        column_offset: Column of the first character of ``text`` minus one

    Returns:
        Token list terminated by an ``end`` token

    Raises:
        ExprSyntaxError: On a character that starts no token
    """
    tokens: List[Token] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            column = column_offset + pos + 1
            raise ExprSyntaxError(
                f"line {line}, column {column}: unexpected character {text[pos]!r}",
                {"line": line, "column": column, "expected": "token", "found": text[pos]}
            )
        kind = match.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, match.group(), line, column_offset + pos + 1))
        pos = match.end()
    tokens.append(Token("end", "", line, column_offset + len(text) + 1))
    return tokens


class _Parser:
    """Recursive-descent parser over a token list."""

    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def _advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def _error(self, expected: str) -> ExprSyntaxError:
        token = self.current
        found = token.text or "end of expression"
        return ExprSyntaxError(
            f"line {token.line}, column {token.column}: expected {expected}, found {found!r}",
            {"line": token.line, "column": token.column, "expected": expected, "found": found}
        )

    def _expect_op(self, text: str) -> Token:
        if self.current.kind == "op" and self.current.text == text:
            return self._advance()
        raise self._error(repr(text))

    def parse(self) -> Expr:
        expr = self.expr()
        if self.current.kind != "end":
            raise self._error("operator or end of expression")
        return expr

    def expr(self) -> Expr:
        node = self.term()
        while self.current.kind == "op" and self.current.text in "+-":
            op = self._advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.current.kind == "op" and self.current.text in "*/":
            op = self._advance().text
            right = self.factor()
            if op == "/" and isinstance(node, Num) and isinstance(right, Num) and right.value != 0:
                node = Num(node.value / right.value)
            else:
                node = BinOp(op, node, right)
        return node

    def factor(self) -> Expr:
        base = self.atom()
        if not (self.current.kind == "op" and self.current.text == "^"):
            return base
        self._advance()
        sign = 1
        if self.current.kind == "op" and self.current.text == "-":
            self._advance()
            sign = -1
        token = self.current
        if token.kind != "number" or not token.text.isdigit():
            found = token.text or "end of expression"
            raise NonIntegerExponentError(
                f"line {token.line}, column {token.column}: exponent must be an integer literal, found {found!r}",
                {"line": token.line, "column": token.column, "found": found}
            )
        self._advance()
        exponent = sign * int(token.text)
        if exponent < 0 and isinstance(base, Var):
            raise NonIntegerExponentError(
                f"line {token.line}, column {token.column}: negative exponent on variable "
                f"{base.name}; write 1/{base.name}^{-exponent}",
                {"line": token.line, "column": token.column, "found": str(exponent)}
            )
        return Pow(base, exponent)

    def atom(self) -> Expr:
        token = self.current
        if token.kind == "number":
            self._advance()
            return Num(Fraction(token.text))
        if token.kind == "name":
            self._advance()
            if token.text in FUNCTIONS:
                self._expect_op("(")
                arg = self.expr()
                self._expect_op(")")
                return Call(token.text, arg)
            if token.text in VARIABLES:
                return Var(token.text)
            if self.current.kind == "op" and self.current.text == "(":
                raise ExprSyntaxError(
                    f"line {token.line}, column {token.column}: unknown function {token.text!r}",
                    {"line": token.line, "column": token.column,
                     "expected": " | ".join(FUNCTIONS), "found": token.text}
                )
            raise UnknownVariableError(
                f"unknown variable {token.text!r} at line {token.line}, column {token.column}",
                {"line": token.line, "column": token.column, "variable": token.text}
            )
        if token.kind == "op" and token.text == "(":
            self._advance()
            node = self.expr()
            self._expect_op(")")
            return node
        if token.kind == "op" and token.text == "-":
            self._advance()
            return Neg(self.atom())
        raise self._error("number, variable, function or '('")


def parse_expr(text: str, line: int = 1, column_offset: int = 0) -> Expr:
    """Parse a single expression.

    Args:
        text: Expression source
        line: Line number for error messages
        column_offset: Column offset for error messages

    Returns:
        Expression AST
    """
    return _Parser(tokenize(text, line, column_offset)).parse()


def parse_web(text: str) -> WebDefinition:
    """Parse the contents of a web definition file.

    Args:
        text: File contents with ``f1 = ...`` and ``f2 = ...`` lines

    Returns:
        Parsed WebDefinition

    Raises:
        ExprSyntaxError: On malformed lines or missing components
        UnknownVariableError: On variables other than x1, x2, y1, y2
        NonIntegerExponentError: On non-integer exponents
    """
    fields: Dict[str, Expr] = {}
    name: Optional[str] = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        key, sep, rest = line.partition("=")
        key = key.strip()
        if not sep or key not in ("f1", "f2", "name"):
            column = len(line) - len(line.lstrip()) + 1
            raise ExprSyntaxError(
                f"line {line_no}, column {column}: expected 'f1 =', 'f2 =' or 'name =', "
                f"found {line.strip()!r}",
                {"line": line_no, "column": column, "expected": "f1 | f2 | name",
                 "found": line.strip()}
            )
        if key in fields or (key == "name" and name is not None):
            raise ExprSyntaxError(
                f"line {line_no}, column 1: duplicate definition of {key}",
                {"line": line_no, "column": 1, "expected": "single definition", "found": key}
            )
        if key == "name":
            name = rest.strip()
            continue
        offset = line.index("=") + 1
        fields[key] = parse_expr(rest, line=line_no, column_offset=offset)

    missing = [k for k in ("f1", "f2") if k not in fields]
    if missing:
        raise ExprSyntaxError(
            f"missing definition of {' and '.join(missing)}",
            {"expected": " and ".join(missing), "found": "end of file"}
        )

    web = WebDefinition(fields["f1"], fields["f2"], name)
    logger.debug(f"Parsed web {name or '<unnamed>'}: f1 = {to_text(web.f1)}, f2 = {to_text(web.f2)}")
    return web


def parse_point(text: str) -> BasePoint:
    """Parse a base point written as ``v1,v2,v3,v4`` in (x1, x2, y1, y2) order.

    Raises:
        ArityError: If there are not exactly four components
        ExprSyntaxError: If a component is not a decimal number
    """
    parts = [part.strip() for part in text.strip().split(",")]
    if len(parts) != 4:
        raise ArityError(
            f"point needs 4 components (x1,x2,y1,y2), got {len(parts)}",
            {"found": len(parts), "expected": 4}
        )
    values = []
    column = 1
    for part in parts:
        if not _POINT_NUMBER_RE.match(part):
            raise ExprSyntaxError(
                f"line 1, column {column}: expected decimal number, found {part!r}",
                {"line": 1, "column": column, "expected": "number", "found": part}
            )
        values.append(float(part))
        column += len(part) + 1
    return BasePoint.from_sequence(values)


def _wrap(expr: Expr) -> str:
    text = to_text(expr)
    if isinstance(expr, (Var, Call)):
        return text
    if isinstance(expr, Num) and expr.value.denominator == 1:
        return text
    return f"({text})"


def to_text(expr: Expr) -> str:
    """Pretty-print an expression so that it re-parses to the same AST."""
    if isinstance(expr, Num):
        value = expr.value
        if value.denominator == 1:
            return str(value.numerator)
        return f"({value.numerator}/{value.denominator})"
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Neg):
        return f"-{_wrap(expr.operand)}"
    if isinstance(expr, Pow):
        return f"{_wrap(expr.base)}^{expr.exponent}"
    if isinstance(expr, Call):
        return f"{expr.func}({to_text(expr.arg)})"
    # Neg and Pow bind tighter than any binary operator, so only BinOp children need parentheses.
    left = f"({to_text(expr.left)})" if isinstance(expr.left, BinOp) else to_text(expr.left)
    right = f"({to_text(expr.right)})" if isinstance(expr.right, BinOp) else to_text(expr.right)
    return f"{left} {expr.op} {right}"


def web_to_text(web: WebDefinition) -> str:
    """Render a web definition in file format."""
    lines = []
    if web.name:
        lines.append(f"name = {web.name}")
    lines.append(f"f1 = {to_text(web.f1)}")
    lines.append(f"f2 = {to_text(web.f2)}")
    return "\n".join(lines) + "\n"


def evaluate(expr: Expr, values: Mapping[str, float]) -> float:
    """Evaluate an expression in floating point.

    Args:
        expr: Expression AST
        values: Value of each base variable

    Returns:
        Float value

    Raises:
        SingularEvaluationError: On division by zero or log of a non-positive value
    """
    if isinstance(expr, Num):
        return float(expr.value)
    if isinstance(expr, Var):
        return float(values[expr.name])
    if isinstance(expr, Neg):
        return -evaluate(expr.operand, values)
    if isinstance(expr, Pow):
        base = evaluate(expr.base, values)
        if expr.exponent < 0 and base == 0.0:
            raise SingularEvaluationError(
                f"negative power of zero in {to_text(expr)}", {"subexpression": to_text(expr)}
            )
        return base ** expr.exponent
    if isinstance(expr, Call):
        arg = evaluate(expr.arg, values)
        if expr.func == "log":
            if arg <= 0.0:
                raise SingularEvaluationError(
                    f"log of non-positive value {arg!r} in {to_text(expr)}",
                    {"subexpression": to_text(expr), "value": arg}
                )
            return math.log(arg)
        return getattr(math, expr.func)(arg)
    left = evaluate(expr.left, values)
    right = evaluate(expr.right, values)
    if expr.op == "+":
        return left + right
    if expr.op == "-":
        return left - right
    if expr.op == "*":
        return left * right
    if right == 0.0:
        raise SingularEvaluationError(
            f"division by zero in {to_text(expr)}", {"subexpression": to_text(expr)}
        )
    return left / right


def point_values(point: BasePoint) -> Dict[str, float]:
    """Variable bindings for a base point."""
    return dict(zip(VARIABLES, point.as_tuple()))
