"""Arithmetic equation templates: AST, parser, printers, evaluator.

The grammar (infix, left-associative except ``^`` which is right-associative):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-'? power
    power  := atom ('^' factor)?
    atom   := NUMBER | 'N'INT | '(' expr ')'

A leading ``x =`` / ``X =`` prefix is stripped before parsing.  Numbers are
nonnegative decimal literals and become exact rationals; negativity is always
expressed through the unary minus node, so a well-formed tree never carries a
negative literal.  Literal exponents must be integers in [-8, 8].
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Union

from .errors import (
    DivisionByZeroError,
    EmptyEquationError,
    EquationSyntaxError,
    LexError,
    NonIntegerExponentError,
    UnboundPlaceholderError,
)

MAX_LITERAL_EXPONENT = 8


@dataclass(frozen=True)
class Literal:
    value: Fraction


@dataclass(frozen=True)
class Placeholder:
    index: int


@dataclass(frozen=True)
class Unary:
    op: str  # only "neg"
    child: "Node"


@dataclass(frozen=True)
class Binary:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


Node = Union[Literal, Placeholder, Unary, Binary]

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<ph>N\d+)|(?P<op>[+\-*/^()])|(?P<bad>\S))"
)
_PREFIX_RE = re.compile(r"^\s*[xX]\s*=\s*")


def _lex(s: str) -> list[tuple[str, object]]:
    tokens: list[tuple[str, object]] = []
    pos = 0
    while pos < len(s):
        m = _TOKEN_RE.match(s, pos)
        if m is None:  # only trailing whitespace left
            break
        if m.group("bad"):
            raise LexError(f"unknown token {m.group('bad')!r} at position {m.start('bad')}")
        if m.group("num"):
            tokens.append(("num", Fraction(m.group("num"))))
        elif m.group("ph"):
            tokens.append(("ph", int(m.group("ph")[1:])))
        else:
            tokens.append(("op", m.group("op")))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, object]]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> tuple[str, object] | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> tuple[str, object]:
        tok = self.peek()
        if tok is None:
            raise EquationSyntaxError("unexpected end of input")
        self.pos += 1
        return tok

    def expr(self) -> Node:
        node = self.term()
        while (tok := self.peek()) in (("op", "+"), ("op", "-")):
            self.take()
            node = Binary(str(tok[1]), node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while (tok := self.peek()) in (("op", "*"), ("op", "/")):
            self.take()
            node = Binary(str(tok[1]), node, self.factor())
        return node

    def factor(self) -> Node:
        if self.peek() == ("op", "-"):
            self.take()
            return Unary("neg", self.power())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            exponent = self.factor()
            _check_literal_exponent(exponent)
            return Binary("^", base, exponent)
        return base

    def atom(self) -> Node:
        kind, value = self.take()
        if kind == "num":
            return Literal(value)  # type: ignore[arg-type]
        if kind == "ph":
            index = int(value)  # type: ignore[arg-type]
            if index < 1:
                raise EquationSyntaxError("placeholder indices start at N1")
            return Placeholder(index)
        if (kind, value) == ("op", "("):
            node = self.expr()
            if self.peek() != ("op", ")"):
                raise EquationSyntaxError("missing closing parenthesis")
            self.take()
            return node
        raise EquationSyntaxError(f"unexpected token {value!r}")


def _check_literal_exponent(exponent: Node) -> None:
    """Literal exponents (possibly negated) must be integers in [-8, 8]."""
    node = exponent
    if isinstance(node, Unary):
        node = node.child
    if isinstance(node, Literal):
        if node.value.denominator != 1 or abs(node.value) > MAX_LITERAL_EXPONENT:
            raise EquationSyntaxError(
                f"literal exponent must be an integer in [-{MAX_LITERAL_EXPONENT}, {MAX_LITERAL_EXPONENT}]"
            )


def parse_equation(s: str) -> Node:
    """Parse an equation string into a template AST.

    Raises LexError, EquationSyntaxError or EmptyEquationError.
    """
    stripped = _PREFIX_RE.sub("", s)
    tokens = _lex(stripped)
    if not tokens:
        raise EmptyEquationError("empty equation")
    parser = _Parser(tokens)
    node = parser.expr()
    if parser.peek() is not None:
        raise EquationSyntaxError(f"trailing input at token {parser.peek()!r}")
    return node


# --- printing ---------------------------------------------------------------

def format_value(v: Fraction) -> str:
    """Render a rational as the shortest exact decimal string.

    Falls back to ``p/q`` for values with no finite decimal expansion; such
    literals cannot come out of the parser and are display-only.
    """
    if v.denominator == 1:
        return str(v.numerator)
    den = v.denominator
    twos = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    fives = 0
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{v.numerator}/{v.denominator}"
    digits = max(twos, fives)
    scaled = v * 10**digits
    text = str(abs(scaled.numerator)).rjust(digits + 1, "0")
    sign = "-" if v < 0 else ""
    return f"{sign}{text[:-digits]}.{text[-digits:]}"


def to_infix(node: Node) -> str:
    """Fully parenthesized infix form; parse(to_infix(a)) == a structurally."""
    if isinstance(node, Literal):
        return format_value(node.value)
    if isinstance(node, Placeholder):
        return f"N{node.index}"
    if isinstance(node, Unary):
        return f"(-{to_infix(node.child)})"
    return f"({to_infix(node.left)} {node.op} {to_infix(node.right)})"


_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}


def _prec(node: Node) -> int:
    if isinstance(node, Binary):
        return _PRECEDENCE[node.op]
    if isinstance(node, Unary):
        return 2  # binds like a term: -a * b reparses as (-a) * b
    return 9


def to_pretty_infix(node: Node) -> str:
    """Minimal-parentheses infix form; still structurally round-trips."""
    if isinstance(node, (Literal, Placeholder)):
        return to_infix(node)
    if isinstance(node, Unary):
        child = node.child
        inner = to_pretty_infix(child)
        # grammar: factor := '-'? power, so only atoms and ^ may stay bare
        if isinstance(child, (Literal, Placeholder)) or (
            isinstance(child, Binary) and child.op == "^"
        ):
            return f"-{inner}"
        return f"-({inner})"
    prec = _PRECEDENCE[node.op]
    left, right = to_pretty_infix(node.left), to_pretty_infix(node.right)
    if node.op == "^":
        # right-associative: parenthesize the left side on ties
        if _prec(node.left) <= prec:
            left = f"({left})"
        if _prec(node.right) < prec:
            right = f"({right})"
    else:
        if _prec(node.left) < prec:
            left = f"({left})"
        # left-associative: a same-precedence right child needs parens
        if _prec(node.right) <= prec:
            right = f"({right})"
    return f"{left} {node.op} {right}"


# --- evaluation -------------------------------------------------------------

def evaluate(node: Node, bindings: Mapping[int, Fraction]) -> Fraction:
    """Evaluate a template under placeholder bindings, exactly.

    Raises UnboundPlaceholderError, DivisionByZeroError or
    NonIntegerExponentError.
    """
    if isinstance(node, Literal):
        return node.value
    if isinstance(node, Placeholder):
        try:
            return Fraction(bindings[node.index])
        except KeyError:
            raise UnboundPlaceholderError(f"no binding for N{node.index}") from None
    if isinstance(node, Unary):
        return -evaluate(node.child, bindings)
    left = evaluate(node.left, bindings)
    right = evaluate(node.right, bindings)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        if right == 0:
            raise DivisionByZeroError("division by zero")
        return left / right
    if node.op == "^":
        if right.denominator != 1:
            raise NonIntegerExponentError(f"exponent {right} is not an integer")
        if left == 0 and right < 0:
            raise DivisionByZeroError("zero raised to a negative power")
        return left ** int(right)
    raise AssertionError(f"unknown operator {node.op!r}")


# --- canonical form ---------------------------------------------------------

def _flatten(node: Node, op: str) -> list[Node]:
    if isinstance(node, Binary) and node.op == op:
        return _flatten(node.left, op) + _flatten(node.right, op)
    return [node]


def _operand_key(node: Node) -> tuple:
    # placeholders first (by index), then literals (by value), then compounds
    if isinstance(node, Placeholder):
        return (0, node.index)
    if isinstance(node, Literal):
        return (1, node.value)
    return (2, canonical_template(node))


def canonical_template(node: Node) -> str:
    """Prefix-form string where commutative chains are flattened and sorted.

    ``N2 + N1`` and ``N1 + N2`` share a key; ``N1 - N2`` and ``N2 - N1`` do
    not.  Used as the structural half of a problem fingerprint.
    """
    if isinstance(node, Literal):
        if node.value.denominator == 1:
            return str(node.value.numerator)
        return f"{node.value.numerator}/{node.value.denominator}"
    if isinstance(node, Placeholder):
        return f"N{node.index}"
    if isinstance(node, Unary):
        return f"(neg {canonical_template(node.child)})"
    if node.op in ("+", "*"):
        operands = sorted(_flatten(node, node.op), key=_operand_key)
        return f"({node.op} " + " ".join(canonical_template(o) for o in operands) + ")"
    return f"({node.op} {canonical_template(node.left)} {canonical_template(node.right)})"


# --- inspection helpers -----------------------------------------------------

def walk(node: Node) -> Iterator[Node]:
    """Yield every subtree, parents before children, left before right."""
    yield node
    if isinstance(node, Unary):
        yield from walk(node.child)
    elif isinstance(node, Binary):
        yield from walk(node.left)
        yield from walk(node.right)


def placeholder_indices(node: Node) -> set[int]:
    return {n.index for n in walk(node) if isinstance(n, Placeholder)}


def max_placeholder(node: Node) -> int:
    indices = placeholder_indices(node)
    return max(indices) if indices else 0


def substitute_values(node: Node, values: Mapping[int, Fraction]) -> Node:
    """Replace bound placeholders with literal nodes."""
    if isinstance(node, Placeholder):
        if node.index in values:
            return Literal(Fraction(values[node.index]))
        return node
    if isinstance(node, Unary):
        return Unary(node.op, substitute_values(node.child, values))
    if isinstance(node, Binary):
        return Binary(
            node.op,
            substitute_values(node.left, values),
            substitute_values(node.right, values),
        )
    return node


def validate_template(node: Node) -> None:
    """Check structural invariants: nonnegative literals, index >= 1,
    literal exponents integral and small.  Raises EquationSyntaxError."""
    for sub in walk(node):
        if isinstance(sub, Literal) and sub.value < 0:
            raise EquationSyntaxError("negative literal; use unary minus")
        if isinstance(sub, Placeholder) and sub.index < 1:
            raise EquationSyntaxError("placeholder indices start at N1")
        if isinstance(sub, Binary) and sub.op == "^":
            _check_literal_exponent(sub.right)
