"""Problem representation: number mapping, fingerprints, answer equivalence.

A raw word problem ("Tom has 3 apples and buys 2 more", "3 + 2") becomes a
MappedProblem whose text carries ordered placeholders N1..Nk and whose
equation is a template over those placeholders.  Mapping abstracts the
concrete values, so two problems that differ only in their numbers share a
fingerprint.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Union

from . import expr
from .errors import (
    EquationError,
    EvaluationError,
    InvalidProblemError,
    NoQuantitiesError,
    PlaceholderRangeError,
)

Numberish = Union[int, float, Fraction, str]

# standalone numbers: optional thousands commas, optional decimal part;
# not glued to letters/underscores ("4th" stays text) and not mid-number
_NUMBER_IN_TEXT = re.compile(
    r"(?<![A-Za-z0-9_.])(\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+(?:\.\d+)?)(?![A-Za-z0-9_])"
)
_PLACEHOLDER_TOKEN = re.compile(r"\bN(\d+)\b")
_TEXT_KEY_JUNK = re.compile(r"[^a-z0-9<> ]+")

ANSWER_TOLERANCE = Fraction(1, 10_000)


@dataclass(frozen=True)
class Quantity:
    index: int  # 1-based placeholder ordinal
    value: Fraction
    surface: str  # original text span


@dataclass(frozen=True)
class MappedProblem:
    id: str
    surface_text: str
    mapped_text: str
    quantities: tuple[Quantity, ...]
    template: expr.Node
    answer: Fraction
    source_tag: str = ""

    def bindings(self) -> dict[int, Fraction]:
        return {q.index: q.value for q in self.quantities}

    def with_id(self, new_id: str, source_tag: str | None = None) -> "MappedProblem":
        if source_tag is None:
            return replace(self, id=new_id)
        return replace(self, id=new_id, source_tag=source_tag)


@dataclass(frozen=True)
class Fingerprint:
    text_key: str
    template_key: str


def to_fraction(x: Numberish) -> Fraction:
    """Exact conversion; float input goes through its decimal repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(str(x).replace(",", ""))


def to_number(v: Fraction) -> int | float:
    """Rational -> JSON-friendly number (int when integral)."""
    if v.denominator == 1:
        return int(v)
    return float(v)


def answers_equal(a: Numberish, b: Numberish) -> bool:
    """Value equivalence: |a - b| <= 1e-4 * max(1, |a|, |b|).

    Symmetric by construction; exact rational arithmetic throughout.
    """
    fa, fb = to_fraction(a), to_fraction(b)
    scale = max(Fraction(1), abs(fa), abs(fb))
    return abs(fa - fb) <= ANSWER_TOLERANCE * scale


def find_numbers(text: str) -> list[tuple[int, int, Fraction, str]]:
    """Locate numeric literals left-to-right: (start, end, value, surface)."""
    out = []
    for m in _NUMBER_IN_TEXT.finditer(text):
        surface = m.group(1)
        out.append((m.start(1), m.end(1), to_fraction(surface), surface))
    return out


def _literal_leaves_in_order(node: expr.Node) -> list[expr.Literal]:
    """Literal leaves in textual (in-order) sequence."""
    if isinstance(node, expr.Literal):
        return [node]
    if isinstance(node, expr.Placeholder):
        return []
    if isinstance(node, expr.Unary):
        return _literal_leaves_in_order(node.child)
    return _literal_leaves_in_order(node.left) + _literal_leaves_in_order(node.right)


def _substitute_first_match(node: expr.Node, assignment: dict[int, int]) -> expr.Node:
    """Rewrite literal leaves to placeholders per a leaf-ordinal assignment."""
    counter = [0]

    def rewrite(n: expr.Node) -> expr.Node:
        if isinstance(n, expr.Literal):
            ordinal = counter[0]
            counter[0] += 1
            if ordinal in assignment:
                return expr.Placeholder(assignment[ordinal])
            return n
        if isinstance(n, expr.Placeholder):
            return n
        if isinstance(n, expr.Unary):
            return expr.Unary(n.op, rewrite(n.child))
        return expr.Binary(n.op, rewrite(n.left), rewrite(n.right))

    return rewrite(node)


def map_numbers(
    raw_text: str,
    raw_equation: str,
    *,
    problem_id: str = "",
    source_tag: str = "",
) -> MappedProblem:
    """Number-map a raw problem into placeholder form.

    Text numerals become N1..Nk in reading order.  Each equation literal that
    equals some quantity value takes the lowest-index matching placeholder not
    already consumed (first-match); unmatched literals stay literal constants.
    Placeholders already written in the equation are honored and consume
    their index.  The answer is the evaluated equation.

    Raises NoQuantitiesError, EquationError (unparseable),
    PlaceholderRangeError or EvaluationError.
    """
    spans = find_numbers(raw_text)
    if not spans:
        raise NoQuantitiesError("text contains no numeric literal")
    quantities = tuple(
        Quantity(i + 1, value, surface) for i, (_, _, value, surface) in enumerate(spans)
    )

    pieces = []
    cursor = 0
    for i, (start, end, _, _) in enumerate(spans):
        pieces.append(raw_text[cursor:start])
        pieces.append(f"N{i + 1}")
        cursor = end
    pieces.append(raw_text[cursor:])
    mapped_text = "".join(pieces)

    ast = expr.parse_equation(raw_equation)
    expr.validate_template(ast)

    used = set(expr.placeholder_indices(ast))  # explicit N-tokens consume their index
    assignment: dict[int, int] = {}
    for ordinal, leaf in enumerate(_literal_leaves_in_order(ast)):
        for q in quantities:
            if q.index not in used and q.value == leaf.value:
                assignment[ordinal] = q.index
                used.add(q.index)
                break
    template = _substitute_first_match(ast, assignment)

    k = len(quantities)
    overflow = [i for i in expr.placeholder_indices(template) if i > k]
    if overflow:
        raise PlaceholderRangeError(
            f"equation references N{max(overflow)} but text has {k} quantities"
        )

    answer = expr.evaluate(template, {q.index: q.value for q in quantities})
    problem = MappedProblem(
        id=problem_id,
        surface_text=raw_text,
        mapped_text=mapped_text,
        quantities=quantities,
        template=template,
        answer=answer,
        source_tag=source_tag,
    )
    validate_problem(problem)
    return problem


def fingerprint(problem: MappedProblem) -> Fingerprint:
    """Deterministic duplicate key: normalized text plus canonical template."""
    text = problem.mapped_text.lower()
    text = re.sub(r"\bn\d+\b", "<q>", text)
    text = _TEXT_KEY_JUNK.sub(" ", text)
    text = " ".join(text.split())
    return Fingerprint(text_key=text, template_key=expr.canonical_template(problem.template))


def validate_problem(problem: MappedProblem) -> None:
    """Enforce every MappedProblem invariant; raises InvalidProblemError."""
    k = len(problem.quantities)
    if k == 0:
        raise InvalidProblemError(f"{problem.id}: no quantities")
    for i, q in enumerate(problem.quantities):
        if q.index != i + 1:
            raise InvalidProblemError(f"{problem.id}: quantity indices not consecutive")
    try:
        expr.validate_template(problem.template)
    except EquationError as exc:
        raise InvalidProblemError(f"{problem.id}: bad template: {exc}") from exc
    over = [i for i in expr.placeholder_indices(problem.template) if i > k]
    if over:
        raise InvalidProblemError(
            f"{problem.id}: template references N{max(over)} beyond {k} quantities"
        )
    tokens = _PLACEHOLDER_TOKEN.findall(problem.mapped_text)
    if len(tokens) != k:
        raise InvalidProblemError(
            f"{problem.id}: mapped text has {len(tokens)} placeholder tokens, expected {k}"
        )
    try:
        value = expr.evaluate(problem.template, problem.bindings())
    except EvaluationError as exc:
        raise InvalidProblemError(f"{problem.id}: template does not evaluate: {exc}") from exc
    if not answers_equal(value, problem.answer):
        raise InvalidProblemError(
            f"{problem.id}: template evaluates to {value}, recorded answer {problem.answer}"
        )


# --- canonical record (one JSON object per line on disk) --------------------

def to_record(problem: MappedProblem) -> dict:
    return {
        "id": problem.id,
        "text": problem.mapped_text,
        "quantities": [to_number(q.value) for q in problem.quantities],
        "equation": expr.to_pretty_infix(problem.template),
        "answer": to_number(problem.answer),
        "source": problem.source_tag,
    }


def from_record(record: dict) -> MappedProblem:
    """Build and validate a problem from a canonical record dict.

    Raises InvalidProblemError on schema or invariant violations.
    """
    try:
        values = [to_fraction(v) for v in record["quantities"]]
        quantities = tuple(
            Quantity(i + 1, v, expr.format_value(v)) for i, v in enumerate(values)
        )
        template = expr.parse_equation(record["equation"])
        problem = MappedProblem(
            id=str(record["id"]),
            surface_text=str(record.get("surface_text", record["text"])),
            mapped_text=str(record["text"]),
            quantities=quantities,
            template=template,
            answer=to_fraction(record["answer"]),
            source_tag=str(record.get("source", "")),
        )
    except (KeyError, TypeError, ValueError, EquationError) as exc:
        raise InvalidProblemError(f"bad record: {exc}") from exc
    validate_problem(problem)
    return problem
