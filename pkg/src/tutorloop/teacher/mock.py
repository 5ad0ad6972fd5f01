"""Deterministic offline teacher.

Zero-shot candidates re-render the source's template through the paraphrase
bank (same template class, different frame, name and noun); when the class is
unknown the source text is keyword-substituted instead.  Few-shot candidates
apply one seeded perturbation: operator flip (+ <-> -) with a consistent
question rewording, question retarget to a proper sub-expression, or sentence
reorder with a reworded question.  Either way the output is raw text plus a
numeric equation, exactly what the candidate filter expects.

``mock_generate`` is a pure function of (source, mode, count, seed); call
order never matters.  The optional malformed-candidate injection on
MockTeacher is a filter-testing aid and follows a request-ordinal schedule,
so exact-rate experiments should issue requests sequentially.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
import threading
from fractions import Fraction

from .. import expr, textbank
from ..problem import MappedProblem
from .base import Candidate, GenerationMode

FLIP_QUESTION = "If those amounts are taken away instead, how many are left?"
RETARGET_QUESTION = "Looking at just the first part of the story, how many is that?"
REORDER_QUESTION = "Counting carefully, how many is that in the end?"

_MALFORMED_KINDS = 6
_RAW_NUMBER = re.compile(r"\d+(?:\.\d+)?")


def _derive_seed(seed: int, source_id: str, mode: GenerationMode, count: int) -> int:
    material = f"{seed}|{source_id}|{mode.value}|{count}".encode("utf-8")
    return int.from_bytes(hashlib.sha256(material).digest()[:8], "big")


def _rough_text_key(text: str) -> str:
    """Value-blind normalization used to keep candidates distinct."""
    text = _RAW_NUMBER.sub("<q>", text.lower())
    text = re.sub(r"\bn\d+\b", "<q>", text)
    text = re.sub(r"[^a-z0-9<> ]+", " ", text)
    return " ".join(text.split())


def _values(source: MappedProblem, arity: int) -> tuple[Fraction, ...]:
    return tuple(q.value for q in source.quantities)[:arity]


def _reinsert_values(source: MappedProblem) -> str:
    """Source text with placeholders turned back into concrete numbers."""
    values = {q.index: expr.format_value(q.value) for q in source.quantities}
    return re.sub(r"\bN(\d+)\b", lambda m: values[int(m.group(1))], source.mapped_text)


def _substitute_keywords(text: str, rng: random.Random) -> str:
    """Swap any bank names/nouns appearing in the text for other pool words."""
    mapping: dict[str, str] = {}
    for name in textbank.NAMES:
        if re.search(rf"\b{name}\b", text):
            mapping[name] = rng.choice([n for n in textbank.NAMES if n != name])
    for noun in textbank.NOUNS:
        if re.search(rf"\b{noun}\b", text):
            mapping[noun] = rng.choice([n for n in textbank.NOUNS if n != noun])
    for old, new in mapping.items():
        text = re.sub(rf"\b{old}\b", new, text)
    return text


def _flip_ops(node: expr.Node) -> expr.Node:
    if isinstance(node, expr.Unary):
        return expr.Unary(node.op, _flip_ops(node.child))
    if isinstance(node, expr.Binary):
        op = {"+": "-", "-": "+"}.get(node.op, node.op)
        return expr.Binary(op, _flip_ops(node.left), _flip_ops(node.right))
    return node


def _has_plus_minus(node: expr.Node) -> bool:
    return any(isinstance(n, expr.Binary) and n.op in "+-" for n in expr.walk(node))


def _proper_subtrees(node: expr.Node) -> list[expr.Node]:
    return [n for i, n in enumerate(expr.walk(node)) if i > 0 and isinstance(n, expr.Binary)]


def _render_from_bank(
    template: expr.Node, values: tuple[Fraction, ...], rng: random.Random
) -> tuple[str, str] | None:
    """Render (text, equation) via the paraphrase bank, or None if unknown."""
    family = textbank.CANONICAL_TO_FAMILY.get(expr.canonical_template(template))
    if family is None:
        return None
    arity = expr.max_placeholder(textbank.family_template(family))
    if len(values) < arity:
        return None
    frame_idx = rng.randrange(len(family.frames))
    name = rng.choice(textbank.NAMES)
    noun = rng.choice(family.nouns)
    prefix = rng.choice(textbank.CONTEXT_PREFIXES)
    text = textbank.render_text(family, frame_idx, name, noun, values[:arity])
    equation = textbank.render_numeric_equation(
        textbank.family_template(family), values[:arity]
    )
    return f"{prefix} {text}", equation


def _zero_shot(source: MappedProblem, rng: random.Random) -> tuple[str, str]:
    values = _values(source, expr.max_placeholder(source.template) or len(source.quantities))
    rendered = _render_from_bank(source.template, values, rng)
    if rendered is not None:
        return rendered
    # unknown template class: keep the wording, change the keywords
    text = _substitute_keywords(_reinsert_values(source), rng)
    text = f"{rng.choice(textbank.CONTEXT_PREFIXES)} {text}"
    equation = textbank.render_numeric_equation(
        source.template, tuple(q.value for q in source.quantities)
    )
    return text, equation


def _few_shot(source: MappedProblem, rng: random.Random) -> tuple[str, str]:
    perturbations = ["reorder"]
    if _has_plus_minus(source.template):
        perturbations.append("flip")
    if _proper_subtrees(source.template):
        perturbations.append("retarget")
    # flips rewrite the solution outright and land in a different template
    # family; keep them the salt, not the bulk, of the variant stream
    if "flip" in perturbations and rng.random() < 0.25:
        kind = "flip"
    else:
        kind = rng.choice(sorted(p for p in perturbations if p != "flip"))
    numeric_text = _reinsert_values(source)
    context, _question = textbank.split_question(numeric_text)

    if kind == "flip":
        flipped = _flip_ops(source.template)
        rendered = _render_from_bank(flipped, _values(source, expr.max_placeholder(flipped)), rng)
        if rendered is not None:
            return rendered
        equation = textbank.render_numeric_equation(
            flipped, tuple(q.value for q in source.quantities)
        )
        return f"{context} {FLIP_QUESTION}", equation

    if kind == "retarget":
        subtree = rng.choice(
            sorted(_proper_subtrees(source.template), key=expr.canonical_template)
        )
        equation = textbank.render_numeric_equation(
            subtree, tuple(q.value for q in source.quantities)
        )
        return f"{context} {RETARGET_QUESTION}", equation

    # reorder: rotate context sentences and reword the question
    sentences = [s.strip() for s in re.split(r"(?<=[.!])\s+", context) if s.strip()]
    if len(sentences) >= 2:
        sentences = sentences[1:] + sentences[:1]
        new_context = " ".join(sentences)
    else:
        new_context = f"{rng.choice(textbank.CONTEXT_PREFIXES)} {context}"
    equation = textbank.render_numeric_equation(
        source.template, tuple(q.value for q in source.quantities)
    )
    return f"{new_context} {REORDER_QUESTION}", equation


def mock_generate(
    source: MappedProblem, mode: GenerationMode, count: int, seed: int
) -> list[Candidate]:
    """Deterministic candidates for a source problem.

    Zero-shot output preserves the source's canonical template; few-shot
    output changes the template or the question sentence.
    """
    rng = random.Random(_derive_seed(seed, source.id, mode, count))
    taken = {_rough_text_key(source.mapped_text)}
    out: list[Candidate] = []
    for ordinal in range(count):
        text = equation = ""
        for _ in range(40):
            if mode is GenerationMode.ZERO_SHOT_SIMILAR:
                text, equation = _zero_shot(source, rng)
            else:
                text, equation = _few_shot(source, rng)
            if _rough_text_key(text) not in taken:
                break
        else:
            # exhausted variety; stamp on a context prefix to force novelty
            for prefix in textbank.CONTEXT_PREFIXES:
                candidate_text = f"{prefix} {text}"
                if _rough_text_key(candidate_text) not in taken:
                    text = candidate_text
                    break
        taken.add(_rough_text_key(text))
        payload = json.dumps(
            {"text": text, "equation": equation, "source": source.id, "ordinal": ordinal}
        )
        out.append(Candidate(text, equation, mode, source.id, payload))
    return out


def _malformed_candidate(kind: int, source: MappedProblem, mode: GenerationMode) -> Candidate:
    kind %= _MALFORMED_KINDS
    if kind == 0:
        text, equation = "", "N1 + N2"
    elif kind == 1:
        text, equation = "Someone shares a few pears with friends but counts nothing.", "3 + 4"
    elif kind == 2:
        text, equation = "Tom has 5 apples and 3 pears on the table.", "5 + + 3"
    elif kind == 3:
        text, equation = "A team splits 12 prizes among 0 winners evenly.", "12 / 0"
    elif kind == 4:
        text = "There are 9 " + "really " * 125 + "shiny things."
        equation = "9"
    else:
        text, equation = "Nina stores 7 boxes in the attic.", "N1 * N4"
    payload = "malformed:" + json.dumps({"kind": kind, "text": text, "equation": equation})
    return Candidate(text, equation, mode, source.id, payload)


class MockTeacher:
    """TeacherClient backed by mock_generate.

    malformed_rate > 0 swaps in one malformed candidate on a deterministic
    request-ordinal schedule: over any run of requests the injected count is
    floor(n * rate)-exact.
    """

    def __init__(self, seed: int = 0, malformed_rate: float = 0.0):
        self.seed = seed
        self.malformed_rate = malformed_rate
        self._requests = 0
        self._lock = threading.Lock()

    def generate(
        self, source: MappedProblem, mode: GenerationMode, count: int
    ) -> list[Candidate]:
        if count <= 0:
            return []
        candidates = mock_generate(source, mode, count, self.seed)
        if self.malformed_rate > 0:
            with self._lock:
                ordinal = self._requests
                self._requests += 1
            before = int(ordinal * self.malformed_rate)
            after = int((ordinal + 1) * self.malformed_rate)
            if after > before:
                candidates = [_malformed_candidate(ordinal, source, mode)] + candidates[1:]
        return candidates
