"""Built-in retrieval student.

A deterministic nearest-neighbor solver: index every trained problem's text
(term weight tf * ln(1 + N/df)), answer a query with the template of the
most cosine-similar indexed item whose template fits the query's quantity
count.  It trains in milliseconds, is completely reproducible, and fails on
template families it has never seen, which is exactly the learning dynamic
the tutor loop needs to exercise.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

from .. import expr
from ..problem import MappedProblem
from .base import SolveResult

_TOKEN = re.compile(r"[a-z0-9]+")
_PLACEHOLDER = re.compile(r"^n\d+$")


def tokenize(text: str) -> list[str]:
    """Lowercase alphanumeric tokens, placeholder tokens dropped."""
    return [t for t in _TOKEN.findall(text.lower()) if not _PLACEHOLDER.match(t)]


@dataclass
class _IndexedItem:
    item_id: str
    counts: dict[str, int]
    template: expr.Node
    max_placeholder: int


class RetrievalStudent:
    """Deterministic tf-idf nearest-neighbor solver over trained problems."""

    def __init__(self, min_similarity: float = 0.0):
        self.min_similarity = min_similarity
        self.seed = 0
        self._items: dict[str, _IndexedItem] = {}
        self._df: dict[str, int] = {}
        self._dirty = True
        self._postings: dict[str, list[tuple[str, float]]] = {}
        self._norms: dict[str, float] = {}

    # -- StudentSolver ---------------------------------------------------------

    def reset(self, seed: int) -> None:
        self.seed = seed
        self._items = {}
        self._df = {}
        self._dirty = True

    def train(self, problems: Sequence[MappedProblem], passes: int = 1) -> None:
        """Index the given problems; re-training an id is a no-op.

        `passes` exists for gradient-trained externals and is ignored here:
        indexing is one-shot.
        """
        for problem in problems:
            if problem.id in self._items:
                continue
            counts: dict[str, int] = {}
            for token in tokenize(problem.mapped_text):
                counts[token] = counts.get(token, 0) + 1
            for token in counts:
                self._df[token] = self._df.get(token, 0) + 1
            self._items[problem.id] = _IndexedItem(
                item_id=problem.id,
                counts=counts,
                template=problem.template,
                max_placeholder=expr.max_placeholder(problem.template),
            )
            self._dirty = True

    def solve(self, problem: MappedProblem) -> SolveResult:
        """Highest-cosine eligible item's template; ties break on smallest id.

        Query terms absent from the index carry no weight (df = 0 has none);
        dropping them rescales every cosine equally, so ranking is unchanged.
        """
        if not self._items:
            return SolveResult(abstained=True)
        if self._dirty:
            self._rebuild()

        query_counts: dict[str, int] = {}
        for token in tokenize(problem.mapped_text):
            query_counts[token] = query_counts.get(token, 0) + 1
        n = len(self._items)
        query = {
            t: tf * math.log(1 + n / self._df[t])
            for t, tf in query_counts.items()
            if t in self._df
        }
        query_norm = math.sqrt(sum(w * w for w in query.values()))

        scores: dict[str, float] = {}
        for token, weight in query.items():
            for item_id, doc_weight in self._postings[token]:
                scores[item_id] = scores.get(item_id, 0.0) + weight * doc_weight

        k = len(problem.quantities)
        best: tuple[float, str] | None = None
        for item_id, dot in scores.items():
            item = self._items[item_id]
            if item.max_placeholder > k:
                continue
            denom = query_norm * self._norms[item_id]
            similarity = dot / denom if denom else 0.0
            if (
                best is None
                or similarity > best[0]
                or (similarity == best[0] and item_id < best[1])
            ):
                best = (similarity, item_id)
        if best is None:
            # no term overlap with any eligible item: similarity 0 across the
            # board, pick the smallest eligible id
            eligible = sorted(
                item_id
                for item_id, item in self._items.items()
                if item.max_placeholder <= k
            )
            if not eligible:
                return SolveResult(abstained=True)
            best = (0.0, eligible[0])
        if best[0] < self.min_similarity:
            return SolveResult(abstained=True)
        return SolveResult(equation=self._items[best[1]].template, diagnostics=best[0])

    # -- internals ---------------------------------------------------------------

    def _rebuild(self) -> None:
        n = len(self._items)
        idf = {t: math.log(1 + n / df) for t, df in self._df.items()}
        self._postings = {}
        self._norms = {}
        for item in self._items.values():
            square_sum = 0.0
            for token, tf in item.counts.items():
                weight = tf * idf[token]
                square_sum += weight * weight
                self._postings.setdefault(token, []).append((item.item_id, weight))
            self._norms[item.item_id] = math.sqrt(square_sum)
        self._dirty = False

    # -- introspection -------------------------------------------------------------

    def index_size(self) -> int:
        return len(self._items)

    def indexed_templates(self) -> dict[str, expr.Node]:
        return {item_id: item.template for item_id, item in self._items.items()}
