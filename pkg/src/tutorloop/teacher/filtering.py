"""Format and duplicate filtering of teacher candidates.

Every candidate must number-map cleanly, stay within the quantity budget,
evaluate to a finite answer, fit in 120 tokens, and be fingerprint-distinct
from both the existing pool and the candidates accepted earlier in the same
batch.  Filtering is total: bad candidates become counted rejections, never
exceptions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from ..errors import (
    EquationError,
    EvaluationError,
    NoQuantitiesError,
    PlaceholderRangeError,
)
from ..problem import Fingerprint, MappedProblem, fingerprint, map_numbers
from .base import Candidate

MAX_TEXT_TOKENS = 120

REJECTION_REASONS = (
    "UnparseableEquation",
    "NoQuantities",
    "PlaceholderOutOfRange",
    "EvaluationError",
    "Duplicate",
    "EmptyText",
    "TooLong",
)


@dataclass(frozen=True)
class FilterVerdict:
    candidate: Candidate
    accepted: Optional[MappedProblem] = None
    rejection: Optional[str] = None

    def __post_init__(self):
        if (self.accepted is None) == (self.rejection is None):
            raise ValueError("exactly one of accepted/rejection must be set")


@dataclass
class FilterReport:
    total: int = 0
    accepted: int = 0
    rejected_by_reason: dict[str, int] = field(default_factory=dict)

    @property
    def rejected(self) -> int:
        return sum(self.rejected_by_reason.values())

    @property
    def rate(self) -> float:
        """Fraction of candidates filtered out."""
        return self.rejected / self.total if self.total else 0.0

    def merge(self, other: "FilterReport") -> None:
        self.total += other.total
        self.accepted += other.accepted
        for reason, n in other.rejected_by_reason.items():
            self.rejected_by_reason[reason] = self.rejected_by_reason.get(reason, 0) + n

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "accepted": self.accepted,
            "rejected_by_reason": dict(sorted(self.rejected_by_reason.items())),
            "rate": self.rate,
        }


def screen_candidate(
    candidate: Candidate, max_quantities: int, known: set[Fingerprint]
) -> FilterVerdict:
    """Judge one candidate against format rules and the known fingerprints."""
    if not candidate.text.strip():
        return FilterVerdict(candidate, rejection="EmptyText")
    if len(candidate.text.split()) > MAX_TEXT_TOKENS:
        return FilterVerdict(candidate, rejection="TooLong")
    try:
        problem = map_numbers(
            candidate.text,
            candidate.equation,
            source_tag=f"gen:{candidate.mode.value}",
        )
    except NoQuantitiesError:
        return FilterVerdict(candidate, rejection="NoQuantities")
    except PlaceholderRangeError:
        return FilterVerdict(candidate, rejection="PlaceholderOutOfRange")
    except EquationError:
        return FilterVerdict(candidate, rejection="UnparseableEquation")
    except EvaluationError:
        return FilterVerdict(candidate, rejection="EvaluationError")
    if len(problem.quantities) > max_quantities:
        # quantity ordinals past the allowed placeholder range
        return FilterVerdict(candidate, rejection="PlaceholderOutOfRange")
    if fingerprint(problem) in known:
        return FilterVerdict(candidate, rejection="Duplicate")
    return FilterVerdict(candidate, accepted=problem)


def screen_batch(
    candidates: Sequence[Candidate],
    existing: set[Fingerprint],
    max_quantities: int,
    *,
    id_prefix: str = "gen",
    start_index: int = 0,
) -> tuple[list[FilterVerdict], FilterReport]:
    """Screen a batch in order, assigning fresh ids to accepted problems.

    `existing` is not mutated; batch-internal duplicates are rejected by
    tracking fingerprints accepted so far.
    """
    report = FilterReport()
    verdicts: list[FilterVerdict] = []
    known = set(existing)
    index = start_index
    for candidate in candidates:
        report.total += 1
        verdict = screen_candidate(candidate, max_quantities, known)
        if verdict.rejection is not None:
            report.rejected_by_reason[verdict.rejection] = (
                report.rejected_by_reason.get(verdict.rejection, 0) + 1
            )
            verdicts.append(verdict)
            continue
        problem = verdict.accepted.with_id(f"{id_prefix}-{index:05d}")
        index += 1
        known.add(fingerprint(problem))
        verdicts.append(FilterVerdict(candidate, accepted=problem))
        report.accepted += 1
    return verdicts, report


def filter_candidates(
    candidates: Iterable[Candidate],
    existing: set[Fingerprint],
    max_quantities: int,
    *,
    id_prefix: str = "gen",
    start_index: int = 0,
) -> tuple[list[MappedProblem], FilterReport]:
    """Screen candidates; returns the accepted problems and the report."""
    verdicts, report = screen_batch(
        list(candidates),
        existing,
        max_quantities,
        id_prefix=id_prefix,
        start_index=start_index,
    )
    return [v.accepted for v in verdicts if v.accepted is not None], report
