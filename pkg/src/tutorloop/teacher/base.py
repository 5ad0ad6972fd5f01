"""Teacher-side types: generation modes, raw candidates, client protocol."""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Protocol, Sequence

from ..problem import MappedProblem


class GenerationMode(enum.Enum):
    # same solution shape, different surface wording
    ZERO_SHOT_SIMILAR = "zero_shot_similar"
    # similar description, different solution
    FEW_SHOT_VARIANT = "few_shot_variant"


@dataclass(frozen=True)
class Candidate:
    """One raw teacher output, before any filtering.

    raw_payload keeps the verbatim teacher output so filter decisions stay
    auditable after the fact.
    """

    text: str
    equation: str
    mode: GenerationMode
    source_id: str
    raw_payload: str


class TeacherClient(Protocol):
    def generate(
        self, source: MappedProblem, mode: GenerationMode, count: int
    ) -> list[Candidate]:
        """Return at most `count` candidates; empty output is not an error."""
        ...


GenRequest = tuple[MappedProblem, GenerationMode, int]


def gather_candidates(
    requests: Sequence[GenRequest], teacher: TeacherClient, parallel: int = 1
) -> list[Candidate]:
    """Issue generation requests, restoring request order in the output.

    With parallel > 1 the requests run on a thread pool, but candidates are
    concatenated by request position (then candidate ordinal within each
    reply), so downstream filtering never depends on completion order.
    """
    requests = [(s, m, c) for (s, m, c) in requests if c > 0]
    if not requests:
        return []
    if parallel <= 1 or len(requests) == 1:
        batches = [teacher.generate(s, m, c) for (s, m, c) in requests]
    else:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            futures = [pool.submit(teacher.generate, s, m, c) for (s, m, c) in requests]
            batches = [f.result() for f in futures]
    out: list[Candidate] = []
    for batch in batches:
        out.extend(batch)
    return out
