"""Corpora on disk, cross-validation folds, and train/test settings.

Canonical format: one JSON object per line (UTF-8, LF), schema::

    {"id": "s-0001", "text": "Tom has N1 apples and buys N2 more. How many apples?",
     "quantities": [3, 2], "equation": "N1 + N2", "answer": 5, "source": "sample"}

Simple-list format: ``{"id": ..., "text": <raw digits>, "equation": "3 + 2"}``;
records are number-mapped on ingest.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Union

from .errors import (
    AllRecordsDroppedError,
    LeakageError,
    MalformedFileError,
    MappingError,
    EquationError,
    EvaluationError,
    InvalidProblemError,
    TooFewProblemsError,
)
from .problem import MappedProblem, fingerprint, from_record, map_numbers, to_record

FORMATS = ("canonical", "simple-list")


@dataclass
class Corpus:
    name: str
    problems: list[MappedProblem]

    def __len__(self) -> int:
        return len(self.problems)


@dataclass
class IngestReport:
    total: int = 0
    ingested: int = 0
    dropped: int = 0
    drop_reasons: dict[str, int] = field(default_factory=dict)

    def note_drop(self, reason: str) -> None:
        self.dropped += 1
        self.drop_reasons[reason] = self.drop_reasons.get(reason, 0) + 1


def _read_lines(path: Path) -> list[str]:
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedFileError(f"{path}: not valid UTF-8: {exc}") from exc
    return [line for line in text.splitlines() if line.strip()]


def ingest(path: str | Path, fmt: str = "canonical", name: str | None = None) -> tuple[Corpus, IngestReport]:
    """Load a corpus file; invalid records are dropped and counted.

    Raises FileNotFoundError, MalformedFileError or AllRecordsDroppedError.
    """
    if fmt not in FORMATS:
        raise MalformedFileError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    corpus_name = name or path.stem
    report = IngestReport()
    problems: list[MappedProblem] = []
    seen_ids: set[str] = set()
    for line in _read_lines(path):
        report.total += 1
        try:
            record = json.loads(line, parse_float=Fraction, parse_int=int)
        except json.JSONDecodeError:
            report.note_drop("malformed-json")
            continue
        if not isinstance(record, dict):
            report.note_drop("malformed-json")
            continue
        try:
            if fmt == "canonical":
                problem = from_record(record)
            else:
                problem = map_numbers(
                    str(record["text"]),
                    str(record["equation"]),
                    problem_id=str(record["id"]),
                    source_tag=corpus_name,
                )
        except (InvalidProblemError, MappingError, EquationError, EvaluationError) as exc:
            report.note_drop(type(exc).__name__)
            continue
        except KeyError:
            report.note_drop("missing-field")
            continue
        if problem.id in seen_ids:
            report.note_drop("duplicate-id")
            continue
        seen_ids.add(problem.id)
        problems.append(problem)
        report.ingested += 1
    if not problems:
        raise AllRecordsDroppedError(f"{path}: no record survived ingest ({report.dropped} dropped)")
    return Corpus(corpus_name, problems), report


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    lines = [json.dumps(to_record(p), ensure_ascii=False) for p in corpus.problems]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def digest_problems(problems: Iterable[MappedProblem]) -> str:
    """Stable content hash over the canonical serialization."""
    h = hashlib.sha256()
    for p in problems:
        h.update(json.dumps(to_record(p), ensure_ascii=False, sort_keys=True).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


def make_folds(
    corpus: Corpus, k_folds: int, seed: int
) -> list[tuple[list[MappedProblem], list[MappedProblem]]]:
    """Deterministic k-fold split: seeded shuffle, contiguous near-equal
    test blocks, remainder going to the earliest folds."""
    n = len(corpus.problems)
    if k_folds < 2:
        raise TooFewProblemsError(f"need at least 2 folds, got {k_folds}")
    if n < k_folds:
        raise TooFewProblemsError(f"{n} problems cannot fill {k_folds} folds")
    order = list(range(n))
    random.Random(seed).shuffle(order)
    shuffled = [corpus.problems[i] for i in order]
    base, rem = divmod(n, k_folds)
    sizes = [base + 1 if i < rem else base for i in range(k_folds)]
    folds = []
    start = 0
    for size in sizes:
        test = shuffled[start : start + size]
        train = shuffled[:start] + shuffled[start + size :]
        folds.append((train, test))
        start += size
    return folds


@dataclass
class InDistribution:
    """k-fold cross-validation on one corpus, optional extra training corpora."""

    corpus: Corpus
    extra_train: list[Corpus] = field(default_factory=list)
    folds: int = 5
    seed: int = 0


@dataclass
class OutOfDistribution:
    """Train on some corpora, test on a disjoint one."""

    train: list[Corpus]
    test: Corpus
    seed: int = 0


EvalSetting = Union[InDistribution, OutOfDistribution]


@dataclass
class SettingRun:
    name: str
    train: list[MappedProblem]
    test: list[MappedProblem]
    dedup_removed: int = 0


def _dedup_against(
    problems: Iterable[MappedProblem], excluded: set, keep_seen: set | None = None
) -> tuple[list[MappedProblem], int]:
    """Drop problems whose fingerprint is excluded or already kept."""
    seen = keep_seen if keep_seen is not None else set()
    kept: list[MappedProblem] = []
    removed = 0
    for p in problems:
        fp = fingerprint(p)
        if fp in excluded or fp in seen:
            removed += 1
            continue
        seen.add(fp)
        kept.append(p)
    return kept, removed


def build_setting(setting: EvalSetting) -> list[SettingRun]:
    """Materialize train/test runs with fingerprint-level leakage control.

    Raises LeakageError only as an internal consistency failure.
    """
    runs: list[SettingRun] = []
    if isinstance(setting, OutOfDistribution):
        test = setting.test.problems
        test_fps = {fingerprint(p) for p in test}
        pool = [p for c in setting.train for p in c.problems]
        train, removed = _dedup_against(pool, test_fps)
        runs.append(SettingRun("ood", train, test, removed))
    else:
        for i, (fold_train, fold_test) in enumerate(
            make_folds(setting.corpus, setting.folds, setting.seed)
        ):
            test_fps = {fingerprint(p) for p in fold_test}
            pool = fold_train + [p for c in setting.extra_train for p in c.problems]
            train, removed = _dedup_against(pool, test_fps)
            runs.append(SettingRun(f"fold-{i}", train, fold_test, removed))
    for run in runs:
        leaked = {fingerprint(p) for p in run.train} & {fingerprint(p) for p in run.test}
        if leaked:
            raise LeakageError(f"{run.name}: {len(leaked)} fingerprints leak into test")
    return runs
