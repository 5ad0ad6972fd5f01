"""The tutor-student training loop.

One run: augment the starting training set m-fold, build an exercise book
n-fold, then train for a fixed number of epochs.  At each scheduled
assessment epoch the student is validated on the book; for every failed
entry a uniform draw p decides whether the next k_gen exercises come from
that failure (p <= lambda, targeted) or from a uniformly sampled book entry
(random).  Accepted exercises grow the training set; the book never changes
after construction.

The one-time mode first accounts a progressive run with the same seed, then
performs a single up-front expansion from randomly sampled book sources to
reach the same final training-set size, and trains without further growth.

Under the mock teacher the whole run is a pure function of (config, corpora):
all randomness flows from one seeded stream consumed in book order, and the
teacher derives its own per-request seeds.
"""

from __future__ import annotations

import random
import time
from pathlib import Path
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from .dataset import SettingRun, digest_problems
from .errors import ConfigError, EmptyBookError
from .problem import Fingerprint, MappedProblem, fingerprint
from .report import RunReport, new_meta, value_accuracy
from .student.base import SolveResult, StudentSolver
from .teacher.base import GenerationMode, TeacherClient, gather_candidates
from .teacher.filtering import FilterReport, screen_batch

AUGMENTATION_MODES = ("progressive", "one_time")
TEACHER_KINDS = ("mock", "llm")
STUDENT_KINDS = ("retrieval", "external")


@dataclass
class TutorConfig:
    lambda_: float = 1.0  # probability a failure is its own generation source
    m: int = 20  # initial augmentation multiplier
    n: int = 4  # exercise-book multiplier
    k_gen: int = 4  # exercises per generation source
    zero_few_split: tuple[int, int] = (2, 2)
    epochs: int = 50
    assess_epochs: tuple[int, ...] = (10, 20)
    seed: int = 0
    augmentation_mode: str = "progressive"
    max_new_per_assessment: int = 0  # 0 = unlimited
    teacher_kind: str = "mock"
    student_kind: str = "retrieval"
    max_quantities: int = 0  # 0 = derive from the training corpus
    parallel: int = 1

    def validate(self) -> None:
        if not 0.0 <= self.lambda_ <= 1.0:
            raise ConfigError("lambda must be within [0, 1]")
        if self.m < 0 or self.n < 0:
            raise ConfigError("m and n must be nonnegative")
        if self.k_gen < 1:
            raise ConfigError("k_gen must be at least 1")
        z, f = self.zero_few_split
        if z < 0 or f < 0 or z + f != self.k_gen:
            raise ConfigError("zero_few_split must be nonnegative and sum to k_gen")
        if self.epochs < 1:
            raise ConfigError("epochs must be at least 1")
        if any(e < 1 or e > self.epochs for e in self.assess_epochs):
            raise ConfigError("assess_epochs must fall within [1, epochs]")
        if list(self.assess_epochs) != sorted(set(self.assess_epochs)):
            raise ConfigError("assess_epochs must be strictly increasing")
        if self.augmentation_mode not in AUGMENTATION_MODES:
            raise ConfigError(f"augmentation_mode must be one of {AUGMENTATION_MODES}")
        if self.max_new_per_assessment < 0:
            raise ConfigError("max_new_per_assessment must be nonnegative")

    def as_dict(self) -> dict:
        return {
            "lambda": self.lambda_,
            "m": self.m,
            "n": self.n,
            "k_gen": self.k_gen,
            "zero_few_split": list(self.zero_few_split),
            "epochs": self.epochs,
            "assess_epochs": list(self.assess_epochs),
            "seed": self.seed,
            "augmentation_mode": self.augmentation_mode,
            "max_new_per_assessment": self.max_new_per_assessment,
            "teacher_kind": self.teacher_kind,
            "student_kind": self.student_kind,
            "max_quantities": self.max_quantities,
            "parallel": self.parallel,
        }


@dataclass(frozen=True)
class BookEntry:
    problem: MappedProblem
    source_id: str
    mode: GenerationMode


@dataclass(frozen=True)
class ExerciseBook:
    entries: tuple[BookEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def problems(self) -> list[MappedProblem]:
        return [e.problem for e in self.entries]


@dataclass
class AssessmentRecord:
    epoch: int
    book_size: int
    failures: list[str]  # failed book entry ids
    book_accuracy: float
    generated_accepted: int
    generated_rejected_by_reason: dict[str, int]
    train_set_size_after: int

    def as_dict(self) -> dict:
        return {
            "epoch": self.epoch,
            "book_size": self.book_size,
            "failures": list(self.failures),
            "book_accuracy": self.book_accuracy,
            "generated_accepted": self.generated_accepted,
            "generated_rejected_by_reason": dict(sorted(self.generated_rejected_by_reason.items())),
            "train_set_size_after": self.train_set_size_after,
        }


def _mode_counts(total: int, split: tuple[int, int]) -> tuple[int, int]:
    """How many of `total` candidates go zero-shot vs few-shot, cycling the
    z:f pattern so any total honors the configured ratio."""
    z, f = split
    if total <= 0:
        return 0, 0
    if z + f == 0:
        return total, 0
    pattern = [GenerationMode.ZERO_SHOT_SIMILAR] * z + [GenerationMode.FEW_SHOT_VARIANT] * f
    modes = [pattern[i % len(pattern)] for i in range(total)]
    zero = sum(1 for m in modes if m is GenerationMode.ZERO_SHOT_SIMILAR)
    return zero, total - zero


def _requests_for(
    source: MappedProblem, zero: int, few: int
) -> list[tuple[MappedProblem, GenerationMode, int]]:
    requests = []
    if zero > 0:
        requests.append((source, GenerationMode.ZERO_SHOT_SIMILAR, zero))
    if few > 0:
        requests.append((source, GenerationMode.FEW_SHOT_VARIANT, few))
    return requests


class _IdAllocator:
    def __init__(self):
        self.next_index = 0

    def take(self, count: int) -> int:
        start = self.next_index
        self.next_index += count
        return start


def _derived_max_quantities(train: Sequence[MappedProblem], configured: int) -> int:
    return configured or max(len(p.quantities) for p in train)


def initial_augment(
    train: Sequence[MappedProblem],
    cfg: TutorConfig,
    teacher: TeacherClient,
    excluded: set[Fingerprint] = frozenset(),
    ids: _IdAllocator | None = None,
    max_quantities: int = 0,
) -> tuple[list[MappedProblem], FilterReport, int]:
    """m candidates per training problem, filtered against train + accepted.

    Iterates the snapshot of `train` in corpus order.  Returns the accepted
    problems, the filter report, and the number of teacher requests.
    """
    if cfg.m <= 0:
        return [], FilterReport(), 0
    ids = ids or _IdAllocator()
    max_quantities = _derived_max_quantities(train, max_quantities)
    zero, few = _mode_counts(cfg.m, cfg.zero_few_split)
    requests = []
    for source in train:
        requests.extend(_requests_for(source, zero, few))
    candidates = gather_candidates(requests, teacher, cfg.parallel)
    existing = set(excluded) | {fingerprint(p) for p in train}
    verdicts, report = screen_batch(
        candidates, existing, max_quantities, id_prefix="aug", start_index=ids.take(len(candidates))
    )
    accepted = [v.accepted for v in verdicts if v.accepted is not None]
    return accepted, report, len(requests)


def build_book(
    train: Sequence[MappedProblem],
    cfg: TutorConfig,
    teacher: TeacherClient,
    ids: _IdAllocator | None = None,
    max_quantities: int = 0,
) -> tuple[ExerciseBook, FilterReport, int]:
    """n candidates per training problem, deduped against train and the book
    so far.  Modes alternate half and half regardless of zero_few_split: the
    book exists to diversify validation, so both variant kinds always appear.

    Raises EmptyBookError when n > 0 yet nothing survives the filter.
    """
    if cfg.n <= 0:
        return ExerciseBook(()), FilterReport(), 0
    ids = ids or _IdAllocator()
    max_quantities = _derived_max_quantities(train, max_quantities)
    requests: list[tuple[MappedProblem, GenerationMode, int]] = []
    for ordinal, source in enumerate(train):
        # alternate modes half and half, staggered by source ordinal so both
        # modes show up even at n = 1
        zero = sum(1 for j in range(cfg.n) if (ordinal + j) % 2 == 0)
        requests.extend(_requests_for(source, zero, cfg.n - zero))
    candidates = gather_candidates(requests, teacher, cfg.parallel)
    existing = {fingerprint(p) for p in train}
    verdicts, report = screen_batch(
        candidates, existing, max_quantities, id_prefix="book", start_index=ids.take(len(candidates))
    )
    entries = tuple(
        BookEntry(v.accepted, v.candidate.source_id, v.candidate.mode)
        for v in verdicts
        if v.accepted is not None
    )
    if not entries:
        raise EmptyBookError("book generation produced no usable exercises")
    return ExerciseBook(entries), report, len(requests)


def assess(student: StudentSolver, book: ExerciseBook) -> tuple[float, list[BookEntry]]:
    """Validate the student on every book entry.

    Correct means: did not abstain, and the predicted equation evaluates to
    the entry's answer under its bindings.  Returns (accuracy, failures in
    book order).
    """
    failures: list[BookEntry] = []
    results: list[tuple[SolveResult, MappedProblem]] = []
    for entry in book.entries:
        result = student.solve(entry.problem)
        results.append((result, entry.problem))
        if value_accuracy([(result, entry.problem)]) < 1.0:
            failures.append(entry)
    return value_accuracy(results), failures


def expand(
    train: Sequence[MappedProblem],
    failures: Sequence[BookEntry],
    book: ExerciseBook,
    cfg: TutorConfig,
    teacher: TeacherClient,
    rng: random.Random,
    excluded: set[Fingerprint] = frozenset(),
    ids: _IdAllocator | None = None,
    max_quantities: int = 0,
    epoch: int = 0,
) -> tuple[list[MappedProblem], FilterReport, list[dict], int]:
    """Targeted/random generation for each failure, in book order.

    Per failure: draw p from the run's uniform stream; p <= lambda sources
    the generation from the failed entry itself, otherwise from a uniformly
    sampled book entry.  Every event is logged as
    (failure_id, p, targeted, source_id).  Stops early once
    max_new_per_assessment exercises were accepted.
    """
    ids = ids or _IdAllocator()
    max_quantities = _derived_max_quantities(train, max_quantities)
    accepted: list[MappedProblem] = []
    report = FilterReport()
    events: list[dict] = []
    requests_made = 0
    existing = set(excluded) | {fingerprint(p) for p in train}
    zero, few = _mode_counts(cfg.k_gen, cfg.zero_few_split)
    cap = cfg.max_new_per_assessment
    for failed in failures:
        if cap and len(accepted) >= cap:
            break
        p = rng.random()
        targeted = p <= cfg.lambda_
        source_entry = failed if targeted else book.entries[rng.randrange(len(book.entries))]
        events.append(
            {
                "epoch": epoch,
                "failure_id": failed.problem.id,
                "p": p,
                "targeted": targeted,
                "source_id": source_entry.problem.id,
            }
        )
        requests = _requests_for(source_entry.problem, zero, few)
        requests_made += len(requests)
        candidates = gather_candidates(requests, teacher, cfg.parallel)
        verdicts, batch_report = screen_batch(
            candidates,
            existing,
            max_quantities,
            id_prefix=f"exp{epoch}",
            start_index=ids.take(len(candidates)),
        )
        report.merge(batch_report)
        for verdict in verdicts:
            if verdict.accepted is None:
                continue
            if cap and len(accepted) >= cap:
                break
            existing.add(fingerprint(verdict.accepted))
            accepted.append(verdict.accepted)
    return accepted, report, events, requests_made


def _evaluate(student: StudentSolver, problems: Sequence[MappedProblem]) -> float:
    return value_accuracy([(student.solve(p), p) for p in problems])


def run(
    cfg: TutorConfig,
    setting_run: SettingRun,
    student: StudentSolver,
    teacher: TeacherClient,
    out_dir: str | None = None,
) -> RunReport:
    """Execute one full tutor-loop run and produce its manifest.

    On error a partial manifest flagged incomplete is written (when out_dir
    is given) and the error is re-raised.
    """
    cfg.validate()
    if not setting_run.train or not setting_run.test:
        raise ConfigError("run needs a non-empty train and test set")
    started = time.monotonic()
    run_dict: dict = {
        "schema_version": 1,
        "config": cfg.as_dict(),
        "seed": cfg.seed,
        "setting_name": setting_run.name,
        "corpus_digests": {
            "train": digest_problems(setting_run.train),
            "test": digest_problems(setting_run.test),
        },
        "initial_train_size": len(setting_run.train),
        "incomplete": True,
        "warnings": [],
    }
    report = RunReport(run=run_dict, meta=new_meta())
    try:
        _run_inner(cfg, setting_run, student, teacher, run_dict)
        run_dict["incomplete"] = False
    finally:
        report.meta = new_meta(time.monotonic() - started)
        if out_dir is not None:
            report.save(Path(out_dir) / f"manifest-{setting_run.name}.json")
    return report


def _run_inner(
    cfg: TutorConfig,
    setting_run: SettingRun,
    student: StudentSolver,
    teacher: TeacherClient,
    run_dict: dict,
) -> None:
    rng = random.Random(cfg.seed)
    ids = _IdAllocator()
    train: list[MappedProblem] = list(setting_run.train)
    test = list(setting_run.test)
    test_fps = {fingerprint(p) for p in test}
    max_quantities = cfg.max_quantities or max(len(p.quantities) for p in train)
    filter_stats = FilterReport()
    teacher_requests = 0

    target_size: int | None = None
    if cfg.augmentation_mode == "one_time":
        # dry accounting pass: the progressive run with the same seed fixes
        # the final training-set size this run must match up front
        dry_report = run(
            replace(cfg, augmentation_mode="progressive"),
            setting_run,
            student,
            teacher,
        )
        target_size = dry_report.final_train_size
        run_dict["one_time_target_size"] = target_size

    augmented, aug_report, aug_requests = initial_augment(
        train, cfg, teacher, test_fps, ids, max_quantities
    )
    train.extend(augmented)
    filter_stats.merge(aug_report)
    teacher_requests += aug_requests
    run_dict["train_size_after_initial_augment"] = len(train)

    book, book_report, book_requests = build_book(train, cfg, teacher, ids, max_quantities)
    filter_stats.merge(book_report)
    teacher_requests += book_requests
    run_dict["book_size"] = len(book)
    run_dict["book_modes"] = {
        "zero_shot": sum(1 for e in book.entries if e.mode is GenerationMode.ZERO_SHOT_SIMILAR),
        "few_shot": sum(1 for e in book.entries if e.mode is GenerationMode.FEW_SHOT_VARIANT),
    }

    one_time_fill = None
    if cfg.augmentation_mode == "one_time" and target_size is not None:
        one_time_fill = {"target_size": target_size, "draws": 0, "achieved": len(train)}
        if len(book):
            existing = test_fps | {fingerprint(p) for p in train}
            zero, few = _mode_counts(cfg.k_gen, cfg.zero_few_split)
            max_draws = 50 * len(book) + 50
            while len(train) < target_size and one_time_fill["draws"] < max_draws:
                source = book.entries[rng.randrange(len(book.entries))]
                one_time_fill["draws"] += 1
                requests = _requests_for(source.problem, zero, few)
                teacher_requests += len(requests)
                candidates = gather_candidates(requests, teacher, cfg.parallel)
                verdicts, fill_report = screen_batch(
                    candidates,
                    existing,
                    max_quantities,
                    id_prefix="fill",
                    start_index=ids.take(len(candidates)),
                )
                filter_stats.merge(fill_report)
                for verdict in verdicts:
                    if verdict.accepted is None or len(train) >= target_size:
                        continue
                    existing.add(fingerprint(verdict.accepted))
                    train.append(verdict.accepted)
            one_time_fill["achieved"] = len(train)
            if len(train) < target_size:
                run_dict["warnings"].append(
                    f"one-time fill reached {len(train)} of {target_size}"
                )
    run_dict["one_time_fill"] = one_time_fill

    student.reset(cfg.seed)
    assessments: list[AssessmentRecord] = []
    expansion_log: list[dict] = []
    growth: list[list[int]] = []
    curve: list[list] = []
    assess_at = set(cfg.assess_epochs)

    for epoch in range(1, cfg.epochs + 1):
        student.train(train, 1)
        book_accuracy = None
        if epoch in assess_at and len(book):
            book_accuracy, failures = assess(student, book)
            accepted: list[MappedProblem] = []
            expansion_report = FilterReport()
            if cfg.augmentation_mode == "progressive":
                accepted, expansion_report, events, n_requests = expand(
                    train,
                    failures,
                    book,
                    cfg,
                    teacher,
                    rng,
                    test_fps,
                    ids,
                    max_quantities,
                    epoch,
                )
                train.extend(accepted)
                filter_stats.merge(expansion_report)
                expansion_log.extend(events)
                teacher_requests += n_requests
            assessments.append(
                AssessmentRecord(
                    epoch=epoch,
                    book_size=len(book),
                    failures=[e.problem.id for e in failures],
                    book_accuracy=book_accuracy,
                    generated_accepted=len(accepted),
                    generated_rejected_by_reason=dict(expansion_report.rejected_by_reason),
                    train_set_size_after=len(train),
                )
            )
        elif epoch in assess_at:
            run_dict["warnings"].append(f"epoch {epoch}: empty book, assessment skipped")
        test_accuracy = _evaluate(student, test)
        growth.append([epoch, len(train)])
        curve.append([epoch, len(train), book_accuracy, test_accuracy])

    run_dict["assessments"] = [a.as_dict() for a in assessments]
    run_dict["expansion_log"] = expansion_log
    run_dict["growth_curve"] = growth
    run_dict["curve"] = curve
    run_dict["filter_stats"] = filter_stats.as_dict()
    run_dict["final_train_size"] = len(train)
    run_dict["final_test_accuracy"] = curve[-1][3]
    run_dict["final_train_self_accuracy"] = _evaluate(student, train)
    run_dict["final_book_accuracy"] = (
        assess(student, book)[0] if len(book) else None
    )
    run_dict["teacher_requests"] = teacher_requests


TeacherFactory = Callable[[], TeacherClient]
StudentFactory = Callable[[], StudentSolver]


def sweep_lambda(
    cfg: TutorConfig,
    values: Sequence[float],
    setting_run: SettingRun,
    student_factory: StudentFactory,
    teacher_factory: TeacherFactory,
    out_dir: str | None = None,
) -> list[tuple[float, RunReport]]:
    """Run the loop once per lambda with identical seeds and corpora."""
    results = []
    for value in values:
        sub_cfg = replace(cfg, lambda_=value)
        sub_dir = None
        if out_dir is not None:
            sub_dir = f"{out_dir}/lambda-{value:g}"
        report = run(sub_cfg, setting_run, student_factory(), teacher_factory(), sub_dir)
        results.append((value, report))
    return results


def sweep_book_size(
    cfg: TutorConfig,
    n_values: Sequence[int],
    setting_run: SettingRun,
    student_factory: StudentFactory,
    teacher_factory: TeacherFactory,
    out_dir: str | None = None,
) -> list[tuple[int, RunReport]]:
    """Run the loop once per exercise-book multiplier n.

    n = 1 doubles as the same-size-as-training-set condition (modulo
    filtering losses).
    """
    results = []
    for value in n_values:
        sub_cfg = replace(cfg, n=value)
        sub_dir = None
        if out_dir is not None:
            sub_dir = f"{out_dir}/book-n-{value}"
        report = run(sub_cfg, setting_run, student_factory(), teacher_factory(), sub_dir)
        results.append((value, report))
    return results


def compare_augmentation(
    cfg: TutorConfig,
    setting_run: SettingRun,
    student_factory: StudentFactory,
    teacher_factory: TeacherFactory,
    out_dir: str | None = None,
) -> tuple[RunReport, RunReport]:
    """Paired progressive vs one-time runs under the same seed."""
    progressive = run(
        replace(cfg, augmentation_mode="progressive"),
        setting_run,
        student_factory(),
        teacher_factory(),
        f"{out_dir}/progressive" if out_dir else None,
    )
    one_time = run(
        replace(cfg, augmentation_mode="one_time"),
        setting_run,
        student_factory(),
        teacher_factory(),
        f"{out_dir}/one-time" if out_dir else None,
    )
    return progressive, one_time
