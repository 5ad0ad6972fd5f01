"""Run manifests, metrics, and rendering.

A manifest is one JSON document ``{"meta": {...}, "run": {...}}``.  The run
section is fully deterministic for a given config, corpora and mock teacher;
timestamps and wall-clock live in the meta block so golden-file comparisons
can hold the run section byte-exact.
"""

from __future__ import annotations

import io
import json
import logging
import math
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from . import expr
from .errors import EvaluationError
from .problem import MappedProblem, answers_equal
from .student.base import SolveResult

SCHEMA_VERSION = 1

log = logging.getLogger(__name__)


def value_accuracy(results: Sequence[tuple[SolveResult, MappedProblem]]) -> float:
    """Fraction of problems whose predicted equation evaluates to the gold
    answer; abstentions and evaluation failures count as wrong.

    Empty input scores 0 and logs a warning.
    """
    if not results:
        log.warning("value_accuracy called with no results")
        return 0.0
    correct = 0
    for result, problem in results:
        if result.abstained or result.equation is None:
            continue
        try:
            value = expr.evaluate(result.equation, problem.bindings())
        except EvaluationError:
            continue
        if answers_equal(value, problem.answer):
            correct += 1
    return correct / len(results)


def is_correct(result: SolveResult, problem: MappedProblem) -> bool:
    return value_accuracy([(result, problem)]) == 1.0


def aggregate_folds(accuracies: Sequence[float]) -> dict:
    """Mean and sample standard deviation of per-fold final accuracies."""
    if not accuracies:
        raise ValueError("need at least one fold accuracy")
    n = len(accuracies)
    mean = sum(accuracies) / n
    if n == 1:
        return {"per_fold": list(accuracies), "mean": mean, "std": 0.0, "n": 1, "single_fold": True}
    variance = sum((a - mean) ** 2 for a in accuracies) / (n - 1)
    return {"per_fold": list(accuracies), "mean": mean, "std": math.sqrt(variance), "n": n}


@dataclass
class RunReport:
    run: dict
    meta: dict = field(default_factory=dict)

    # convenience accessors for the common metrics
    @property
    def final_test_accuracy(self) -> float:
        return self.run["final_test_accuracy"]

    @property
    def final_train_size(self) -> int:
        return self.run["final_train_size"]

    @property
    def assessments(self) -> list[dict]:
        return self.run["assessments"]

    @property
    def expansion_log(self) -> list[dict]:
        return self.run["expansion_log"]

    def manifest(self) -> dict:
        return {"meta": self.meta, "run": self.run}

    def run_section_bytes(self) -> bytes:
        """Canonical bytes of the deterministic section."""
        return (json.dumps(self.run, sort_keys=True, indent=2) + "\n").encode("utf-8")

    def save(self, path: str | Path) -> None:
        write_json_atomic(self.manifest(), path)

    @staticmethod
    def load(path: str | Path) -> "RunReport":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return RunReport(run=data["run"], meta=data.get("meta", {}))


def new_meta(wall_clock_s: float | None = None) -> dict:
    meta = {"created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}
    if wall_clock_s is not None:
        meta["wall_clock_s"] = round(wall_clock_s, 3)
    return meta


def write_json_atomic(document: dict, path: str | Path) -> None:
    """Write-to-temp-then-rename so readers never see a torn file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(document, sort_keys=True, indent=2) + "\n"
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_text_atomic(text: str, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def curve_csv(report: RunReport) -> str:
    """Learning curve CSV: one row per epoch, strictly increasing."""
    out = io.StringIO()
    out.write("epoch,train_size,book_accuracy,test_accuracy\n")
    for epoch, size, book_acc, test_acc in report.run["curve"]:
        book = "" if book_acc is None else f"{book_acc:.6f}"
        test = "" if test_acc is None else f"{test_acc:.6f}"
        out.write(f"{epoch},{size},{book},{test}\n")
    return out.getvalue()


def render_report(report: RunReport) -> str:
    """Human-readable summary table for one run manifest."""
    run = report.run
    lines = [
        f"setting            {run.get('setting_name', '?')}",
        f"mode               {run['config']['augmentation_mode']}",
        f"lambda             {run['config']['lambda']}",
        f"seed               {run['seed']}",
        f"train size         {run['initial_train_size']} -> {run['final_train_size']}",
        f"book size          {run['book_size']}",
        f"test accuracy      {run['final_test_accuracy']:.4f}",
        f"train self-check   {run['final_train_self_accuracy']:.4f}",
    ]
    if run.get("final_book_accuracy") is not None:
        lines.append(f"book accuracy      {run['final_book_accuracy']:.4f}")
    stats = run["filter_stats"]
    lines.append(
        f"filter             {stats['accepted']}/{stats['total']} accepted"
        f" (rate {stats['rate']:.3f})"
    )
    for reason, count in stats["rejected_by_reason"].items():
        lines.append(f"  rejected {reason:<22} {count}")
    for record in run["assessments"]:
        lines.append(
            f"assessment @e{record['epoch']:<3} book_acc {record['book_accuracy']:.4f}"
            f" failures {len(record['failures'])}"
            f" accepted {record['generated_accepted']}"
            f" train {record['train_set_size_after']}"
        )
    if run.get("incomplete"):
        lines.append("INCOMPLETE RUN")
    return "\n".join(lines) + "\n"


def render_comparison(rows: Iterable[tuple[str, RunReport]]) -> str:
    """Small fixed-width comparison table over labeled runs."""
    lines = [f"{'run':<18} {'final_acc':>9} {'train_size':>10} {'book_size':>9}"]
    for label, report in rows:
        lines.append(
            f"{label:<18} {report.final_test_accuracy:>9.4f}"
            f" {report.final_train_size:>10} {report.run['book_size']:>9}"
        )
    return "\n".join(lines) + "\n"
