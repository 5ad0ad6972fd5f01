"""Command-line surface.

Subcommands: ingest, fold, gen, book, run, sweep, compare-aug, report.
Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import build_student, build_teacher, load_run_settings, load_setting_runs
from .dataset import Corpus, ingest, make_folds, save_corpus
from .errors import TutorLoopError
from .loop import compare_augmentation, run, sweep_book_size, sweep_lambda
from .problem import to_record
from .report import (
    RunReport,
    aggregate_folds,
    curve_csv,
    render_comparison,
    render_report,
    write_json_atomic,
    write_text_atomic,
)
from .teacher.base import GenerationMode
from .teacher.mock import MockTeacher


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we want 1
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="tutorloop", description=__doc__)
    parser.add_argument("--version", action="version", version=f"tutorloop {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="convert a raw problem list to canonical records")
    p.add_argument("--input", required=True)
    p.add_argument("--format", default="simple-list", choices=("simple-list", "canonical"))
    p.add_argument("--output", required=True)
    p.add_argument("--name", default=None)

    p = sub.add_parser("fold", help="build deterministic cross-validation splits")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("gen", help="one-off exercise generation for inspection")
    p.add_argument("--corpus", required=True)
    p.add_argument("--id", dest="problem_id", required=True)
    p.add_argument("--mode", choices=("zero", "few"), default="zero")
    p.add_argument("--count", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("book", help="build and save an exercise book")
    p.add_argument("--config", required=True)
    p.add_argument("--output", required=True)

    p = sub.add_parser("run", help="execute a configured tutor loop")
    p.add_argument("--config", required=True)

    p = sub.add_parser("sweep", help="lambda or book-size sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--lambda", dest="lambda_values", default=None,
                   help="comma-separated lambda values, e.g. 0,0.5,1")
    p.add_argument("--book-n", dest="book_n_values", default=None,
                   help="comma-separated book multipliers; 'same' means n = 1")

    p = sub.add_parser("compare-aug", help="paired progressive vs one-time runs")
    p.add_argument("--config", required=True)

    p = sub.add_parser("report", help="render a manifest to a table and CSV curve")
    p.add_argument("--manifest", required=True)
    p.add_argument("--curve-csv", default=None)

    return parser


def _cmd_ingest(args) -> int:
    corpus, report = ingest(args.input, fmt=args.format, name=args.name)
    save_corpus(corpus, args.output)
    print(f"ingested {report.ingested} of {report.total} records -> {args.output}")
    if report.dropped:
        for reason, count in sorted(report.drop_reasons.items()):
            print(f"  dropped {reason}: {count}")
    return 0


def _cmd_fold(args) -> int:
    corpus, _ = ingest(args.input)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, (train, test) in enumerate(make_folds(corpus, args.k, args.seed)):
        save_corpus(Corpus(f"{corpus.name}-fold{i}-train", train), out_dir / f"fold-{i}.train.jsonl")
        save_corpus(Corpus(f"{corpus.name}-fold{i}-test", test), out_dir / f"fold-{i}.test.jsonl")
    print(f"wrote {args.k} folds to {out_dir}")
    return 0


def _cmd_gen(args) -> int:
    corpus, _ = ingest(args.corpus)
    by_id = {p.id: p for p in corpus.problems}
    if args.problem_id not in by_id:
        raise TutorLoopError(f"no problem {args.problem_id!r} in {args.corpus}")
    mode = (
        GenerationMode.ZERO_SHOT_SIMILAR if args.mode == "zero" else GenerationMode.FEW_SHOT_VARIANT
    )
    teacher = MockTeacher(seed=args.seed)
    for candidate in teacher.generate(by_id[args.problem_id], mode, args.count):
        print(json.dumps({"text": candidate.text, "equation": candidate.equation}))
    return 0


def _cmd_book(args) -> int:
    from .loop import build_book

    settings = load_run_settings(args.config)
    runs = load_setting_runs(settings)
    teacher = build_teacher(settings)
    book, report, _ = build_book(runs[0].train, settings.cfg, teacher)
    lines = []
    for entry in book.entries:
        record = to_record(entry.problem)
        record["book_source_id"] = entry.source_id
        record["book_mode"] = entry.mode.value
        lines.append(json.dumps(record, ensure_ascii=False))
    write_text_atomic("\n".join(lines) + "\n", args.output)
    print(f"book of {len(book)} entries -> {args.output} (filter rate {report.rate:.3f})")
    return 0


def _cmd_run(args) -> int:
    settings = load_run_settings(args.config)
    runs = load_setting_runs(settings)
    out_dir = Path(settings.out_dir)
    accuracies = []
    for setting_run in runs:
        student = build_student(settings)
        teacher = build_teacher(settings)
        report = run(settings.cfg, setting_run, student, teacher, str(out_dir))
        accuracies.append(report.final_test_accuracy)
        print(render_report(report))
    if len(runs) > 1:
        summary = aggregate_folds(accuracies)
        write_json_atomic(summary, out_dir / "summary.json")
        print(f"mean accuracy {summary['mean']:.4f} +/- {summary['std']:.4f} over {summary['n']} folds")
    print(f"manifests in {out_dir}")
    return 0


def _cmd_sweep(args) -> int:
    settings = load_run_settings(args.config)
    if (args.lambda_values is None) == (args.book_n_values is None):
        raise _UsageError("sweep needs exactly one of --lambda / --book-n")
    runs = load_setting_runs(settings)
    setting_run = runs[0]
    student_factory = lambda: build_student(settings)
    teacher_factory = lambda: build_teacher(settings)
    out_dir = Path(settings.out_dir)
    if args.lambda_values is not None:
        values = [float(v) for v in args.lambda_values.split(",") if v.strip()]
        results = sweep_lambda(
            settings.cfg, values, setting_run, student_factory, teacher_factory, str(out_dir)
        )
        rows = [(f"lambda={value:g}", report) for value, report in results]
    else:
        raw = [v.strip() for v in args.book_n_values.split(",") if v.strip()]
        values = [1 if v == "same" else int(v) for v in raw]
        results = sweep_book_size(
            settings.cfg, values, setting_run, student_factory, teacher_factory, str(out_dir)
        )
        rows = [
            (f"book-n={label}" if label != "same" else "book-same-size", report)
            for label, (_, report) in zip(raw, results)
        ]
    table = render_comparison(rows)
    print(table, end="")
    write_text_atomic(table, out_dir / "comparison.txt")
    return 0


def _cmd_compare_aug(args) -> int:
    settings = load_run_settings(args.config)
    runs = load_setting_runs(settings)
    progressive, one_time = compare_augmentation(
        settings.cfg,
        runs[0],
        lambda: build_student(settings),
        lambda: build_teacher(settings),
        settings.out_dir,
    )
    table = render_comparison([("progressive", progressive), ("one-time", one_time)])
    print(table, end="")
    write_text_atomic(table, Path(settings.out_dir) / "compare-aug.txt")
    return 0


def _cmd_report(args) -> int:
    report = RunReport.load(args.manifest)
    print(render_report(report), end="")
    if args.curve_csv:
        write_text_atomic(curve_csv(report), args.curve_csv)
        print(f"curve -> {args.curve_csv}")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "fold": _cmd_fold,
    "gen": _cmd_gen,
    "book": _cmd_book,
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "compare-aug": _cmd_compare_aug,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except (TutorLoopError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
