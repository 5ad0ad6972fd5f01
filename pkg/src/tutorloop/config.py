"""Run configuration files: a flat UTF-8 table of ``key = value`` lines.

Recognized keys::

    lambda, m, n, k_gen, zero_few_split, epochs, assess_epochs, seed,
    augmentation_mode, max_new_per_assessment, max_quantities, parallel,
    teacher.kind, teacher.base_url, teacher.model, teacher.temperature,
    student.kind, student.exec, data.train, data.test, data.setting,
    data.folds, data.extra, out.dir

``#`` starts a comment; list values are comma-separated.
"""

from __future__ import annotations

import shlex
from dataclasses import dataclass, field
from pathlib import Path

from .dataset import Corpus, InDistribution, OutOfDistribution, SettingRun, build_setting, ingest
from .errors import ConfigError
from .loop import STUDENT_KINDS, TEACHER_KINDS, TutorConfig
from .student.base import StudentSolver
from .student.external import ExternalStudent, ExternalStudentConfig
from .student.retrieval import RetrievalStudent
from .teacher.base import TeacherClient
from .teacher.llm import LlmTeacher, TeacherHttpConfig
from .teacher.mock import MockTeacher


@dataclass
class RunSettings:
    cfg: TutorConfig
    teacher_base_url: str = ""
    teacher_model: str = "gpt-3.5-turbo"
    teacher_temperature: float = 1.25
    student_exec: str = ""
    data_train: list[str] = field(default_factory=list)
    data_test: str = ""
    data_setting: str = "ood"
    data_folds: int = 5
    data_extra: list[str] = field(default_factory=list)
    out_dir: str = "runs"


def parse_config_text(text: str) -> dict[str, str]:
    table: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        table[key.strip()] = value.strip()
    return table


def _int_list(value: str) -> list[int]:
    return [int(v) for v in value.split(",") if v.strip()]


def _str_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def load_run_settings(path: str | Path) -> RunSettings:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    table = parse_config_text(path.read_text(encoding="utf-8"))
    cfg = TutorConfig()
    settings = RunSettings(cfg=cfg)
    try:
        for key, value in table.items():
            if key == "lambda":
                cfg.lambda_ = float(value)
            elif key == "m":
                cfg.m = int(value)
            elif key == "n":
                cfg.n = int(value)
            elif key == "k_gen":
                cfg.k_gen = int(value)
            elif key == "zero_few_split":
                parts = _int_list(value)
                if len(parts) != 2:
                    raise ConfigError("zero_few_split needs two integers")
                cfg.zero_few_split = (parts[0], parts[1])
            elif key == "epochs":
                cfg.epochs = int(value)
            elif key == "assess_epochs":
                cfg.assess_epochs = tuple(_int_list(value))
            elif key == "seed":
                cfg.seed = int(value)
            elif key == "augmentation_mode":
                cfg.augmentation_mode = value
            elif key == "max_new_per_assessment":
                cfg.max_new_per_assessment = int(value)
            elif key == "max_quantities":
                cfg.max_quantities = int(value)
            elif key == "parallel":
                cfg.parallel = int(value)
            elif key == "teacher.kind":
                cfg.teacher_kind = value
            elif key == "teacher.base_url":
                settings.teacher_base_url = value
            elif key == "teacher.model":
                settings.teacher_model = value
            elif key == "teacher.temperature":
                settings.teacher_temperature = float(value)
            elif key == "student.kind":
                cfg.student_kind = value
            elif key == "student.exec":
                settings.student_exec = value
            elif key == "data.train":
                settings.data_train = _str_list(value)
            elif key == "data.test":
                settings.data_test = value
            elif key == "data.setting":
                settings.data_setting = value
            elif key == "data.folds":
                settings.data_folds = int(value)
            elif key == "data.extra":
                settings.data_extra = _str_list(value)
            elif key == "out.dir":
                settings.out_dir = value
            else:
                raise ConfigError(f"unknown config key {key!r}")
    except ValueError as exc:
        raise ConfigError(f"bad value in {path}: {exc}") from exc
    if cfg.teacher_kind not in TEACHER_KINDS:
        raise ConfigError(f"teacher.kind must be one of {TEACHER_KINDS}")
    if cfg.student_kind not in STUDENT_KINDS:
        raise ConfigError(f"student.kind must be one of {STUDENT_KINDS}")
    cfg.validate()
    return settings


def build_teacher(settings: RunSettings) -> TeacherClient:
    if settings.cfg.teacher_kind == "mock":
        return MockTeacher(seed=settings.cfg.seed)
    if not settings.teacher_base_url:
        raise ConfigError("teacher.base_url is required for the llm teacher")
    return LlmTeacher(
        TeacherHttpConfig(
            base_url=settings.teacher_base_url,
            model=settings.teacher_model,
            temperature=settings.teacher_temperature,
        )
    )


def build_student(settings: RunSettings) -> StudentSolver:
    if settings.cfg.student_kind == "retrieval":
        return RetrievalStudent()
    if not settings.student_exec:
        raise ConfigError("student.exec is required for the external student")
    return ExternalStudent(ExternalStudentConfig(argv=shlex.split(settings.student_exec)))


def load_setting_runs(settings: RunSettings) -> list[SettingRun]:
    if not settings.data_train:
        raise ConfigError("data.train is required")
    train_corpora: list[Corpus] = [ingest(p)[0] for p in settings.data_train]
    if settings.data_setting == "ood":
        if not settings.data_test:
            raise ConfigError("data.test is required for the ood setting")
        test_corpus = ingest(settings.data_test)[0]
        return build_setting(
            OutOfDistribution(train=train_corpora, test=test_corpus, seed=settings.cfg.seed)
        )
    if settings.data_setting == "id":
        if len(train_corpora) != 1:
            raise ConfigError("the id setting takes exactly one data.train corpus")
        extra = [ingest(p)[0] for p in settings.data_extra]
        return build_setting(
            InDistribution(
                corpus=train_corpora[0],
                extra_train=extra,
                folds=settings.data_folds,
                seed=settings.cfg.seed,
            )
        )
    raise ConfigError("data.setting must be 'ood' or 'id'")
