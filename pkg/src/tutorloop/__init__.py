"""tutorloop: a tutor-student training loop for math word problem solvers.

A teacher (mock or LLM-backed) generates an exercise book and customized
exercises targeted at a student solver's observed failures, progressively
growing its training set, with full harnesses for strategy, book-size and
augmentation-schedule comparisons.
"""

__version__ = "0.1.0"

from . import dataset, expr, problem, report, synth, textbank
from .loop import (
    AssessmentRecord,
    BookEntry,
    ExerciseBook,
    TutorConfig,
    assess,
    build_book,
    compare_augmentation,
    expand,
    initial_augment,
    run,
    sweep_book_size,
    sweep_lambda,
)
from .problem import MappedProblem, Quantity, answers_equal, fingerprint, map_numbers
from .report import RunReport, aggregate_folds, value_accuracy
from .student import ExternalStudent, ExternalStudentConfig, RetrievalStudent, SolveResult
from .teacher import (
    Candidate,
    FilterReport,
    GenerationMode,
    LlmTeacher,
    MockTeacher,
    TeacherHttpConfig,
    filter_candidates,
)

__all__ = [
    "__version__",
    "dataset",
    "expr",
    "problem",
    "report",
    "synth",
    "textbank",
    "AssessmentRecord",
    "BookEntry",
    "ExerciseBook",
    "TutorConfig",
    "assess",
    "build_book",
    "compare_augmentation",
    "expand",
    "initial_augment",
    "run",
    "sweep_book_size",
    "sweep_lambda",
    "MappedProblem",
    "Quantity",
    "answers_equal",
    "fingerprint",
    "map_numbers",
    "RunReport",
    "aggregate_folds",
    "value_accuracy",
    "ExternalStudent",
    "ExternalStudentConfig",
    "RetrievalStudent",
    "SolveResult",
    "Candidate",
    "FilterReport",
    "GenerationMode",
    "LlmTeacher",
    "MockTeacher",
    "TeacherHttpConfig",
    "filter_candidates",
]
