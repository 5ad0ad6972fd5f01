"""Exception hierarchy shared across the package.

Everything raised on purpose derives from TutorLoopError so the CLI can
distinguish runtime failures (exit 2) from usage mistakes (exit 1).
"""

from __future__ import annotations


class TutorLoopError(Exception):
    """Base class for all tutorloop errors."""


# --- equation text -> AST -------------------------------------------------

class EquationError(TutorLoopError):
    """The equation string could not be turned into a valid template."""


class LexError(EquationError):
    pass


class EquationSyntaxError(EquationError):
    pass


class EmptyEquationError(EquationError):
    pass


# --- AST evaluation -------------------------------------------------------

class EvaluationError(TutorLoopError):
    """Evaluating a template failed."""


class UnboundPlaceholderError(EvaluationError):
    pass


class DivisionByZeroError(EvaluationError):
    pass


class NonIntegerExponentError(EvaluationError):
    pass


# --- number mapping / problem validation ----------------------------------

class MappingError(TutorLoopError):
    """Raw text plus equation could not be mapped into a problem."""


class NoQuantitiesError(MappingError):
    pass


class PlaceholderRangeError(MappingError):
    """Template references a placeholder beyond the quantity count."""


class InvalidProblemError(TutorLoopError):
    """A mapped problem violates one of its structural invariants."""


# --- dataset --------------------------------------------------------------

class MalformedFileError(TutorLoopError):
    pass


class AllRecordsDroppedError(TutorLoopError):
    pass


class TooFewProblemsError(TutorLoopError):
    pass


class LeakageError(TutorLoopError):
    """A train set still shares a fingerprint with its test set."""


# --- teacher --------------------------------------------------------------

class TeacherError(TutorLoopError):
    pass


class AuthError(TeacherError):
    pass


class TransportError(TeacherError):
    pass


class BudgetExceededError(TeacherError):
    pass


class EmptyBookError(TutorLoopError):
    pass


# --- external student -----------------------------------------------------

class StudentError(TutorLoopError):
    pass


class SpawnError(StudentError):
    pass


class ProtocolError(StudentError):
    pass


class ProtocolTimeout(StudentError):
    pass


# --- configuration --------------------------------------------------------

class ConfigError(TutorLoopError):
    pass
