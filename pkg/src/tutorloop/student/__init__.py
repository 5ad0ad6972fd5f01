from .base import SolveResult, StudentSolver
from .external import ExternalStudent, ExternalStudentConfig, run_conformance
from .retrieval import RetrievalStudent

__all__ = [
    "SolveResult",
    "StudentSolver",
    "ExternalStudent",
    "ExternalStudentConfig",
    "run_conformance",
    "RetrievalStudent",
]
