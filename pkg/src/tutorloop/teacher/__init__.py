from .base import Candidate, GenerationMode, TeacherClient, gather_candidates
from .filtering import FilterReport, FilterVerdict, filter_candidates
from .llm import LlmTeacher, TeacherHttpConfig
from .mock import MockTeacher, mock_generate

__all__ = [
    "Candidate",
    "GenerationMode",
    "TeacherClient",
    "gather_candidates",
    "FilterReport",
    "FilterVerdict",
    "filter_candidates",
    "LlmTeacher",
    "TeacherHttpConfig",
    "MockTeacher",
    "mock_generate",
]
