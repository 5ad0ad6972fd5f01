"""Solver-side interface shared by the built-in and external students."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

from .. import expr
from ..problem import MappedProblem


@dataclass(frozen=True)
class SolveResult:
    """Either a predicted equation template or an abstention."""

    equation: Optional[expr.Node] = None
    abstained: bool = False
    diagnostics: float = 0.0  # similarity score or model confidence

    def __post_init__(self):
        if self.abstained == (self.equation is not None):
            raise ValueError("exactly one of equation/abstained must be meaningful")


class StudentSolver(Protocol):
    def reset(self, seed: int) -> None:
        """Forget all training; subsequent behavior depends only on seed + train calls."""
        ...

    def train(self, problems: Sequence[MappedProblem], passes: int = 1) -> None:
        ...

    def solve(self, problem: MappedProblem) -> SolveResult:
        ...
