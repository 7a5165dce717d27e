"""Workflow phases and their legal transitions.

The design process runs ReviewDrivers, DomainModel, IterationPlanning and
Skeleton once, then loops iterations of steps 2-7 until the plan is
exhausted or the reviewer finishes the session.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import EngineError

FIRST_STEP = 2
LAST_STEP = 7


@dataclass(frozen=True)
class Phase:
    name: str  # review-drivers | domain-model | iteration-planning | skeleton | iterating | finished
    iteration: int = 0
    step: int = 0

    def __post_init__(self) -> None:
        if self.name == "iterating":
            if self.iteration < 1 or not (FIRST_STEP <= self.step <= LAST_STEP):
                raise EngineError(
                    f"no such phase: iterating({self.iteration},{self.step})",
                    code="ILLEGAL_PHASE",
                )
        elif self.iteration or self.step:
            raise EngineError(
                f"phase {self.name} carries no iteration or step", code="ILLEGAL_PHASE"
            )

    @property
    def is_iterating(self) -> bool:
        return self.name == "iterating"

    @property
    def finished(self) -> bool:
        return self.name == "finished"

    def token(self) -> str:
        if self.is_iterating:
            return f"iterating:{self.iteration}:{self.step}"
        return self.name

    @classmethod
    def parse(cls, token: str) -> "Phase":
        m = re.fullmatch(r"iterating:(\d+):(\d+)", token)
        if m:
            return cls("iterating", int(m.group(1)), int(m.group(2)))
        if token in _SEQUENCE or token == "finished":
            return cls(token)
        raise EngineError(f"unknown phase token {token!r}", code="ILLEGAL_PHASE")

    def __str__(self) -> str:
        if self.is_iterating:
            return f"Iterating({self.iteration}, step {self.step})"
        return {
            "review-drivers": "ReviewDrivers",
            "domain-model": "DomainModel",
            "iteration-planning": "IterationPlanning",
            "skeleton": "Skeleton",
            "finished": "Finished",
        }[self.name]


REVIEW_DRIVERS = Phase("review-drivers")
DOMAIN_MODEL = Phase("domain-model")
ITERATION_PLANNING = Phase("iteration-planning")
SKELETON = Phase("skeleton")
FINISHED = Phase("finished")

_SEQUENCE = ("review-drivers", "domain-model", "iteration-planning", "skeleton")


def iterating(iteration: int, step: int) -> Phase:
    return Phase("iterating", iteration, step)


def next_phase(phase: Phase, plan_size: int) -> Phase:
    """The phase an approve gate advances to. ``plan_size`` bounds the loop."""
    if phase.finished:
        raise EngineError("the session is finished", code="SESSION_FINISHED")
    if phase.is_iterating:
        if phase.step < LAST_STEP:
            return iterating(phase.iteration, phase.step + 1)
        if phase.iteration < plan_size:
            return iterating(phase.iteration + 1, FIRST_STEP)
        return FINISHED
    i = _SEQUENCE.index(phase.name)
    if i + 1 < len(_SEQUENCE):
        return Phase(_SEQUENCE[i + 1])
    return iterating(1, FIRST_STEP)


def phase_order_key(phase: Phase) -> tuple[int, int, int]:
    """Total order over phases; approve gates move strictly upward."""
    if phase.finished:
        return (2, 0, 0)
    if phase.is_iterating:
        return (1, phase.iteration, phase.step)
    return (0, _SEQUENCE.index(phase.name), 0)
