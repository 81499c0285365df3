"""
Day-by-day student simulation for synthetic courses.

Every student gets an independent generator seeded from (seed, student index),
so a population can be simulated in any order or in parallel chunks with the
same result.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from events.schema import EventKind, Outcome, RawEvent
from parallel import run_jobs
from .course import SyntheticCourseSpec

# Logistic steepness of quiz / project success in (ability - difficulty)
QUIZ_STEEPNESS = 6.0
PROJECT_STEEPNESS = 8.0
MAX_QUIZ_ATTEMPTS = 3
CHUNK_SIZE = 250

_KIND_ORDER = {EventKind.CONTENT: 0, EventKind.QUIZ: 1, EventKind.PROJECT: 2}


@lru_cache(maxsize=32)
def curriculum(num_contents: int, num_quizzes: int, num_projects: int) -> Tuple[Tuple[EventKind, int, float], ...]:
    """Items in study order as (kind, ordinal, position in (0, 1])."""
    items = []
    for kind, count in ((EventKind.CONTENT, num_contents), (EventKind.QUIZ, num_quizzes), (EventKind.PROJECT, num_projects)):
        items.extend((kind, n, n / count) for n in range(1, count + 1))
    items.sort(key=lambda item: (item[2], _KIND_ORDER[item[0]]))
    return tuple(items)


def success_probability(ability: float, difficulty: float, steepness: float) -> float:
    return 1.0 / (1.0 + np.exp(-steepness * (ability - difficulty)))


@dataclass
class SimulatedStudent:
    student_id: str
    ability: float
    label: int
    events: List[RawEvent] = field(default_factory=list)
    num_events: int = 0


def simulate_student(spec: SyntheticCourseSpec, index: int, seed: int, record: bool = True) -> SimulatedStudent:
    """
    Simulate one student.

    The enrollment day is always active so every student leaves at least one
    event. Graduation means every project passed before ``term_days``.
    """
    rng = np.random.default_rng([seed, index])
    student_id = f"s{index:05d}"
    items = curriculum(spec.num_contents, spec.num_quizzes, spec.num_projects)
    ability = float(rng.beta(spec.ability_alpha, spec.ability_beta))
    start = int(rng.integers(0, 7))

    p_active = min(1.0, spec.hazard * (0.5 + ability))
    p_drop = spec.dropout_hazard * (1.2 - ability)
    extra_actions = max(spec.events_per_day * (0.5 + ability) - 1.0, 0.0)

    events: List[RawEvent] = []
    count = 0

    def emit(kind, ordinal, outcome, day):
        nonlocal count
        count += 1
        if record:
            events.append(RawEvent(student_id, kind, ordinal, outcome, day))

    cursor, attempts, passed, seen = 0, 0, 0, 0
    for day in range(start, spec.term_days):
        if cursor >= len(items):
            break
        if day > start:
            if rng.random() < p_drop:
                break
            if rng.random() >= p_active:
                continue
        for _ in range(1 + int(rng.poisson(extra_actions))):
            if cursor >= len(items):
                break
            if seen and rng.random() < spec.review_rate:
                emit(EventKind.CONTENT, int(rng.integers(1, seen + 1)), None, day)
                continue
            kind, ordinal, position = items[cursor]
            item_difficulty = spec.difficulty * (spec.difficulty_base + spec.difficulty_slope * position)
            if kind is EventKind.CONTENT:
                cursor += 1
                if count and rng.random() < spec.skip_rate:
                    continue
                emit(kind, ordinal, None, day)
                seen = max(seen, ordinal)
            elif kind is EventKind.QUIZ:
                if count and attempts == 0 and rng.random() < spec.skip_rate:
                    cursor += 1
                    continue
                correct = rng.random() < success_probability(ability, item_difficulty, QUIZ_STEEPNESS)
                emit(kind, ordinal, Outcome.CORRECT if correct else Outcome.INCORRECT, day)
                attempts += 1
                if correct or attempts >= MAX_QUIZ_ATTEMPTS:
                    cursor, attempts = cursor + 1, 0
            else:
                ok = rng.random() < success_probability(ability, item_difficulty, PROJECT_STEEPNESS)
                emit(kind, ordinal, Outcome.PASS if ok else Outcome.FAIL, day)
                if ok:
                    cursor += 1
                    passed += 1
                # one project submission per day
                break

    return SimulatedStudent(student_id, ability, int(passed == spec.num_projects), events, count)


@dataclass
class SimulationResult:
    events: List[RawEvent]
    labels: Dict[str, int]
    abilities: Dict[str, float]
    lengths: Dict[str, int]

    @property
    def graduation_rate(self) -> float:
        return float(np.mean(list(self.labels.values()))) if self.labels else 0.0

    @property
    def mean_length(self) -> float:
        return float(np.mean(list(self.lengths.values()))) if self.lengths else 0.0


@dataclass
class _Chunk:
    spec: SyntheticCourseSpec
    seed: int
    indices: Sequence[int]
    record: bool


def _simulate_chunk(chunk: _Chunk) -> List[SimulatedStudent]:
    return [simulate_student(chunk.spec, i, chunk.seed, chunk.record) for i in chunk.indices]


def simulate(
    spec: SyntheticCourseSpec,
    n_students: int,
    seed: Optional[int] = None,
    record: bool = True,
    workers: Optional[int] = 1,
) -> SimulationResult:
    """Simulate ``n_students``; ``record=False`` keeps only labels and lengths."""
    if n_students < 1:
        raise ValueError(f"n_students must be >= 1, got {n_students}")
    seed = spec.seed if seed is None else seed
    chunks = [_Chunk(spec, seed, range(s, min(s + CHUNK_SIZE, n_students)), record)
              for s in range(0, n_students, CHUNK_SIZE)]
    result = SimulationResult([], {}, {}, {})
    for students in run_jobs(_simulate_chunk, chunks, workers):
        for s in students:
            result.events.extend(s.events)
            result.labels[s.student_id] = s.label
            result.abilities[s.student_id] = s.ability
            result.lengths[s.student_id] = s.num_events
    return result


def generate(
    spec: SyntheticCourseSpec,
    n_students: int,
    seed: Optional[int] = None,
    workers: Optional[int] = 1,
) -> Tuple[List[RawEvent], Dict[str, int]]:
    """Event log (grouped by student, days non-decreasing) and graduation labels."""
    result = simulate(spec, n_students, seed, record=True, workers=workers)
    return result.events, result.labels
