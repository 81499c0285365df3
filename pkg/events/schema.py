"""
Course schemas, raw events and the ordinal action encoding.

The action vocabulary of a course with i contents, j quizzes and k projects
has L = i + 2j + 2k tokens laid out as

    [contents | quiz correct | quiz incorrect | project pass | project fail]

Each block is indexed by the 1-based ordinal of the item within its kind, so
"third quiz answered correctly" means the same token role in every course.
The layout is frozen: checkpoints depend on it.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Tuple

from errors import SchemaMismatchError


class EventKind(str, Enum):
    CONTENT = "content"
    QUIZ = "quiz"
    PROJECT = "project"


class Outcome(str, Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"
    PASS = "pass"
    FAIL = "fail"


VALID_OUTCOMES = {
    EventKind.CONTENT: (None,),
    EventKind.QUIZ: (Outcome.CORRECT, Outcome.INCORRECT),
    EventKind.PROJECT: (Outcome.PASS, Outcome.FAIL),
}


@dataclass(frozen=True)
class CourseSchema:
    """Shape of a course's action vocabulary."""
    num_contents: int
    num_quizzes: int
    num_projects: int
    delta_cap: int = 30

    def __post_init__(self):
        if min(self.num_contents, self.num_quizzes, self.num_projects) < 0:
            raise SchemaMismatchError(f"Negative item count in schema {self}")
        if self.delta_cap < 1:
            raise SchemaMismatchError(f"delta_cap must be >= 1, got {self.delta_cap}")

    @property
    def vocab_size(self) -> int:
        return vocab_size(self)

    @property
    def delta_buckets(self) -> int:
        """Number of delta tokens, 0..delta_cap inclusive."""
        return self.delta_cap + 1

    def count(self, kind: EventKind) -> int:
        return {
            EventKind.CONTENT: self.num_contents,
            EventKind.QUIZ: self.num_quizzes,
            EventKind.PROJECT: self.num_projects,
        }[kind]

    def to_dict(self) -> dict:
        return {
            "num_contents": self.num_contents,
            "num_quizzes": self.num_quizzes,
            "num_projects": self.num_projects,
            "delta_cap": self.delta_cap,
        }


@dataclass(frozen=True)
class RawEvent:
    """One time-stamped student action."""
    student_id: str
    kind: EventKind
    ordinal: int
    outcome: Optional[Outcome]
    day: int

    def to_dict(self) -> dict:
        return {
            "student_id": self.student_id,
            "kind": self.kind.value,
            "ordinal": self.ordinal,
            "outcome": self.outcome.value if self.outcome is not None else None,
            "day": self.day,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RawEvent":
        try:
            outcome = data.get("outcome")
            return cls(
                student_id=str(data["student_id"]),
                kind=EventKind(data["kind"]),
                ordinal=int(data["ordinal"]),
                outcome=Outcome(outcome) if outcome is not None else None,
                day=int(data["day"]),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise SchemaMismatchError(f"Malformed event record {data}: {exc}") from exc


def vocab_size(schema: CourseSchema) -> int:
    """L = i + 2j + 2k."""
    return schema.num_contents + 2 * schema.num_quizzes + 2 * schema.num_projects


def validate_event(schema: CourseSchema, event: RawEvent) -> None:
    bound = schema.count(event.kind)
    if not 1 <= event.ordinal <= bound:
        raise SchemaMismatchError(
            f"{event.kind.value} ordinal {event.ordinal} outside 1..{bound} (student {event.student_id})"
        )
    if event.outcome not in VALID_OUTCOMES[event.kind]:
        raise SchemaMismatchError(
            f"Outcome {event.outcome} not valid for {event.kind.value} (student {event.student_id})"
        )
    if event.day < 0:
        raise SchemaMismatchError(f"Negative day stamp {event.day} (student {event.student_id})")


def action_token(schema: CourseSchema, event: RawEvent) -> int:
    """Map an event onto its position in the frozen token layout."""
    validate_event(schema, event)
    i, j, k = schema.num_contents, schema.num_quizzes, schema.num_projects
    n = event.ordinal - 1
    if event.kind is EventKind.CONTENT:
        return n
    if event.kind is EventKind.QUIZ:
        return i + n if event.outcome is Outcome.CORRECT else i + j + n
    return i + 2 * j + n if event.outcome is Outcome.PASS else i + 2 * j + k + n


def token_role(schema: CourseSchema, token: int) -> Tuple[EventKind, int, Optional[Outcome]]:
    """Inverse of action_token: (kind, ordinal, outcome) of a token."""
    i, j, k = schema.num_contents, schema.num_quizzes, schema.num_projects
    if not 0 <= token < vocab_size(schema):
        raise SchemaMismatchError(f"Token {token} outside [0, {vocab_size(schema)})")
    blocks = (
        (i, EventKind.CONTENT, None),
        (j, EventKind.QUIZ, Outcome.CORRECT),
        (j, EventKind.QUIZ, Outcome.INCORRECT),
        (k, EventKind.PROJECT, Outcome.PASS),
        (k, EventKind.PROJECT, Outcome.FAIL),
    )
    offset = token
    for size, kind, outcome in blocks:
        if offset < size:
            return kind, offset + 1, outcome
        offset -= size
    raise SchemaMismatchError(f"Token {token} could not be decoded")  # unreachable for valid tokens


def enumerate_actions(schema: CourseSchema) -> Iterator[Tuple[EventKind, int, Optional[Outcome]]]:
    """Every valid (kind, ordinal, outcome) triple of a schema."""
    for kind, outcomes in VALID_OUTCOMES.items():
        for ordinal in range(1, schema.count(kind) + 1):
            for outcome in outcomes:
                yield kind, ordinal, outcome
