"""
Turn per-student event logs into (action_token, delta_token) sequences.
"""

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from errors import EmptyInputError, OrderingError, DatasetValidationError
from .schema import CourseSchema, RawEvent, action_token

DAYS_PER_WEEK = 7


@dataclass(frozen=True)
class TokenizedSequence:
    """Ordered tokens of one student; ``days`` keeps the source day of each token."""
    student_id: str
    actions: Tuple[int, ...]
    deltas: Tuple[int, ...]
    days: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def tokens(self) -> List[Tuple[int, int]]:
        return list(zip(self.actions, self.deltas))

    @property
    def first_day(self) -> Optional[int]:
        return self.days[0] if self.days else None


def delta_token(prev_day: Optional[int], cur_day: int, delta_cap: int) -> int:
    """Day gap to the previous event, clamped to ``delta_cap``; 0 for the first event."""
    if prev_day is None:
        return 0
    if cur_day < prev_day:
        raise OrderingError(f"Day {cur_day} precedes previous event day {prev_day}")
    return min(cur_day - prev_day, delta_cap)


def tokenize_student(schema: CourseSchema, events: Sequence[RawEvent]) -> TokenizedSequence:
    """Sort one student's events by day (stable) and encode them."""
    if not events:
        raise EmptyInputError("Cannot tokenize an empty event list")
    student_ids = {e.student_id for e in events}
    if len(student_ids) != 1:
        raise DatasetValidationError(f"tokenize_student got events of several students: {sorted(student_ids)}")

    ordered = sorted(events, key=lambda e: e.day)
    actions, deltas, days = [], [], []
    prev_day = None
    for event in ordered:
        actions.append(action_token(schema, event))
        deltas.append(delta_token(prev_day, event.day, schema.delta_cap))
        days.append(event.day)
        prev_day = event.day
    return TokenizedSequence(ordered[0].student_id, tuple(actions), tuple(deltas), tuple(days))


def tokenize_course(schema: CourseSchema, events: Iterable[RawEvent]) -> Dict[str, TokenizedSequence]:
    """Group a course log by student (first-appearance order) and tokenize each."""
    grouped: "OrderedDict[str, List[RawEvent]]" = OrderedDict()
    for event in events:
        grouped.setdefault(event.student_id, []).append(event)
    return OrderedDict((sid, tokenize_student(schema, evs)) for sid, evs in grouped.items())


def truncate_to_week(seq: TokenizedSequence, week: int) -> TokenizedSequence:
    """Keep events with day < first_day + 7 * week.

    Only a suffix is removed, so the surviving delta tokens are unchanged.
    """
    if week < 1:
        raise ValueError(f"week must be >= 1, got {week}")
    if not seq.days:
        return seq
    horizon = seq.days[0] + DAYS_PER_WEEK * week
    keep = int(np.searchsorted(np.asarray(seq.days), horizon, side="left"))
    return TokenizedSequence(seq.student_id, seq.actions[:keep], seq.deltas[:keep], seq.days[:keep])


@dataclass
class LabeledDataset:
    """Sequences paired with graduation labels (1 = graduated)."""
    sequences: List[TokenizedSequence] = field(default_factory=list)
    labels: List[int] = field(default_factory=list)

    def __post_init__(self):
        if len(self.sequences) != len(self.labels):
            raise DatasetValidationError(f"{len(self.sequences)} sequences but {len(self.labels)} labels")
        ids = [s.student_id for s in self.sequences]
        if len(set(ids)) != len(ids):
            raise DatasetValidationError("Student ids must be unique within a dataset")
        if any(label not in (0, 1) for label in self.labels):
            raise DatasetValidationError("Labels must be 0 or 1")

    def __len__(self) -> int:
        return len(self.sequences)

    @property
    def student_ids(self) -> List[str]:
        return [s.student_id for s in self.sequences]

    def label_array(self) -> np.ndarray:
        return np.asarray(self.labels, dtype=np.int64)

    def max_length(self) -> int:
        return max((len(s) for s in self.sequences), default=0)

    def subset(self, indices: Sequence[int]) -> "LabeledDataset":
        return LabeledDataset([self.sequences[i] for i in indices], [self.labels[i] for i in indices])

    def with_labels(self, labels: Sequence[int]) -> "LabeledDataset":
        return LabeledDataset(list(self.sequences), [int(y) for y in labels])

    def truncate(self, week: int) -> Tuple["LabeledDataset", List[str]]:
        """Week-w view of the dataset plus the ids of students left with no events."""
        kept_seqs, kept_labels, dropped = [], [], []
        for seq, label in zip(self.sequences, self.labels):
            cut = truncate_to_week(seq, week)
            if len(cut) == 0:
                dropped.append(seq.student_id)
                continue
            kept_seqs.append(cut)
            kept_labels.append(label)
        return LabeledDataset(kept_seqs, kept_labels), dropped

    @classmethod
    def from_mapping(cls, sequences: Dict[str, TokenizedSequence], labels: Dict[str, int]) -> "LabeledDataset":
        """Pair sequences with labels in the order of the sequence mapping."""
        missing = [sid for sid in sequences if sid not in labels]
        if missing:
            raise DatasetValidationError(f"{len(missing)} students have events but no label, e.g. {missing[:3]}")
        ids = list(sequences)
        return cls([sequences[sid] for sid in ids], [int(labels[sid]) for sid in ids])
