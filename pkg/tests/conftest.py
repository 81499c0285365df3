import os
import sys
from pathlib import Path

os.environ["GRITNET_LOG_TO_FILE"] = "false"
os.environ.setdefault("GRITNET_LOG_LEVEL", "WARNING")
os.environ.setdefault("GRITNET_WORKERS", "1")

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

import numpy as np
import pytest

from config.config import GritNetConfig, update_config
from events.schema import CourseSchema, EventKind, Outcome, RawEvent
from events.tokenizer import LabeledDataset, tokenize_student
from numeric.tensor import get_precision, set_precision

update_config({"workers": 1})


@pytest.fixture
def toy_schema():
    # L = 3 + 2*2 + 2*1 = 9, delta buckets 0..5
    return CourseSchema(num_contents=3, num_quizzes=2, num_projects=1, delta_cap=5)


@pytest.fixture
def tiny_config(toy_schema):
    return GritNetConfig(
        vocab_size=toy_schema.vocab_size,
        delta_buckets=toy_schema.delta_buckets,
        embedding_dim=4,
        hidden_dim=3,
        seed=0,
    )


@pytest.fixture
def double_precision():
    previous = get_precision()
    set_precision("double")
    yield
    set_precision(previous)


def make_student(schema, student_id, graduate, rng):
    """A short log; graduates pass the project, the others fail it and answer quizzes wrong."""
    day = int(rng.integers(0, 3))
    events = [RawEvent(student_id, EventKind.CONTENT, 1, None, day)]
    for ordinal in range(2, schema.num_contents + 1):
        day += int(rng.integers(0, 3))
        events.append(RawEvent(student_id, EventKind.CONTENT, ordinal, None, day))
    outcome = Outcome.CORRECT if graduate else Outcome.INCORRECT
    for ordinal in range(1, schema.num_quizzes + 1):
        day += int(rng.integers(1, 4))
        events.append(RawEvent(student_id, EventKind.QUIZ, ordinal, outcome, day))
    day += int(rng.integers(1, 4))
    events.append(RawEvent(student_id, EventKind.PROJECT, 1, Outcome.PASS if graduate else Outcome.FAIL, day))
    return events


def make_events(schema, n, seed=0, positive_share=0.5):
    rng = np.random.default_rng(seed)
    events, labels = [], {}
    for i in range(n):
        sid = f"t{i:03d}"
        label = int(i < round(n * positive_share))
        events.extend(make_student(schema, sid, label, rng))
        labels[sid] = label
    return events, labels


@pytest.fixture
def toy_dataset(toy_schema):
    events, labels = make_events(toy_schema, 24, seed=1)
    by_student = {}
    for event in events:
        by_student.setdefault(event.student_id, []).append(event)
    sequences = [tokenize_student(toy_schema, evs) for evs in by_student.values()]
    return LabeledDataset(sequences, [labels[s.student_id] for s in sequences])
