"""
Course schemas, event encoding, week truncation and batch padding.
"""

from .schema import (
    CourseSchema, EventKind, Outcome, RawEvent,
    action_token, enumerate_actions, token_role, validate_event, vocab_size,
)
from .tokenizer import (
    DAYS_PER_WEEK, LabeledDataset, TokenizedSequence,
    delta_token, tokenize_course, tokenize_student, truncate_to_week,
)
from .padding import PaddedBatch, pad_batch
from .io import CourseData, load_course, read_events, read_labels, read_schema, save_course, write_events, write_labels, write_schema
