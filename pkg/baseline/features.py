"""
Schema-agnostic count features for the logistic-regression baseline.
"""

from typing import List, Sequence

import numpy as np

from events.schema import CourseSchema
from events.tokenizer import TokenizedSequence, truncate_to_week

FEATURE_NAMES = (
    "content_views",
    "quiz_correct",
    "quiz_incorrect",
    "project_pass",
    "project_fail",
    "active_days",
    "total_events",
)
NUM_FEATURES = len(FEATURE_NAMES)


def _block_edges(schema: CourseSchema) -> np.ndarray:
    i, j, k = schema.num_contents, schema.num_quizzes, schema.num_projects
    # upper bounds of the content | quiz ok | quiz bad | project pass | project fail blocks
    return np.cumsum([i, j, j, k, k])


def featurize(schema: CourseSchema, sequence: TokenizedSequence, week: int) -> np.ndarray:
    """Counts over the week-``week`` window; an empty window gives zeros."""
    window = truncate_to_week(sequence, week)
    features = np.zeros(NUM_FEATURES, dtype=np.float64)
    if len(window) == 0:
        return features
    blocks = np.searchsorted(_block_edges(schema), np.asarray(window.actions), side="right")
    features[:5] = np.bincount(blocks, minlength=5)[:5]
    features[5] = len(set(window.days))
    features[6] = len(window)
    return features


def featurize_all(schema: CourseSchema, sequences: Sequence[TokenizedSequence], week: int) -> np.ndarray:
    if not sequences:
        return np.zeros((0, NUM_FEATURES))
    return np.stack([featurize(schema, s, week) for s in sequences])
