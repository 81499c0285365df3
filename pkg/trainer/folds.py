"""
Student-level stratified splits.
"""

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from sklearn.model_selection import KFold, StratifiedKFold, train_test_split

from errors import StratificationError


@dataclass
class FoldAssignment:
    """Fold index in [0, k) per student, in dataset order."""
    folds: np.ndarray
    k: int
    student_ids: List[str] = None

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.folds == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.folds != fold)

    def sizes(self) -> List[int]:
        return [int((self.folds == f).sum()) for f in range(self.k)]

    def as_mapping(self) -> Dict[str, int]:
        ids = self.student_ids if self.student_ids is not None else [str(i) for i in range(len(self.folds))]
        return {sid: int(f) for sid, f in zip(ids, self.folds)}


def _binary_labels(labels: Sequence[int]) -> np.ndarray:
    labels = np.asarray(labels).reshape(-1)
    unknown = set(np.unique(labels).tolist()) - {0, 1}
    if unknown:
        raise StratificationError(f"Labels must be 0 or 1, found {sorted(unknown)}")
    return labels.astype(np.int64)


def _assignment(splits, n: int, k: int, student_ids) -> FoldAssignment:
    folds = np.empty(n, dtype=np.int64)
    for fold, (_, test_idx) in enumerate(splits):
        folds[test_idx] = fold
    return FoldAssignment(folds, k, list(student_ids) if student_ids is not None else None)


def stratified_kfold(labels: Sequence[int], k: int = 5, seed: int = 0, student_ids: Sequence[str] = None) -> FoldAssignment:
    """
    Assign students to k folds with matching positive-label shares.

    Every fold holds floor or ceil of its share of each class, and the
    assignment is a pure function of (labels, k, seed).

    Raises:
        StratificationError: Labels outside {0, 1}, a single class, or a
            class with fewer members than folds
    """
    labels = _binary_labels(labels)
    if k < 2:
        raise StratificationError(f"k must be >= 2, got {k}")
    positives, negatives = int(labels.sum()), int(labels.size - labels.sum())
    if positives == 0 or negatives == 0:
        raise StratificationError(f"Cannot stratify a single-class dataset ({positives} positives, {negatives} negatives)")
    if min(positives, negatives) < k:
        raise StratificationError(f"{k} folds need at least {k} students per class ({positives} positives, {negatives} negatives)")

    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    return _assignment(splitter.split(np.zeros(labels.size), labels), labels.size, k, student_ids)


def holdout_split(labels: Sequence[int], fraction: float, seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Stratified (fit, hold-out) index split for early stopping.

    The hold-out takes ceil(fraction * n) students, at least one per class.
    Returns an empty hold-out when a class has fewer than two members or the
    split would leave a class absent from the fit part.
    """
    labels = _binary_labels(labels)
    n = labels.size
    counts = np.bincount(labels, minlength=2)
    take = max(int(np.ceil(fraction * n)), 2)
    if counts.min() < 2 or n - take < 2:
        return np.arange(n), np.zeros(0, dtype=np.int64)
    fit_idx, held_idx = train_test_split(np.arange(n), test_size=take, stratify=labels, random_state=seed)
    return np.sort(fit_idx), np.sort(held_idx)


def kfold(n: int, k: int = 5, seed: int = 0, student_ids: Sequence[str] = None) -> FoldAssignment:
    """Unstratified k-fold assignment, for students whose labels are unknown."""
    if k < 2 or n < k:
        raise StratificationError(f"{n} students cannot fill {k} folds")
    splitter = KFold(n_splits=k, shuffle=True, random_state=seed)
    return _assignment(splitter.split(np.zeros(n)), n, k, student_ids)
