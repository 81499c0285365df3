"""
AUC and AUC recovery rate.

AUC is reported on the 0-100 scale throughout.
"""

from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from errors import UndefinedAUCError, UndefinedARRError


def _check_inputs(scores, labels):
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    labels = np.asarray(labels).reshape(-1)
    if scores.shape != labels.shape:
        raise ValueError(f"{scores.size} scores but {labels.size} labels")
    unknown = set(np.unique(labels).tolist()) - {0, 1}
    if unknown:
        raise ValueError(f"Labels must be 0 or 1, found {sorted(unknown)}")
    positives = labels == 1
    n_pos = int(positives.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUCError(f"AUC needs both classes (positives={n_pos}, negatives={n_neg})")
    return scores, positives, n_pos, n_neg


def auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """
    Mann-Whitney AUC in percent, ties counted as half.

    Uses average ranks, so it runs in O(n log n) and agrees exactly with the
    pairwise definition.

    Raises:
        UndefinedAUCError: If only one class is present
        ValueError: Lengths differ, or a label is not 0 or 1
    """
    scores, positives, n_pos, n_neg = _check_inputs(scores, labels)
    ranks = rankdata(scores, method="average")
    u = ranks[positives].sum() - n_pos * (n_pos + 1) / 2.0
    return 100.0 * u / (n_pos * n_neg)


def pairwise_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """O(n^2) reference: share of (positive, negative) pairs ranked correctly."""
    scores, positives, n_pos, n_neg = _check_inputs(scores, labels)
    pos = scores[positives][:, None]
    neg = scores[~positives][None, :]
    wins = (pos > neg).sum() + 0.5 * (pos == neg).sum()
    return 100.0 * wins / (n_pos * n_neg)


def try_auc(scores, labels) -> Optional[float]:
    """auc() or None where it is undefined."""
    try:
        return auc(scores, labels)
    except UndefinedAUCError:
        return None


def arr(auc_baseline: float, auc_adapted: float, auc_oracle: float) -> float:
    """
    AUC recovery rate: share of the baseline-to-oracle gap closed by adaptation.

    The oracle itself recovers 1.0 by definition.

    Raises:
        UndefinedARRError: If oracle and baseline AUC coincide
    """
    gap = auc_oracle - auc_baseline
    if gap == 0:
        raise UndefinedARRError(f"ARR undefined: oracle AUC equals baseline AUC ({auc_oracle})")
    return (auc_adapted - auc_baseline) / gap


def mean_or_none(values: Iterable[Optional[float]]) -> Optional[float]:
    defined = [v for v in values if v is not None]
    return float(np.mean(defined)) if defined else None
