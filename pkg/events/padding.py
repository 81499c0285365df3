"""
Pre-padding of token sequences into fixed-length batches.
"""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from log.logger import get_logger
from numeric.ops import PAD
from .tokenizer import TokenizedSequence

logger = get_logger("Padding")


@dataclass(frozen=True)
class PaddedBatch:
    """B sequences of common length t_max; padding occupies a prefix of each row.

    ``mask`` is True on real events. Padded positions hold PAD in both token
    arrays, which the embedding maps to the zero vector.
    """
    student_ids: List[str]
    actions: np.ndarray
    deltas: np.ndarray
    mask: np.ndarray
    t_max: int

    @property
    def size(self) -> int:
        return self.actions.shape[0]

    @property
    def padding(self) -> np.ndarray:
        """Number of padded steps per row."""
        return self.t_max - self.mask.sum(axis=1)


def pad_batch(seqs: Sequence[TokenizedSequence], t_max: int) -> PaddedBatch:
    """Prepend padding markers so every row has length ``t_max``.

    Rows longer than ``t_max`` keep their most recent ``t_max`` events.
    """
    if t_max < 1:
        raise ValueError(f"t_max must be >= 1, got {t_max}")
    batch = len(seqs)
    actions = np.full((batch, t_max), PAD, dtype=np.int64)
    deltas = np.full((batch, t_max), PAD, dtype=np.int64)
    mask = np.zeros((batch, t_max), dtype=bool)

    truncated = 0
    for row, seq in enumerate(seqs):
        a, d = seq.actions, seq.deltas
        if len(a) > t_max:
            a, d = a[-t_max:], d[-t_max:]
            truncated += 1
        n = len(a)
        if n == 0:
            continue
        actions[row, t_max - n:] = a
        deltas[row, t_max - n:] = d
        mask[row, t_max - n:] = True

    if truncated:
        logger.debug(f"pad_batch: {truncated} sequence(s) longer than t_max={t_max}, kept most recent events")

    return PaddedBatch([s.student_id for s in seqs], actions, deltas, mask, t_max)
