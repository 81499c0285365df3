"""
GritNet: event embedding -> bidirectional LSTM -> global max pooling -> FC -> sigmoid.

Padded steps enter the BLSTM as zero embeddings without masking, so the
recurrences see bias-driven activations there. With ``pool_padding`` off the
padded steps are excluded from the max pooling only.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np

from config.config import GritNetConfig
from errors import ShapeError
from events.padding import PaddedBatch, pad_batch
from events.tokenizer import TokenizedSequence
from numeric import ops
from numeric.tensor import Tensor, get_dtype, no_grad
from .params import GritNetParams, init_params

# Probabilities are kept strictly inside (0, 1)
PROBABILITY_CLIP = 1e-12


class GritNet:
    """A GritNet model: configuration plus trainable state."""

    def __init__(self, config: GritNetConfig, params: Optional[GritNetParams] = None):
        self.config = config
        self.params = params if params is not None else init_params(config)

    # ------------------------------------------------------------------
    # Building blocks
    # ------------------------------------------------------------------

    def embed(self, batch: PaddedBatch) -> Tensor:
        """(B, T, E) event embeddings; padding markers give zero vectors."""
        return ops.embed_lookup(self.params.embedding, batch.actions, batch.deltas, self.config.vocab_size)

    def _run_direction(self, inputs: Tensor, prefix: str, reverse: bool) -> Tensor:
        weights = (getattr(self.params, f"{prefix}_W"), getattr(self.params, f"{prefix}_U"), getattr(self.params, f"{prefix}_b"))
        batch, steps = inputs.shape[0], inputs.shape[1]
        h = Tensor(np.zeros((batch, self.config.hidden_dim), dtype=inputs.data.dtype))
        c = Tensor(np.zeros((batch, self.config.hidden_dim), dtype=inputs.data.dtype))
        outputs: List[Optional[Tensor]] = [None] * steps
        order = range(steps - 1, -1, -1) if reverse else range(steps)
        for t in order:
            h, c = ops.lstm_cell(ops.time_step(inputs, t), h, c, weights)
            outputs[t] = h
        return ops.stack(outputs, axis=1)

    def sequence_embeddings(self, batch: PaddedBatch) -> Tensor:
        """(B, 2H) GMP output: per-feature max over time of the BLSTM outputs."""
        if batch.t_max < 1:
            raise ShapeError("Batch has no time steps")
        inputs = self.embed(batch)
        forward = self._run_direction(inputs, "fwd", reverse=False)
        backward = self._run_direction(inputs, "bwd", reverse=True)
        outputs = ops.concat([forward, backward], axis=2)
        mask = None if self.config.pool_padding else batch.mask
        pooled, _ = ops.max_over_time(outputs, mask)
        return pooled

    def head(self, embeddings: Tensor) -> Tensor:
        """(B, 1) logits of the FC layer."""
        return ops.add(ops.matmul(embeddings, self.params.fc_W), self.params.fc_b)

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------

    def logits(self, batch: PaddedBatch) -> Tensor:
        return self.head(self.sequence_embeddings(batch))

    def forward(self, batch: PaddedBatch) -> Tuple[np.ndarray, Tensor]:
        """Graduation probabilities (B,) and the sequence embeddings (B, 2H)."""
        embeddings = self.sequence_embeddings(batch)
        probs = to_probabilities(self.head(embeddings))
        return probs, embeddings

    def loss(self, batch: PaddedBatch, labels: np.ndarray) -> Tensor:
        return ops.bce_with_logits(self.logits(batch), labels)

    def predict(self, sequences: Sequence[TokenizedSequence], t_max: int, batch_size: int = 64) -> np.ndarray:
        """Probabilities for many sequences, padded to ``t_max`` in chunks."""
        with no_grad():
            probs = [self.forward(pad_batch(sequences[i:i + batch_size], t_max))[0]
                     for i in range(0, len(sequences), batch_size)]
        return np.concatenate(probs) if probs else np.zeros(0)

    def embed_sequences(self, sequences: Sequence[TokenizedSequence], t_max: int, batch_size: int = 64) -> np.ndarray:
        """GMP embeddings (N, 2H) for many sequences; no graph is kept."""
        with no_grad():
            chunks = [self.sequence_embeddings(pad_batch(sequences[i:i + batch_size], t_max)).data
                      for i in range(0, len(sequences), batch_size)]
        return np.concatenate(chunks) if chunks else np.zeros((0, 2 * self.config.hidden_dim), dtype=get_dtype())

    def copy(self) -> "GritNet":
        return GritNet(self.config.model_copy(), self.params.copy())


def to_probabilities(logits: Tensor) -> np.ndarray:
    probs = ops.probabilities(Tensor(np.asarray(logits.data, dtype=np.float64)))
    return np.clip(probs, PROBABILITY_CLIP, 1.0 - PROBABILITY_CLIP)
