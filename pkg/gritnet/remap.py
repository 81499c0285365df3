"""
Rebuild a model's embedding for another course's vocabulary.

Ordinal encoding gives every token a role (kind, ordinal, outcome) that is
meaningful across courses. Target tokens whose role exists in the source
course reuse the source column; target-only roles get freshly initialized
columns; source-only columns are dropped. Delta columns are copied bucket by
bucket up to the smaller cap.
"""

from dataclasses import dataclass
from typing import Dict

import numpy as np

from events.schema import CourseSchema, RawEvent, action_token, enumerate_actions
from numeric.tensor import Parameter
from .model import GritNet
from .params import glorot_uniform


@dataclass
class RemapNotice:
    source_vocab: int
    target_vocab: int
    reused: int = 0
    fresh: int = 0
    dropped: int = 0
    delta_reused: int = 0

    @property
    def changed(self) -> bool:
        return self.fresh > 0 or self.dropped > 0 or self.source_vocab != self.target_vocab

    def to_dict(self) -> Dict[str, int]:
        return {
            "source_vocab": self.source_vocab,
            "target_vocab": self.target_vocab,
            "reused": self.reused,
            "fresh": self.fresh,
            "dropped": self.dropped,
            "delta_reused": self.delta_reused,
        }


def _role_token(schema: CourseSchema, kind, ordinal, outcome) -> int:
    return action_token(schema, RawEvent("", kind, ordinal, outcome, 0))


def remap_model(model: GritNet, source: CourseSchema, target: CourseSchema, seed: int = 0):
    """
    Return a copy of ``model`` whose embedding covers ``target``'s vocabulary.

    Args:
        model: Model trained on the source course
        source: Schema the model was trained with
        target: Schema of the course the model will be applied to
        seed: Seed for the fresh columns

    Returns:
        (remapped model, RemapNotice)
    """
    rng = np.random.default_rng(seed)
    old = model.params.embedding.data
    E = old.shape[0]
    L_src, L_tgt = source.vocab_size, target.vocab_size
    D_tgt = target.delta_buckets
    new_width = L_tgt + D_tgt

    fresh = glorot_uniform(rng, new_width, E, (E, new_width)).astype(old.dtype)
    new = fresh.copy()
    notice = RemapNotice(source_vocab=L_src, target_vocab=L_tgt)

    source_roles = set(enumerate_actions(source))
    for role in enumerate_actions(target):
        t_tok = _role_token(target, *role)
        if role in source_roles:
            new[:, t_tok] = old[:, _role_token(source, *role)]
            notice.reused += 1
        else:
            notice.fresh += 1
    notice.dropped = L_src - notice.reused

    shared_deltas = min(source.delta_buckets, D_tgt)
    new[:, L_tgt:L_tgt + shared_deltas] = old[:, L_src:L_src + shared_deltas]
    notice.delta_reused = shared_deltas

    remapped = model.copy()
    remapped.config = model.config.model_copy(update={"vocab_size": L_tgt, "delta_buckets": D_tgt})
    embedding = Parameter(new, name="embedding", trainable=model.params.embedding.trainable)
    embedding.data = new
    remapped.params.embedding = embedding
    return remapped, notice
