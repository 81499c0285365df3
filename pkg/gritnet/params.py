"""
GritNet parameter set and its initialization.
"""

import hashlib
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional

import numpy as np

from config.config import GritNetConfig
from numeric.tensor import Parameter, get_dtype

# Fixed order used by checkpoints and hashes
PARAM_ORDER = (
    "embedding",
    "fwd_W", "fwd_U", "fwd_b",
    "bwd_W", "bwd_U", "bwd_b",
    "fc_W", "fc_b",
)
FC_PARAMS = ("fc_W", "fc_b")


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int, shape) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


@dataclass
class GritNetParams:
    """Embedding matrix E^o (E x |O|), forward/backward LSTM weights and the FC head."""
    embedding: Parameter
    fwd_W: Parameter
    fwd_U: Parameter
    fwd_b: Parameter
    bwd_W: Parameter
    bwd_U: Parameter
    bwd_b: Parameter
    fc_W: Parameter
    fc_b: Parameter

    def named(self) -> Dict[str, Parameter]:
        return {name: getattr(self, name) for name in PARAM_ORDER}

    def all(self) -> List[Parameter]:
        return [getattr(self, name) for name in PARAM_ORDER]

    def fc(self) -> List[Parameter]:
        return [getattr(self, name) for name in FC_PARAMS]

    def non_fc(self) -> List[Parameter]:
        return [getattr(self, name) for name in PARAM_ORDER if name not in FC_PARAMS]

    def freeze_all_but_fc(self) -> None:
        for p in self.non_fc():
            p.freeze()
        for p in self.fc():
            p.unfreeze()

    def unfreeze_all(self) -> None:
        for p in self.all():
            p.unfreeze()

    def copy(self) -> "GritNetParams":
        return GritNetParams(**{
            name: Parameter(p.data, name=name, trainable=p.trainable) for name, p in self.named().items()
        })

    def snapshot(self) -> Dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named().items()}

    def restore(self, snapshot: Dict[str, np.ndarray]) -> None:
        for name, values in snapshot.items():
            getattr(self, name).data[...] = values

    def digest(self, names: Optional[Iterable[str]] = None) -> str:
        """sha256 over the raw bytes of the selected parameters in fixed order."""
        selected = list(names) if names is not None else list(PARAM_ORDER)
        h = hashlib.sha256()
        for name in PARAM_ORDER:
            if name in selected:
                p = getattr(self, name)
                h.update(name.encode("utf-8"))
                h.update(np.ascontiguousarray(p.data).tobytes())
        return h.hexdigest()

    def non_fc_digest(self) -> str:
        return self.digest(n for n in PARAM_ORDER if n not in FC_PARAMS)


def _lstm_weights(rng: np.random.Generator, input_dim: int, hidden: int, prefix: str) -> Dict[str, Parameter]:
    W = glorot_uniform(rng, input_dim, 4 * hidden, (input_dim, 4 * hidden))
    U = glorot_uniform(rng, hidden, 4 * hidden, (hidden, 4 * hidden))
    b = np.zeros(4 * hidden)
    b[hidden: 2 * hidden] = 1.0  # forget gate
    return {
        f"{prefix}_W": Parameter(W, name=f"{prefix}_W"),
        f"{prefix}_U": Parameter(U, name=f"{prefix}_U"),
        f"{prefix}_b": Parameter(b, name=f"{prefix}_b"),
    }


def init_params(config: GritNetConfig) -> GritNetParams:
    """Glorot-uniform matrices, zero biases, LSTM forget-gate bias 1."""
    rng = np.random.default_rng(config.seed)
    E, H = config.embedding_dim, config.hidden_dim
    embedding = glorot_uniform(rng, config.num_events, E, (E, config.num_events))
    weights = {"embedding": Parameter(embedding, name="embedding")}
    weights.update(_lstm_weights(rng, E, H, "fwd"))
    weights.update(_lstm_weights(rng, E, H, "bwd"))
    weights["fc_W"] = Parameter(glorot_uniform(rng, 2 * H, 1, (2 * H, 1)), name="fc_W")
    weights["fc_b"] = Parameter(np.zeros(1), name="fc_b")
    return GritNetParams(**weights)


def zero_params(config: GritNetConfig) -> GritNetParams:
    E, H = config.embedding_dim, config.hidden_dim
    shapes = {
        "embedding": (E, config.num_events),
        "fwd_W": (E, 4 * H), "fwd_U": (H, 4 * H), "fwd_b": (4 * H,),
        "bwd_W": (E, 4 * H), "bwd_U": (H, 4 * H), "bwd_b": (4 * H,),
        "fc_W": (2 * H, 1), "fc_b": (1,),
    }
    return GritNetParams(**{name: Parameter(np.zeros(shape, dtype=get_dtype()), name=name) for name, shape in shapes.items()})
