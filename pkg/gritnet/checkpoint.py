"""
Binary checkpoint format (version 1). Byte layout is documented in docs/format.md.

    magic      8 bytes   b"GRITNET\\x00"
    version    uint16    little-endian
    config     uint32 length + UTF-8 JSON (sorted keys) of GritNetConfig
    t_max      uint32    training-set maximum sequence length (0 = unknown)
    dtype      uint8     4 (float32) or 8 (float64)
    count      uint16    number of parameter records
    records    per parameter in PARAM_ORDER:
                 uint16 name length + UTF-8 name,
                 uint8 ndim, ndim x uint32 dims,
                 raw little-endian values
    digest     32 bytes  sha256 of everything above
"""

import hashlib
import json
import struct
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from config.config import GritNetConfig
from errors import CheckpointVersionError, ConfigMismatchError, CorruptCheckpointError
from events.schema import CourseSchema
from numeric.tensor import Parameter
from .model import GritNet
from .params import PARAM_ORDER, GritNetParams

MAGIC = b"GRITNET\x00"
FORMAT_VERSION = 1
_DTYPE_CODES = {4: np.dtype("<f4"), 8: np.dtype("<f8")}


def save_checkpoint(model: GritNet, path: Path, t_max: int = 0) -> str:
    """Write ``model`` to ``path``; returns the sha256 of the file contents."""
    params = model.params.named()
    itemsize = next(iter(params.values())).data.dtype.itemsize
    dtype = _DTYPE_CODES[itemsize]

    config_bytes = json.dumps(model.config.model_dump(mode="json"), sort_keys=True, separators=(",", ":")).encode("utf-8")
    body = bytearray()
    body += MAGIC
    body += struct.pack("<H", FORMAT_VERSION)
    body += struct.pack("<I", len(config_bytes)) + config_bytes
    body += struct.pack("<I", t_max)
    body += struct.pack("<B", itemsize)
    body += struct.pack("<H", len(PARAM_ORDER))
    for name in PARAM_ORDER:
        values = np.ascontiguousarray(params[name].data, dtype=dtype)
        encoded = name.encode("utf-8")
        body += struct.pack("<H", len(encoded)) + encoded
        body += struct.pack("<B", values.ndim)
        body += struct.pack(f"<{values.ndim}I", *values.shape)
        body += values.tobytes()
    digest = hashlib.sha256(bytes(body)).digest()

    data = bytes(body) + digest
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(data)
    return hashlib.sha256(data).hexdigest()


class _Reader:
    def __init__(self, data: bytes, path: Path):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, size: int) -> bytes:
        if self.pos + size > len(self.data):
            raise CorruptCheckpointError(f"Checkpoint {self.path} is truncated")
        chunk = self.data[self.pos:self.pos + size]
        self.pos += size
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def read_checkpoint(path: Path) -> Tuple[GritNet, int]:
    """Load a checkpoint; returns the model and the stored t_max."""
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC) + 32 or data[:len(MAGIC)] != MAGIC:
        raise CorruptCheckpointError(f"{path} is not a GritNet checkpoint")
    body, digest = data[:-32], data[-32:]

    reader = _Reader(body, path)
    reader.take(len(MAGIC))
    (version,) = reader.unpack("<H")
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(f"{path} uses format version {version}, expected {FORMAT_VERSION}")
    if hashlib.sha256(body).digest() != digest:
        raise CorruptCheckpointError(f"Checkpoint {path} failed its integrity check")

    (config_len,) = reader.unpack("<I")
    try:
        config = GritNetConfig(**json.loads(reader.take(config_len).decode("utf-8")))
    except (ValueError, TypeError) as exc:
        raise CorruptCheckpointError(f"Checkpoint {path} has an unreadable config block: {exc}") from exc
    (t_max,) = reader.unpack("<I")
    (itemsize,) = reader.unpack("<B")
    if itemsize not in _DTYPE_CODES:
        raise CorruptCheckpointError(f"Checkpoint {path} has unknown value size {itemsize}")
    dtype = _DTYPE_CODES[itemsize]
    (count,) = reader.unpack("<H")
    if count != len(PARAM_ORDER):
        raise CorruptCheckpointError(f"Checkpoint {path} holds {count} parameters, expected {len(PARAM_ORDER)}")

    weights = {}
    for expected in PARAM_ORDER:
        (name_len,) = reader.unpack("<H")
        name = reader.take(name_len).decode("utf-8")
        if name != expected:
            raise CorruptCheckpointError(f"Checkpoint {path}: parameter '{name}' where '{expected}' was expected")
        (ndim,) = reader.unpack("<B")
        shape = reader.unpack(f"<{ndim}I")
        size = int(np.prod(shape)) if ndim else 1
        values = np.frombuffer(reader.take(size * itemsize), dtype=dtype).reshape(shape)
        param = Parameter(values, name=name)
        # stored precision wins over the active one
        param.data = values.astype(dtype.newbyteorder("="), copy=True)
        weights[name] = param
    if reader.pos != len(body):
        raise CorruptCheckpointError(f"Checkpoint {path} has {len(body) - reader.pos} trailing bytes")

    model = GritNet(config, GritNetParams(**weights))
    _check_shapes(model, path)
    return model, t_max


def _check_shapes(model: GritNet, path: Path) -> None:
    E, H = model.config.embedding_dim, model.config.hidden_dim
    expected = {
        "embedding": (E, model.config.num_events),
        "fwd_W": (E, 4 * H), "fwd_U": (H, 4 * H), "fwd_b": (4 * H,),
        "bwd_W": (E, 4 * H), "bwd_U": (H, 4 * H), "bwd_b": (4 * H,),
        "fc_W": (2 * H, 1), "fc_b": (1,),
    }
    for name, shape in expected.items():
        if getattr(model.params, name).shape != shape:
            raise CorruptCheckpointError(f"Checkpoint {path}: '{name}' has shape {getattr(model.params, name).shape}, config implies {shape}")


def load_checkpoint(path: Path, schema: Optional[CourseSchema] = None) -> GritNet:
    """Load a model; with ``schema`` given, its vocabulary must match the checkpoint."""
    model, _ = read_checkpoint(path)
    if schema is not None:
        check_compatible(model, schema, path)
    return model


def check_compatible(model: GritNet, schema: CourseSchema, where="model") -> None:
    if model.config.vocab_size != schema.vocab_size or model.config.delta_buckets != schema.delta_buckets:
        raise ConfigMismatchError(
            f"{where}: vocabulary L={model.config.vocab_size}, delta buckets={model.config.delta_buckets} "
            f"does not match schema L={schema.vocab_size}, delta buckets={schema.delta_buckets}"
        )


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
