"""
Differentiable kernels for exactly the operations GritNet needs.

Each function computes its forward value with numpy and registers a backward
closure that accumulates the gradient of the loss into its inputs.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np

from errors import ShapeError, VocabularyError
from .tensor import Tensor, as_tensor, check_finite, make_result

PAD = -1


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to ``shape``."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def stable_sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


# ---------------------------------------------------------------------------
# Elementary ops
# ---------------------------------------------------------------------------

def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product over the last two axes (a may carry leading batch axes)."""
    a, b = as_tensor(a), as_tensor(b)
    if b.data.ndim != 2 or a.data.shape[-1] != b.data.shape[0]:
        raise ShapeError(f"matmul: cannot multiply {a.shape} by {b.shape}")
    out = a.data @ b.data

    def backward(grad):
        if a.requires_grad:
            a.accumulate(grad @ b.data.T)
        if b.requires_grad:
            a2 = a.data.reshape(-1, a.data.shape[-1])
            b.accumulate(a2.T @ grad.reshape(-1, grad.shape[-1]))

    return make_result(out, (a, b), backward, "matmul")


def add(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        out = a.data + b.data
    except ValueError as exc:
        raise ShapeError(f"add: shapes {a.shape} and {b.shape} do not broadcast") from exc

    def backward(grad):
        if a.requires_grad:
            a.accumulate(_unbroadcast(grad, a.shape))
        if b.requires_grad:
            b.accumulate(_unbroadcast(grad, b.shape))

    return make_result(out, (a, b), backward, "add")


def multiply(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        out = a.data * b.data
    except ValueError as exc:
        raise ShapeError(f"multiply: shapes {a.shape} and {b.shape} do not broadcast") from exc

    def backward(grad):
        if a.requires_grad:
            a.accumulate(_unbroadcast(grad * b.data, a.shape))
        if b.requires_grad:
            b.accumulate(_unbroadcast(grad * a.data, b.shape))

    return make_result(out, (a, b), backward, "multiply")


def sigmoid(x: Tensor) -> Tensor:
    x = as_tensor(x)
    out = stable_sigmoid(x.data)

    def backward(grad):
        x.accumulate(grad * out * (1.0 - out))

    return make_result(out, (x,), backward, "sigmoid")


def tanh(x: Tensor) -> Tensor:
    x = as_tensor(x)
    out = np.tanh(x.data)

    def backward(grad):
        x.accumulate(grad * (1.0 - out * out))

    return make_result(out, (x,), backward, "tanh")


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise ShapeError("concat: nothing to concatenate")
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as exc:
        raise ShapeError(f"concat: incompatible shapes {[t.shape for t in tensors]} on axis {axis}") from exc
    splits = np.cumsum([t.data.shape[axis] for t in tensors])[:-1]

    def backward(grad):
        for t, piece in zip(tensors, np.split(grad, splits, axis=axis)):
            if t.requires_grad:
                t.accumulate(piece)

    return make_result(out, tensors, backward, "concat")


def stack(tensors: Sequence[Tensor], axis: int = 1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    out = np.stack([t.data for t in tensors], axis=axis)

    def backward(grad):
        for i, t in enumerate(tensors):
            if t.requires_grad:
                t.accumulate(np.take(grad, i, axis=axis))

    return make_result(out, tensors, backward, "stack")


def time_step(x: Tensor, t: int) -> Tensor:
    """Slice step ``t`` out of a (B, T, F) tensor."""
    out = x.data[:, t, :]

    def backward(grad):
        x.accumulate_at((slice(None), t, slice(None)), grad)

    return make_result(out, (x,), backward, "time_step")


# ---------------------------------------------------------------------------
# Embedding
# ---------------------------------------------------------------------------

def embed_lookup(matrix: Tensor, action_tokens: np.ndarray, delta_tokens: np.ndarray, num_actions: int) -> Tensor:
    """Sum of the action column and the delta column of an E x |O| matrix.

    ``action_tokens`` and ``delta_tokens`` share any shape; positions holding
    the padding marker in the action array map to the zero vector.
    """
    action_tokens = np.asarray(action_tokens, dtype=np.int64)
    delta_tokens = np.asarray(delta_tokens, dtype=np.int64)
    if action_tokens.shape != delta_tokens.shape:
        raise ShapeError(f"embed_lookup: token arrays differ in shape {action_tokens.shape} vs {delta_tokens.shape}")
    width = matrix.data.shape[1]
    pad = action_tokens == PAD
    real_actions = action_tokens[~pad]
    real_deltas = delta_tokens[~pad]
    if real_actions.size and (real_actions.min() < 0 or real_actions.max() >= num_actions):
        raise VocabularyError(f"Action token outside [0, {num_actions})")
    if real_deltas.size and (real_deltas.min() < 0 or real_deltas.max() >= width - num_actions):
        raise VocabularyError(f"Delta token outside [0, {width - num_actions})")

    columns = matrix.data.T
    out = np.zeros(action_tokens.shape + (matrix.data.shape[0],), dtype=matrix.data.dtype)
    out[~pad] = columns[real_actions] + columns[num_actions + real_deltas]

    def backward(grad):
        # grad rows land on matrix columns: index (all rows, column id)
        g = grad[~pad].T
        matrix.accumulate_at((slice(None), real_actions), g, unbuffered=True)
        matrix.accumulate_at((slice(None), num_actions + real_deltas), g, unbuffered=True)

    return make_result(out, (matrix,), backward, "embed_lookup")


# ---------------------------------------------------------------------------
# LSTM
# ---------------------------------------------------------------------------

def lstm_gates(x: Tensor, h_prev: Tensor, W: Tensor, U: Tensor, b: Tensor) -> Tensor:
    """Activated gates [i, f, o, g] of shape (B, 4H).

    i, f, o = sigmoid(xW + hU + b) slices, g = tanh(...) slice.
    """
    hidden = U.data.shape[0]
    if W.data.shape[1] != 4 * hidden or U.data.shape[1] != 4 * hidden or b.data.shape[-1] != 4 * hidden:
        raise ShapeError(f"lstm: weights {W.shape}, {U.shape}, {b.shape} inconsistent with hidden size {hidden}")
    if x.data.shape[-1] != W.data.shape[0] or h_prev.data.shape[-1] != hidden:
        raise ShapeError(f"lstm: input {x.shape} / state {h_prev.shape} do not match weights")

    pre = x.data @ W.data + h_prev.data @ U.data + b.data
    act = np.empty_like(pre)
    act[:, : 3 * hidden] = stable_sigmoid(pre[:, : 3 * hidden])
    act[:, 3 * hidden:] = np.tanh(pre[:, 3 * hidden:])

    def backward(grad):
        d_pre = np.empty_like(grad)
        sig = act[:, : 3 * hidden]
        d_pre[:, : 3 * hidden] = grad[:, : 3 * hidden] * sig * (1.0 - sig)
        g = act[:, 3 * hidden:]
        d_pre[:, 3 * hidden:] = grad[:, 3 * hidden:] * (1.0 - g * g)
        if x.requires_grad:
            x.accumulate(d_pre @ W.data.T)
        if h_prev.requires_grad:
            h_prev.accumulate(d_pre @ U.data.T)
        if W.requires_grad:
            W.accumulate(x.data.T @ d_pre)
        if U.requires_grad:
            U.accumulate(h_prev.data.T @ d_pre)
        if b.requires_grad:
            b.accumulate(_unbroadcast(d_pre, b.shape))

    return make_result(act, (x, h_prev, W, U, b), backward, "lstm_gates")


def lstm_state(gates: Tensor, c_prev: Tensor) -> Tensor:
    """c_t = f * c_prev + i * g."""
    hidden = c_prev.data.shape[-1]
    i = gates.data[:, :hidden]
    f = gates.data[:, hidden: 2 * hidden]
    g = gates.data[:, 3 * hidden:]
    out = f * c_prev.data + i * g

    def backward(grad):
        if gates.requires_grad:
            d = np.zeros_like(gates.data)
            d[:, :hidden] = grad * g
            d[:, hidden: 2 * hidden] = grad * c_prev.data
            d[:, 3 * hidden:] = grad * i
            gates.accumulate(d)
        if c_prev.requires_grad:
            c_prev.accumulate(grad * f)

    return make_result(out, (gates, c_prev), backward, "lstm_state")


def lstm_output(gates: Tensor, c: Tensor) -> Tensor:
    """h_t = o * tanh(c_t)."""
    hidden = c.data.shape[-1]
    o = gates.data[:, 2 * hidden: 3 * hidden]
    tc = np.tanh(c.data)
    out = o * tc

    def backward(grad):
        if gates.requires_grad:
            d = np.zeros_like(gates.data)
            d[:, 2 * hidden: 3 * hidden] = grad * tc
            gates.accumulate(d)
        if c.requires_grad:
            c.accumulate(grad * o * (1.0 - tc * tc))

    return make_result(out, (gates, c), backward, "lstm_output")


def lstm_cell(x: Tensor, h_prev: Tensor, c_prev: Tensor, weights: Tuple[Tensor, Tensor, Tensor]) -> Tuple[Tensor, Tensor]:
    """One LSTM step; ``weights`` is (W: F x 4H, U: H x 4H, b: 4H) in gate order i, f, o, g."""
    W, U, b = weights
    gates = lstm_gates(as_tensor(x), as_tensor(h_prev), W, U, b)
    c = lstm_state(gates, as_tensor(c_prev))
    h = lstm_output(gates, c)
    return h, c


# ---------------------------------------------------------------------------
# Pooling and loss
# ---------------------------------------------------------------------------

def max_over_time(x: Tensor, mask: Optional[np.ndarray] = None) -> Tuple[Tensor, np.ndarray]:
    """Per-feature max across the time axis of a (B, T, F) tensor.

    ``mask`` (B, T) marks positions allowed to win; None lets every step
    compete. Ties go to the earliest step.
    """
    if x.data.ndim != 3 or x.data.shape[1] < 1:
        raise ShapeError(f"max_over_time: expected (B, T>=1, F), got {x.shape}")
    values = x.data
    if mask is not None:
        values = np.where(mask[:, :, None], values, -np.inf)
    argmax = np.argmax(values, axis=1)
    b_idx = np.arange(x.data.shape[0])[:, None]
    f_idx = np.arange(x.data.shape[2])[None, :]
    out = x.data[b_idx, argmax, f_idx]

    def backward(grad):
        full = np.zeros_like(x.data)
        full[b_idx, argmax, f_idx] = grad
        x.accumulate(full)

    return make_result(out, (x,), backward, "max_over_time"), argmax


def bce_with_logits(logits: Tensor, labels: np.ndarray) -> Tensor:
    """Mean binary cross-entropy computed stably from pre-sigmoid scores."""
    z = logits.data.reshape(-1)
    y = np.asarray(labels, dtype=logits.data.dtype).reshape(-1)
    if z.shape != y.shape:
        raise ShapeError(f"bce: {z.shape[0]} scores for {y.shape[0]} labels")
    losses = np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))
    out = np.asarray(losses.mean(), dtype=logits.data.dtype)

    def backward(grad):
        g = (stable_sigmoid(z) - y) / z.shape[0]
        logits.accumulate((grad * g).reshape(logits.data.shape))

    return make_result(out, (logits,), backward, "bce_with_logits")


def bce_loss(probabilities, labels) -> float:
    """Mean binary cross-entropy of probabilities, evaluated through logits."""
    p = np.asarray(probabilities, dtype=np.float64)
    eps = np.finfo(np.float64).tiny
    logits = np.log(np.maximum(p, eps)) - np.log(np.maximum(1.0 - p, eps))
    loss = bce_with_logits(Tensor(logits), np.asarray(labels, dtype=np.float64))
    return float(check_finite(loss.data, "bce_loss"))


def probabilities(logits: Tensor) -> np.ndarray:
    return stable_sigmoid(np.asarray(logits.data).reshape(-1))
