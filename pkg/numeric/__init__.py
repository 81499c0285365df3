"""
Minimal numeric kernels with reverse-mode gradients, Adam and a gradient checker.
"""

from .tensor import Tensor, Parameter, set_precision, get_precision, get_dtype, no_grad
from .ops import (
    PAD, add, matmul, multiply, sigmoid, tanh, concat, stack, time_step, embed_lookup,
    lstm_cell, max_over_time, bce_with_logits, bce_loss, probabilities,
)
from .optim import Adam, AdamState, adam_step
from .gradcheck import GradCheckReport, grad_check

__all__ = [
    "Tensor", "Parameter", "set_precision", "get_precision", "get_dtype", "no_grad",
    "PAD", "add", "matmul", "multiply", "sigmoid", "tanh", "concat", "stack", "time_step",
    "embed_lookup", "lstm_cell", "max_over_time", "bce_with_logits", "bce_loss", "probabilities",
    "Adam", "AdamState", "adam_step", "GradCheckReport", "grad_check",
]
