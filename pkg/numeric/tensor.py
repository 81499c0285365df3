"""
Dense tensors with reverse-mode gradients.

A Tensor wraps a numpy array. Operations in ``numeric.ops`` build a graph by
recording, on their output, the parent tensors and a closure that pushes the
output gradient back to those parents. ``Tensor.backward`` walks the graph in
reverse topological order.

Only tensors that require gradients are recorded; inference over frozen
parameters builds no graph at all.
"""

from contextlib import contextmanager
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from errors import NumericFailureError

_DTYPES = {"single": np.float32, "double": np.float64}
_precision = "single"


def set_precision(precision: str) -> None:
    """Select float32 ("single") or float64 ("double") for new tensors."""
    global _precision
    if precision not in _DTYPES:
        raise ValueError(f"Unknown precision '{precision}', expected one of {sorted(_DTYPES)}")
    _precision = precision


def get_precision() -> str:
    return _precision


def get_dtype():
    return _DTYPES[_precision]


def check_finite(values: np.ndarray, where: str) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise NumericFailureError(f"Non-finite values produced by {where}")
    return values


class Tensor:
    """A numpy array plus the bookkeeping needed for backpropagation."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "name")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        parents: Sequence["Tensor"] = (),
        backward: Optional[Callable[[np.ndarray], None]] = None,
        name: Optional[str] = None,
    ):
        self.data = np.asarray(data, dtype=get_dtype()) if not isinstance(data, np.ndarray) else data
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self._parents: Tuple["Tensor", ...] = tuple(parents)
        self._backward = backward
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    def numpy(self) -> np.ndarray:
        return self.data

    def accumulate(self, grad: np.ndarray) -> None:
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.array(grad, dtype=self.data.dtype, copy=True)
        else:
            self.grad += grad

    def accumulate_at(self, index, values: np.ndarray, unbuffered: bool = False) -> None:
        """Add ``values`` into ``grad[index]`` without materializing a full-size update.

        ``unbuffered`` uses ``np.add.at`` so repeated fancy indices sum up.
        """
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        if unbuffered:
            np.add.at(self.grad, index, values)
        else:
            self.grad[index] += values

    def zero_grad(self) -> None:
        self.grad = None

    def _topological_order(self) -> List["Tensor"]:
        # Iterative DFS; BPTT graphs are far deeper than the recursion limit
        order: List[Tensor] = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
        return order

    def backward(self, grad: Optional[np.ndarray] = None) -> None:
        """Backpropagate from this tensor; a scalar output is seeded with 1."""
        if not self.requires_grad:
            return
        if grad is None:
            grad = np.ones_like(self.data)
        self.accumulate(grad)

        for node in reversed(self._topological_order()):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)
                # Interior gradients are not needed once pushed to parents
                if node._parents:
                    node.grad = None

    def __repr__(self) -> str:
        label = f" '{self.name}'" if self.name else ""
        return f"Tensor{label}(shape={self.shape}, requires_grad={self.requires_grad})"


class Parameter(Tensor):
    """A leaf tensor owned by a model.

    ``trainable`` realizes freezing: a frozen parameter neither collects
    gradients nor moves under optimizer steps.
    """

    __slots__ = ("trainable",)

    def __init__(self, data, name: str, trainable: bool = True):
        super().__init__(np.array(data, dtype=get_dtype(), copy=True), requires_grad=trainable, name=name)
        self.trainable = trainable

    def freeze(self) -> None:
        self.trainable = False
        self.requires_grad = False
        self.grad = None

    def unfreeze(self) -> None:
        self.trainable = True
        self.requires_grad = True


_grad_enabled = True


@contextmanager
def no_grad():
    """Evaluate ops without recording a graph (inference)."""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


def make_result(
    data: np.ndarray,
    parents: Iterable[Tensor],
    backward: Callable[[np.ndarray], None],
    where: str,
) -> Tensor:
    """Wrap an op output, recording the graph edge only when a parent needs it."""
    check_finite(data, where)
    parents = tuple(parents)
    if _grad_enabled and any(p.requires_grad for p in parents):
        return Tensor(data, requires_grad=True, parents=parents, backward=backward, name=where)
    return Tensor(data, name=where)


def as_tensor(value) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(np.asarray(value, dtype=get_dtype()))
