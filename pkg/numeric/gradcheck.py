"""
Finite-difference verification of analytic gradients.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from errors import GradCheckError
from .tensor import Parameter, Tensor, get_precision, no_grad


@dataclass
class GradCheckReport:
    max_relative_error: float
    per_parameter: Dict[str, float] = field(default_factory=dict)
    checked_entries: int = 0

    @property
    def worst_parameter(self) -> Optional[str]:
        if not self.per_parameter:
            return None
        return max(self.per_parameter, key=self.per_parameter.get)


def _relative_error(analytic: float, numeric: float, floor: float = 1e-6) -> float:
    return abs(analytic - numeric) / max(abs(analytic) + abs(numeric), floor)


def grad_check(
    loss_fn: Callable[[], Tensor],
    params: Sequence[Parameter],
    tolerance: float = 1e-4,
    step: float = 1e-5,
    max_entries: Optional[int] = None,
    seed: int = 0,
) -> GradCheckReport:
    """
    Compare backpropagated gradients with central differences.

    Args:
        loss_fn: Rebuilds the graph and returns a scalar loss tensor
        params: Parameters whose gradients are checked
        tolerance: Largest accepted relative error
        step: Finite-difference step h
        max_entries: Check at most this many randomly chosen entries per parameter
        seed: Seed for entry sampling

    Returns:
        GradCheckReport with the maximum relative error overall and per parameter

    Raises:
        GradCheckError: If any entry exceeds the tolerance
    """
    if get_precision() != "double":
        raise GradCheckError("Gradient checks require double precision; call set_precision('double')")

    for p in params:
        p.zero_grad()
    loss = loss_fn()
    loss.backward()
    analytic = {p.name: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data)) for p in params}

    rng = np.random.default_rng(seed)
    report = GradCheckReport(max_relative_error=0.0)
    offending: List[str] = []

    for p in params:
        flat = p.data.reshape(-1)
        indices = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            indices = rng.choice(flat.size, size=max_entries, replace=False)
        worst = 0.0
        for idx in indices:
            original = flat[idx]
            with no_grad():
                flat[idx] = original + step
                plus = float(loss_fn().data)
                flat[idx] = original - step
                minus = float(loss_fn().data)
            flat[idx] = original
            numeric = (plus - minus) / (2.0 * step)
            worst = max(worst, _relative_error(float(analytic[p.name].reshape(-1)[idx]), numeric))
            report.checked_entries += 1
        report.per_parameter[p.name] = worst
        report.max_relative_error = max(report.max_relative_error, worst)
        if worst > tolerance:
            offending.append(p.name)

    if offending:
        raise GradCheckError(
            f"Gradient check failed (max relative error {report.max_relative_error:.3e}) for: {', '.join(offending)}",
            offending=offending,
        )
    return report
