"""
L2-regularized logistic regression on standardized count features.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import numpy as np

from errors import ShapeError, TrainingConfigError
from numeric.ops import stable_sigmoid


@dataclass
class LogRegModel:
    """Weights plus the training-set standardization applied before scoring."""
    weights: np.ndarray
    bias: float
    mean: np.ndarray
    scale: np.ndarray

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    def standardize(self, features: np.ndarray) -> np.ndarray:
        features = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if features.shape[1] != self.dim:
            raise ShapeError(f"Model expects {self.dim} features, got {features.shape[1]}")
        return (features - self.mean) / self.scale


def logreg_loss_and_grad(weights: np.ndarray, bias: float, x: np.ndarray, y: np.ndarray, l2: float) -> Tuple[float, np.ndarray, float]:
    """Mean logistic loss + (l2 / 2) * |w|^2 and its gradient in (w, b)."""
    z = x @ weights + bias
    loss = np.mean(np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))) + 0.5 * l2 * float(weights @ weights)
    residual = (stable_sigmoid(z) - y) / y.size
    return float(loss), x.T @ residual + l2 * weights, float(residual.sum())


def train_logreg(
    features: np.ndarray,
    labels: np.ndarray,
    l2: float = 1e-2,
    epochs: int = 300,
    lr: float = 0.1,
    seed: int = 0,
) -> LogRegModel:
    """
    Full-batch gradient descent from a small seeded initialization.

    The L2 term is applied as a proximal shrink after each data step, which
    stays stable for any ``l2``.

    Raises:
        TrainingConfigError: Empty or single-class data
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64).reshape(-1)
    if x.ndim != 2 or x.shape[0] == 0:
        raise TrainingConfigError("Baseline needs a non-empty (students x features) matrix")
    if x.shape[0] != y.size:
        raise ShapeError(f"{x.shape[0]} feature rows but {y.size} labels")
    if len(np.unique(y)) < 2:
        raise TrainingConfigError("Baseline training data has a single class")

    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0] = 1.0
    xs = (x - mean) / scale

    rng = np.random.default_rng(seed)
    w = rng.normal(0.0, 0.01, size=x.shape[1])
    b = 0.0
    for _ in range(epochs):
        _, grad_w, grad_b = logreg_loss_and_grad(w, b, xs, y, 0.0)
        w = (w - lr * grad_w) / (1.0 + lr * l2)
        b -= lr * grad_b
    return LogRegModel(w, b, mean, scale)


def predict(model: LogRegModel, features: np.ndarray) -> np.ndarray:
    """Sigmoid of the affine score on standardized features."""
    return stable_sigmoid(model.standardize(features) @ model.weights + model.bias)


def save_logreg(model: LogRegModel, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "weights": model.weights.tolist(),
        "bias": model.bias,
        "mean": model.mean.tolist(),
        "scale": model.scale.tolist(),
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_logreg(path: Path) -> LogRegModel:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return LogRegModel(
        weights=np.asarray(data["weights"], dtype=np.float64),
        bias=float(data["bias"]),
        mean=np.asarray(data["mean"], dtype=np.float64),
        scale=np.asarray(data["scale"], dtype=np.float64),
    )
