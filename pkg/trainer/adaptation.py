"""
Unsupervised course-to-course adaptation of a trained GritNet.

The source model scores every target student, the scores are thresholded
into pseudo-labels, and only the FC layer is trained further on them. The
embedding and BLSTM layers stay frozen, so the GMP embeddings of the target
students are computed once and the FC layer is fitted on that cache.

``oracle_adapt`` follows the same path with the true target labels.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.model_selection import train_test_split

from config.config import AdaptConfig, TrainConfig
from errors import DegenerateLabelError, EmptyInputError, GritNetError, TrainingConfigError
from events.tokenizer import TokenizedSequence
from evaluation.metrics import try_auc
from gritnet.model import GritNet, to_probabilities
from gritnet_logger import GritNetLogger
from log.logger import get_logger
from numeric import ops
from numeric.optim import Adam
from numeric.tensor import Parameter, Tensor, no_grad
from parallel import run_jobs


def pseudo_label(predictions: Sequence[float], theta: float) -> np.ndarray:
    """1 where the prediction is at least ``theta``, else 0."""
    return (np.asarray(predictions) >= theta).astype(np.int64)


@dataclass
class ThetaResult:
    """One point of the threshold sweep. ``theta`` is None for the oracle."""
    theta: Optional[float]
    positives: int = 0
    selection_auc: Optional[float] = None
    fc_weights: Optional[Dict[str, np.ndarray]] = None
    losses: List[float] = field(default_factory=list)
    degenerate: Optional[str] = None

    def to_dict(self) -> Dict:
        return {
            "theta": self.theta,
            "positives": self.positives,
            "selection_auc": self.selection_auc,
            "degenerate": self.degenerate,
            "final_loss": self.losses[-1] if self.losses else None,
        }


@dataclass
class AdaptationResult:
    """The adapted model plus the whole sweep and the freeze-contract digests."""
    model: GritNet
    theta: Optional[float]
    sweep: List[ThetaResult]
    non_fc_digest_before: str
    non_fc_digest_after: str
    models: Dict[float, GritNet] = field(default_factory=dict)

    @property
    def frozen_intact(self) -> bool:
        return self.non_fc_digest_before == self.non_fc_digest_after

    def to_dict(self) -> Dict:
        return {
            "theta": self.theta,
            "sweep": [r.to_dict() for r in self.sweep],
            "non_fc_digest": self.non_fc_digest_after,
            "frozen_intact": self.frozen_intact,
        }


def selection_split(n: int, fraction: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Random (fit, selection) split of target students; labels are not known here."""
    if n < 2:
        return np.arange(n), np.zeros(0, dtype=np.int64)
    take = min(max(1, int(round(fraction * n))), n - 1)
    fit_idx, sel_idx = train_test_split(np.arange(n), test_size=take, random_state=seed)
    return np.sort(fit_idx), np.sort(sel_idx)


def fc_probabilities(embeddings: np.ndarray, fc_weights: Dict[str, np.ndarray]) -> np.ndarray:
    with no_grad():
        logits = ops.add(ops.matmul(Tensor(embeddings), Tensor(fc_weights["fc_W"])), Tensor(fc_weights["fc_b"]))
    return to_probabilities(logits)


@dataclass
class _HeadJob:
    theta: Optional[float]
    embeddings: np.ndarray
    labels: np.ndarray
    fit_idx: np.ndarray
    sel_idx: np.ndarray
    fc_init: Dict[str, np.ndarray]
    epochs: int
    train_config: TrainConfig


def _fit_head(job: _HeadJob) -> ThetaResult:
    """Train a fresh copy of the FC layer on cached embeddings."""
    result = ThetaResult(job.theta, positives=int(job.labels.sum()))
    fit_labels = job.labels[job.fit_idx]
    if fit_labels.size == 0 or fit_labels.min() == fit_labels.max():
        result.degenerate = f"labels of the fit split form a single class ({int(fit_labels.sum())} of {fit_labels.size} positive)"
        return result

    cfg = job.train_config
    fc_W = Parameter(job.fc_init["fc_W"], name="fc_W")
    fc_b = Parameter(job.fc_init["fc_b"], name="fc_b")
    optimizer = Adam([fc_W, fc_b], cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)
    rng = np.random.default_rng(cfg.seed)
    features = job.embeddings[job.fit_idx].astype(fc_W.data.dtype)

    for _ in range(job.epochs):
        order = rng.permutation(fit_labels.size)
        total = 0.0
        for start in range(0, order.size, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            optimizer.zero_grad()
            logits = ops.add(ops.matmul(Tensor(features[idx]), fc_W), fc_b)
            loss = ops.bce_with_logits(logits, fit_labels[idx])
            loss.backward()
            optimizer.step()
            total += float(loss.data) * idx.size
        result.losses.append(total / order.size)

    result.fc_weights = {"fc_W": fc_W.data.copy(), "fc_b": fc_b.data.copy()}
    if job.sel_idx.size:
        scores = fc_probabilities(job.embeddings[job.sel_idx], result.fc_weights)
        result.selection_auc = try_auc(scores, job.labels[job.sel_idx])
    return result


def _pick(sweep: List[ThetaResult]) -> ThetaResult:
    """Highest selection AUC; ties and undefined AUCs fall back to the smaller θ."""
    usable = [r for r in sweep if r.degenerate is None]
    return max(usable, key=lambda r: (r.selection_auc if r.selection_auc is not None else -1.0, -(r.theta or 0.0)))


class Adapter(GritNetLogger):
    """Runs the freeze / score / pseudo-label / fine-tune procedure for one source model."""

    def __init__(self, adapt_config: AdaptConfig, train_config: TrainConfig, workers: Optional[int] = None):
        self.adapt_config = adapt_config
        self.train_config = train_config
        self.workers = workers
        self.logger = get_logger("Adapter")

    def _prepare(self, source_model: GritNet, sequences: Sequence[TokenizedSequence], t_max: Optional[int]):
        if len(sequences) == 0:
            raise EmptyInputError("No target sequences to adapt on")
        frozen = source_model.copy()
        frozen.params.freeze_all_but_fc()
        digest = frozen.params.non_fc_digest()
        t_max = t_max or max(len(s) for s in sequences)
        embeddings = frozen.embed_sequences(list(sequences), t_max)
        fc_init = {"fc_W": frozen.params.fc_W.data.copy(), "fc_b": frozen.params.fc_b.data.copy()}
        fit_idx, sel_idx = selection_split(len(sequences), self.adapt_config.selection_fraction, self.train_config.seed)
        return frozen, digest, embeddings, fc_init, fit_idx, sel_idx

    def _finish(self, frozen: GritNet, digest: str, chosen: ThetaResult, sweep: List[ThetaResult]) -> AdaptationResult:
        models = {}
        for r in sweep:
            if r.fc_weights is None or r.theta is None:
                continue
            models[r.theta] = self._with_head(frozen, r.fc_weights)
        adapted = self._with_head(frozen, chosen.fc_weights)
        after = adapted.params.non_fc_digest()
        if after != digest:
            raise GritNetError("Adaptation changed a frozen parameter")
        return AdaptationResult(adapted, chosen.theta, sweep, digest, after, models)

    @staticmethod
    def _with_head(frozen: GritNet, fc_weights: Dict[str, np.ndarray]) -> GritNet:
        model = frozen.copy()
        model.params.fc_W.data[...] = fc_weights["fc_W"]
        model.params.fc_b.data[...] = fc_weights["fc_b"]
        return model

    def adapt(self, source_model: GritNet, target_sequences: Sequence[TokenizedSequence], t_max: Optional[int] = None) -> AdaptationResult:
        """
        Adapt ``source_model`` to unlabeled target sequences.

        Every θ in the grid yields its own FC layer; the one whose predictions
        best rank its own pseudo-labels on the held-out selection split wins.

        Raises:
            EmptyInputError: No target sequences
            DegenerateLabelError: Every θ produced single-class pseudo-labels
        """
        frozen, digest, embeddings, fc_init, fit_idx, sel_idx = self._prepare(source_model, target_sequences, t_max)
        predictions = fc_probabilities(embeddings, fc_init)

        jobs = [
            _HeadJob(theta, embeddings, pseudo_label(predictions, theta), fit_idx, sel_idx, fc_init,
                     self.adapt_config.epochs, self.train_config)
            for theta in self.adapt_config.thresholds
        ]
        sweep = run_jobs(_fit_head, jobs, self.workers)
        for r in sweep:
            if r.degenerate:
                self.log_warning(r.degenerate, indent=1, theta=r.theta)
            else:
                self.log_info(f"{r.positives}/{len(target_sequences)} pseudo-positive, selection AUC={r.selection_auc}", indent=1, theta=r.theta)

        if all(r.degenerate for r in sweep):
            raise DegenerateLabelError(
                f"Pseudo-labels are single-class for every θ in {self.adapt_config.thresholds}",
                theta=self.adapt_config.thresholds,
            )
        chosen = _pick(sweep)
        self.log_info(f"Selected θ={chosen.theta}")
        return self._finish(frozen, digest, chosen, sweep)

    def oracle_adapt(
        self,
        source_model: GritNet,
        target_sequences: Sequence[TokenizedSequence],
        target_labels: Sequence[int],
        t_max: Optional[int] = None,
    ) -> AdaptationResult:
        """
        Same procedure with true target labels in place of pseudo-labels.

        Raises:
            EmptyInputError: No target sequences or labels
            TrainingConfigError: Labels do not match the sequences or form a single class
        """
        labels = np.asarray(target_labels, dtype=np.int64).reshape(-1)
        if labels.size == 0:
            raise EmptyInputError("Oracle adaptation needs target labels")
        if labels.size != len(target_sequences):
            raise TrainingConfigError(f"{len(target_sequences)} target sequences but {labels.size} labels")
        frozen, digest, embeddings, fc_init, fit_idx, sel_idx = self._prepare(source_model, target_sequences, t_max)

        job = _HeadJob(None, embeddings, labels, fit_idx, sel_idx, fc_init, self.adapt_config.epochs, self.train_config)
        result = _fit_head(job)
        if result.degenerate:
            raise TrainingConfigError(f"Oracle adaptation: {result.degenerate}")
        return self._finish(frozen, digest, result, [result])


def adapt(
    source_model: GritNet,
    target_sequences: Sequence[TokenizedSequence],
    adapt_config: AdaptConfig,
    train_config: TrainConfig,
    t_max: Optional[int] = None,
    workers: Optional[int] = None,
) -> AdaptationResult:
    return Adapter(adapt_config, train_config, workers).adapt(source_model, target_sequences, t_max)


def oracle_adapt(
    source_model: GritNet,
    target_sequences: Sequence[TokenizedSequence],
    target_labels: Sequence[int],
    adapt_config: AdaptConfig,
    train_config: TrainConfig,
    t_max: Optional[int] = None,
) -> AdaptationResult:
    return Adapter(adapt_config, train_config).oracle_adapt(source_model, target_sequences, target_labels, t_max)
