"""
Supervised GritNet training: a single model, week-by-week models, and the
week-by-week models of every cross-validation fold.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.config import GritNetConfig, TrainConfig
from errors import TrainingConfigError
from events.padding import pad_batch
from events.tokenizer import LabeledDataset
from evaluation.metrics import auc
from gritnet.model import GritNet
from gritnet_logger import GritNetLogger
from log.logger import get_logger
from numeric.optim import Adam
from parallel import run_jobs
from .folds import FoldAssignment, holdout_split


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    valid_auc: Optional[float]


@dataclass
class TrainingHistory:
    """Per-epoch loss and validation AUC, plus which epoch was kept."""
    epochs: List[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    best_valid_auc: Optional[float] = None
    t_max: int = 0
    stopped_early: bool = False

    def to_dict(self) -> Dict:
        return {
            "epochs": [{"epoch": r.epoch, "loss": r.loss, "valid_auc": r.valid_auc} for r in self.epochs],
            "best_epoch": self.best_epoch,
            "best_valid_auc": self.best_valid_auc,
            "t_max": self.t_max,
            "stopped_early": self.stopped_early,
        }


@dataclass
class WeekResult:
    """Outcome of training one week's model; ``skipped`` holds the reason when no model was trained."""
    week: int
    fold: Optional[int] = None
    model: Optional[GritNet] = None
    history: Optional[TrainingHistory] = None
    dropped: List[str] = field(default_factory=list)
    skipped: Optional[str] = None

    @property
    def t_max(self) -> int:
        return self.history.t_max if self.history is not None else 0


@dataclass
class WeeklyTraining:
    """Week -> result for one training set."""
    results: Dict[int, WeekResult] = field(default_factory=dict)

    @property
    def models(self) -> Dict[int, GritNet]:
        return {w: r.model for w, r in sorted(self.results.items()) if r.model is not None}

    @property
    def skipped(self) -> Dict[int, str]:
        return {w: r.skipped for w, r in sorted(self.results.items()) if r.skipped is not None}

    def dropped_counts(self) -> Dict[int, int]:
        return {w: len(r.dropped) for w, r in sorted(self.results.items())}


def _has_both_classes(dataset: Optional[LabeledDataset]) -> bool:
    return dataset is not None and len(dataset) > 0 and len(set(dataset.labels)) == 2


class Trainer(GritNetLogger):
    """Mini-batch Adam training with early stopping on validation AUC."""

    def __init__(self, config: TrainConfig):
        self.config = config
        self.logger = get_logger("Trainer")

    def _check(self, train_set: LabeledDataset) -> None:
        if self.config.epochs < 1:
            raise TrainingConfigError(f"epochs must be >= 1, got {self.config.epochs}")
        if self.config.batch_size < 1:
            raise TrainingConfigError(f"batch_size must be >= 1, got {self.config.batch_size}")
        if len(train_set) == 0:
            raise TrainingConfigError("Training set is empty")
        if len(set(train_set.labels)) < 2:
            raise TrainingConfigError(f"Training set has a single class ({train_set.labels[0]})")

    def train(
        self,
        model: GritNet,
        train_set: LabeledDataset,
        valid_set: Optional[LabeledDataset] = None,
        t_max: Optional[int] = None,
    ) -> Tuple[GritNet, TrainingHistory]:
        """
        Train ``model`` in place and return it with its history.

        The parameters of the epoch with the best validation AUC are restored
        at the end. Without a two-class validation set the epoch with the
        lowest training loss is kept instead.

        Raises:
            TrainingConfigError: Empty or single-class training set, bad schedule
        """
        self._check(train_set)
        cfg = self.config
        t_max = t_max or train_set.max_length()
        use_valid = _has_both_classes(valid_set)
        labels = train_set.label_array()
        n = len(train_set)

        rng = np.random.default_rng(cfg.seed)
        optimizer = Adam(model.params.all(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)
        history = TrainingHistory(t_max=t_max)
        best_score, best_state, waited = -np.inf, model.params.snapshot(), 0

        for epoch in range(1, cfg.epochs + 1):
            order = rng.permutation(n)
            total = 0.0
            for start in range(0, n, cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                batch = pad_batch([train_set.sequences[i] for i in idx], t_max)
                optimizer.zero_grad()
                loss = model.loss(batch, labels[idx])
                loss.backward()
                optimizer.step()
                total += float(loss.data) * idx.size
            mean_loss = total / n

            valid_auc = None
            if use_valid:
                valid_auc = auc(model.predict(valid_set.sequences, t_max), valid_set.labels)
            score = valid_auc if valid_auc is not None else -mean_loss
            history.epochs.append(EpochRecord(epoch, mean_loss, valid_auc))
            self.log_debug(f"loss={mean_loss:.5f} valid_auc={valid_auc}", indent=1, epoch=epoch)

            if score > best_score:
                best_score, best_state, waited = score, model.params.snapshot(), 0
                history.best_epoch, history.best_valid_auc = epoch, valid_auc
            else:
                waited += 1
                if waited >= cfg.patience:
                    history.stopped_early = True
                    break

        model.params.restore(best_state)
        return model, history


def train(
    model: GritNet,
    train_set: LabeledDataset,
    valid_set: Optional[LabeledDataset],
    config: TrainConfig,
    t_max: Optional[int] = None,
) -> Tuple[GritNet, TrainingHistory]:
    return Trainer(config).train(model, train_set, valid_set, t_max)


@dataclass
class _WeekJob:
    week: int
    fold: Optional[int]
    dataset: LabeledDataset
    model_config: GritNetConfig
    train_config: TrainConfig


def _train_week(job: _WeekJob) -> WeekResult:
    truncated, dropped = job.dataset.truncate(job.week)
    result = WeekResult(job.week, job.fold, dropped=dropped)
    if len(truncated) == 0:
        result.skipped = "no student has events in the window"
        return result
    if len(set(truncated.labels)) < 2:
        result.skipped = "surviving students form a single class"
        return result

    fit_idx, held_idx = holdout_split(truncated.labels, job.train_config.valid_fraction, job.train_config.seed)
    fit, held = truncated.subset(fit_idx), truncated.subset(held_idx)
    model = GritNet(job.model_config)
    result.model, result.history = train(model, fit, held, job.train_config, t_max=truncated.max_length())
    return result


def train_weekly(
    dataset: LabeledDataset,
    weeks: Sequence[int],
    model_config: GritNetConfig,
    train_config: TrainConfig,
    workers: Optional[int] = None,
) -> WeeklyTraining:
    """
    Train one independent model per week on week-truncated sequences.

    For week w every sequence keeps only events with day < first_day + 7w and
    T_max is recomputed on the truncated set. Students left without events
    are dropped for that week; weeks with nothing trainable are recorded as
    skipped.
    """
    jobs = [_WeekJob(w, None, dataset, model_config, train_config) for w in sorted(set(weeks))]
    results = run_jobs(_train_week, jobs, workers)
    return WeeklyTraining({r.week: r for r in results})


def train_folds(
    dataset: LabeledDataset,
    assignment: FoldAssignment,
    weeks: Sequence[int],
    model_config: GritNetConfig,
    train_config: TrainConfig,
    workers: Optional[int] = None,
) -> List[WeeklyTraining]:
    """Week-by-week models for every fold's training part, one job per (fold, week)."""
    weeks = sorted(set(weeks))
    jobs = [
        _WeekJob(w, fold, dataset.subset(assignment.train_indices(fold)), model_config, train_config)
        for fold in range(assignment.k)
        for w in weeks
    ]
    per_fold = [WeeklyTraining() for _ in range(assignment.k)]
    for result in run_jobs(_train_week, jobs, workers):
        per_fold[result.fold].results[result.week] = result
    return per_fold
