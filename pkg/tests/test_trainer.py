from dataclasses import replace

import numpy as np
import pytest

from config.config import AdaptConfig, GritNetConfig, TrainConfig
from conftest import make_events
from errors import DegenerateLabelError, EmptyInputError, StratificationError, TrainingConfigError
from evaluation.metrics import auc
from events.schema import EventKind, Outcome, RawEvent
from events.tokenizer import LabeledDataset, tokenize_course
from gritnet import GritNet
from gritnet.checkpoint import save_checkpoint
from synthgen import calibrate, generate, preset, scaled
from trainer import Adapter, Trainer, fc_probabilities, holdout_split, kfold, pseudo_label, stratified_kfold, train_folds, train_weekly
from trainer.adaptation import ThetaResult, _pick


def test_stratified_folds_of_a_small_list():
    assignment = stratified_kfold([1, 1, 1, 1, 0, 0], k=2, seed=0)
    assert assignment.sizes() == [3, 3]
    labels = np.array([1, 1, 1, 1, 0, 0])
    positives = [int(labels[assignment.test_indices(f)].sum()) for f in range(2)]
    assert positives == [2, 2]
    assert set(assignment.test_indices(0)) | set(assignment.test_indices(1)) == set(range(6))


def test_stratified_folds_keep_class_shares():
    labels = np.array([1] * 37 + [0] * 63)
    assignment = stratified_kfold(labels, k=5, seed=3)
    for fold in range(5):
        held = labels[assignment.test_indices(fold)]
        assert held.size == 20
        assert int(held.sum()) in (7, 8)
    assert np.array_equal(assignment.folds, stratified_kfold(labels, k=5, seed=3).folds)


@pytest.mark.parametrize(
    "labels, k",
    [([1, 1, 1], 2), ([0, 0], 2), ([1, 0, 1], 4), ([1, 1, 1, 1, 0], 2), ([1, 0, 1, 0], 1), ([1, 0, 2, 0, 1], 2)],
)
def test_stratified_folds_preconditions(labels, k):
    with pytest.raises(StratificationError):
        stratified_kfold(labels, k=k)


def test_unlabeled_kfold_and_mapping():
    assignment = kfold(7, k=3, seed=1, student_ids=[f"s{i}" for i in range(7)])
    assert sorted(assignment.sizes()) == [2, 2, 3]
    assert set(assignment.as_mapping()) == {f"s{i}" for i in range(7)}
    with pytest.raises(StratificationError):
        kfold(2, k=3)


def test_holdout_split_keeps_both_classes_in_fit():
    labels = [1, 1, 1, 1, 1, 0, 0, 0, 0, 0]
    fit, held = holdout_split(labels, 0.2, seed=0)
    assert len(fit) + len(held) == 10
    assert sorted(np.asarray(labels)[held].tolist()) == [0, 1]
    assert holdout_split([1, 0], 0.2)[1].size == 0


def test_training_reduces_loss(toy_dataset, tiny_config):
    config = TrainConfig(epochs=15, batch_size=8, learning_rate=0.05, patience=20, seed=0)
    model, history = Trainer(config).train(GritNet(tiny_config), toy_dataset)
    losses = [r.loss for r in history.epochs]
    assert len(losses) == 15
    assert min(losses[1:]) < losses[0]
    assert history.t_max == toy_dataset.max_length()
    assert auc(model.predict(toy_dataset.sequences, history.t_max), toy_dataset.labels) > 75.0


def test_training_restores_best_validation_epoch(toy_dataset, tiny_config):
    fit_idx, held_idx = holdout_split(toy_dataset.labels, 0.25, seed=0)
    fit, held = toy_dataset.subset(fit_idx), toy_dataset.subset(held_idx)
    config = TrainConfig(epochs=6, batch_size=8, learning_rate=0.05, patience=2, seed=0)
    model, history = Trainer(config).train(GritNet(tiny_config), fit, held)
    assert history.best_valid_auc == max(r.valid_auc for r in history.epochs)
    assert auc(model.predict(held.sequences, history.t_max), held.labels) == pytest.approx(history.best_valid_auc)


def test_training_rejects_single_class(toy_dataset, tiny_config):
    positives = toy_dataset.subset([i for i, y in enumerate(toy_dataset.labels) if y == 1])
    with pytest.raises(TrainingConfigError):
        Trainer(TrainConfig(epochs=1)).train(GritNet(tiny_config), positives)


def test_train_weekly_builds_one_model_per_week(toy_dataset, tiny_config):
    weekly = train_weekly(toy_dataset, [1, 2], tiny_config, TrainConfig(epochs=2, batch_size=8), workers=1)
    assert sorted(weekly.models) == [1, 2]
    assert weekly.skipped == {}
    assert weekly.results[1].t_max <= weekly.results[2].t_max


def test_train_folds_covers_every_fold_and_week(toy_dataset, tiny_config):
    assignment = stratified_kfold(toy_dataset.labels, k=3, seed=0)
    per_fold = train_folds(toy_dataset, assignment, [1, 2], tiny_config, TrainConfig(epochs=1, batch_size=8), workers=1)
    assert len(per_fold) == 3
    for fold, weekly in enumerate(per_fold):
        assert sorted(weekly.models) == [1, 2]
        assert all(r.fold == fold for r in weekly.results.values())


def test_pseudo_label_threshold_is_inclusive():
    assert pseudo_label([0.1, 0.3, 0.29999, 0.9], 0.3).tolist() == [0, 1, 0, 1]


def test_separable_toy_set_is_learned(toy_dataset, tiny_config):
    config = TrainConfig(epochs=60, batch_size=8, learning_rate=0.05, patience=10, seed=0)
    model, history = Trainer(config).train(GritNet(tiny_config), toy_dataset, toy_dataset)
    assert history.best_valid_auc >= 99.0
    assert auc(model.predict(toy_dataset.sequences, history.t_max), toy_dataset.labels) >= 99.0


def _flip(event):
    flipped = {Outcome.PASS: Outcome.FAIL, Outcome.FAIL: Outcome.PASS,
               Outcome.CORRECT: Outcome.INCORRECT, Outcome.INCORRECT: Outcome.CORRECT, None: None}
    return replace(event, outcome=flipped[event.outcome], day=event.day + 4)


def test_events_after_the_window_never_reach_the_week_model(tmp_path, toy_schema, tiny_config):
    events, labels = make_events(toy_schema, 24, seed=3)
    first = {}
    for event in sorted(events, key=lambda e: e.day):
        first.setdefault(event.student_id, event.day)
    horizon = {sid: day + 7 for sid, day in first.items()}
    mutated = [_flip(e) if e.day >= horizon[e.student_id] else e for e in events]
    mutated += [RawEvent(sid, EventKind.QUIZ, 1, Outcome.CORRECT, horizon[sid] + 10) for sid in labels]

    original = LabeledDataset.from_mapping(tokenize_course(toy_schema, events), labels)
    changed = LabeledDataset.from_mapping(tokenize_course(toy_schema, mutated), labels)
    assert [s.actions for s in original.sequences] != [s.actions for s in changed.sequences]

    config = TrainConfig(epochs=3, batch_size=8, learning_rate=0.05, seed=2)
    digests = []
    for name, dataset in (("original", original), ("changed", changed)):
        result = train_weekly(dataset, [1], tiny_config, config, workers=1).results[1]
        digests.append(save_checkpoint(result.model, tmp_path / name / "week1.gnet", result.t_max))
    assert digests[0] == digests[1]


def test_pseudo_labels_shrink_as_theta_grows():
    predictions = np.random.default_rng(6).random(200)
    thetas = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.75, 0.99]
    positives = [set(np.flatnonzero(pseudo_label(predictions, t)).tolist()) for t in thetas]
    for looser, stricter in zip(positives, positives[1:]):
        assert stricter <= looser
    assert len(positives[0]) > len(positives[-1])


@pytest.mark.slow
def test_overfits_two_hundred_calibrated_students():
    spec = calibrate(scaled(preset("nd_a_v1"), 0.1), n_probe=1000, seed=0)
    events, labels = generate(spec, 200, seed=1)
    dataset = LabeledDataset.from_mapping(tokenize_course(spec.schema, events), labels)
    config = GritNetConfig(vocab_size=spec.schema.vocab_size, delta_buckets=spec.schema.delta_buckets,
                           embedding_dim=64, hidden_dim=32, seed=0)
    trainer = Trainer(TrainConfig(epochs=50, batch_size=32, learning_rate=0.01, patience=10, seed=0))
    _, history = trainer.train(GritNet(config), dataset, dataset)
    assert history.best_valid_auc >= 99.0
    assert len(history.epochs) <= 50


def _zero_head(model):
    model.params.fc_W.data[...] = 0
    model.params.fc_b.data[...] = 0
    return model


def test_adapt_with_constant_scores_is_degenerate(toy_dataset, tiny_config):
    model = _zero_head(GritNet(tiny_config))
    adapter = Adapter(AdaptConfig(thresholds=[0.1, 0.4, 0.6]), TrainConfig(epochs=1), workers=1)
    with pytest.raises(DegenerateLabelError):
        adapter.adapt(model, toy_dataset.sequences)
    with pytest.raises(EmptyInputError):
        adapter.adapt(model, [])


def _median_theta(model, sequences, t_max):
    embeddings = model.embed_sequences(sequences, t_max)
    predictions = fc_probabilities(embeddings, {"fc_W": model.params.fc_W.data, "fc_b": model.params.fc_b.data})
    return float(np.median(predictions)), predictions


def test_adaptation_freezes_everything_but_fc(toy_dataset, tiny_config):
    model = GritNet(tiny_config)
    t_max = toy_dataset.max_length()
    theta, _ = _median_theta(model, toy_dataset.sequences, t_max)
    adapter = Adapter(AdaptConfig(thresholds=[theta], epochs=3), TrainConfig(learning_rate=0.05, batch_size=8), workers=1)
    result = adapter.adapt(model, toy_dataset.sequences, t_max)

    assert result.frozen_intact
    assert result.model.params.non_fc_digest() == model.params.non_fc_digest()
    assert not np.array_equal(result.model.params.fc_W.data, model.params.fc_W.data)
    assert result.theta == theta
    assert set(result.models) == {theta}
    # the source model itself is untouched
    assert all(p.trainable for p in model.params.all())


def test_oracle_with_pseudo_labels_matches_adaptation(toy_dataset, tiny_config):
    model = GritNet(tiny_config)
    t_max = toy_dataset.max_length()
    theta, predictions = _median_theta(model, toy_dataset.sequences, t_max)
    adapter = Adapter(AdaptConfig(thresholds=[theta], epochs=2), TrainConfig(learning_rate=0.05, batch_size=8), workers=1)

    adapted = adapter.adapt(model, toy_dataset.sequences, t_max)
    oracle = adapter.oracle_adapt(model, toy_dataset.sequences, pseudo_label(predictions, theta), t_max)

    assert oracle.theta is None
    assert np.array_equal(adapted.model.params.fc_W.data, oracle.model.params.fc_W.data)
    assert np.array_equal(adapted.model.params.fc_b.data, oracle.model.params.fc_b.data)


def test_oracle_rejects_mismatched_labels(toy_dataset, tiny_config):
    adapter = Adapter(AdaptConfig(), TrainConfig(epochs=1), workers=1)
    with pytest.raises(TrainingConfigError):
        adapter.oracle_adapt(GritNet(tiny_config), toy_dataset.sequences, [1, 0])
    with pytest.raises(TrainingConfigError):
        adapter.oracle_adapt(GritNet(tiny_config), toy_dataset.sequences, [1] * len(toy_dataset))


def test_theta_selection_prefers_smaller_theta_on_ties():
    sweep = [
        ThetaResult(0.3, selection_auc=80.0),
        ThetaResult(0.1, selection_auc=80.0),
        ThetaResult(0.2, degenerate="single class"),
        ThetaResult(0.4, selection_auc=70.0),
    ]
    assert _pick(sweep).theta == 0.1
