import numpy as np
import pytest

from baseline import FEATURE_NAMES, LogRegModel, featurize, featurize_all, load_logreg, predict, save_logreg, train_logreg
from errors import ShapeError, TrainingConfigError
from evaluation.metrics import auc
from events.tokenizer import TokenizedSequence


def test_featurize_counts_by_block(toy_schema):
    # content 1, quiz 1 correct, quiz 2 correct
    seq = TokenizedSequence("s", (0, 3, 4), (0, 0, 2), (0, 0, 2))
    assert featurize(toy_schema, seq, 1).tolist() == [1, 2, 0, 0, 0, 2, 3]


def test_featurize_respects_the_week_window(toy_schema):
    # quiz 1 wrong, project pass, project fail; the fail lands in week 2
    seq = TokenizedSequence("s", (5, 7, 8), (0, 3, 5), (1, 4, 9))
    assert featurize(toy_schema, seq, 1).tolist() == [0, 0, 1, 1, 0, 2, 2]
    assert featurize(toy_schema, seq, 2).tolist() == [0, 0, 1, 1, 1, 3, 3]


def test_featurize_all_shape(toy_dataset, toy_schema):
    matrix = featurize_all(toy_schema, toy_dataset.sequences, 2)
    assert matrix.shape == (len(toy_dataset), len(FEATURE_NAMES))
    assert featurize_all(toy_schema, [], 1).shape == (0, len(FEATURE_NAMES))


def test_zero_weights_predict_one_half():
    model = LogRegModel(np.zeros(3), 0.0, np.zeros(3), np.ones(3))
    assert predict(model, np.array([[1.0, -2.0, 5.0], [0.0, 0.0, 0.0]])).tolist() == [0.5, 0.5]
    with pytest.raises(ShapeError):
        predict(model, np.zeros((1, 2)))


def test_logreg_separates_toy_students(toy_dataset, toy_schema):
    features = featurize_all(toy_schema, toy_dataset.sequences, 8)
    model = train_logreg(features, toy_dataset.label_array(), seed=0)
    assert auc(predict(model, features), toy_dataset.labels) == pytest.approx(100.0)


def test_logreg_rejects_single_class():
    with pytest.raises(TrainingConfigError):
        train_logreg(np.ones((3, 2)), np.array([1, 1, 1]))
    with pytest.raises(TrainingConfigError):
        train_logreg(np.zeros((0, 2)), np.array([]))


def test_logreg_file_round_trip(tmp_path, toy_dataset, toy_schema):
    features = featurize_all(toy_schema, toy_dataset.sequences, 4)
    model = train_logreg(features, toy_dataset.label_array(), epochs=20)
    path = tmp_path / "baseline" / "week4.json"
    save_logreg(model, path)
    loaded = load_logreg(path)
    assert np.allclose(predict(loaded, features), predict(model, features))
