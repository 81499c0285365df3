import numpy as np
import pandas as pd
import pytest

from errors import UndefinedARRError, UndefinedAUCError, UsageError
from evaluation import (
    CurvePoint,
    WeeklyCurve,
    arr,
    arr_report,
    auc,
    curve_from_aucs,
    emit_plot,
    mean_abs_loss,
    pairwise_auc,
    read_curves,
    try_auc,
    weekly_curve,
    write_table,
)
from events.tokenizer import LabeledDataset, TokenizedSequence


def test_auc_of_a_small_case():
    assert auc([0.9, 0.8, 0.3, 0.1], [1, 1, 0, 0]) == pytest.approx(100.0)
    assert auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == pytest.approx(75.0)
    assert auc([0.9, 0.4, 0.6, 0.2, 0.7], [1, 0, 1, 0, 0]) == pytest.approx(5 / 6 * 100)


def test_auc_counts_ties_as_half():
    assert auc([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0]) == pytest.approx(50.0)
    assert auc([0.9, 0.5, 0.5, 0.1], [1, 1, 0, 0]) == pytest.approx(87.5)


def test_rank_auc_agrees_with_pairwise_definition():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(2, 40))
        labels = rng.integers(0, 2, n)
        labels[0], labels[1] = 0, 1
        # coarse scores produce ties
        scores = rng.integers(0, 6, n) / 5.0
        assert auc(scores, labels) == pytest.approx(pairwise_auc(scores, labels), abs=1e-9)


def test_auc_undefined_for_one_class():
    with pytest.raises(UndefinedAUCError):
        auc([0.1, 0.2], [1, 1])
    assert try_auc([0.1, 0.2], [0, 0]) is None
    with pytest.raises(ValueError):
        auc([0.1, 0.2, 0.3], [1, 0])


def test_auc_rejects_labels_outside_zero_one():
    with pytest.raises(ValueError):
        auc([0.1, 0.2, 0.3], [1, 0, 2])
    with pytest.raises(ValueError):
        auc([0.1, 0.2], [-1, 1])
    assert auc([0.2, 0.8], [False, True]) == pytest.approx(100.0)


def test_auc_is_unchanged_by_monotone_transforms():
    rng = np.random.default_rng(4)
    scores = rng.random(60)
    labels = rng.integers(0, 2, 60)
    labels[:2] = [0, 1]
    expected = auc(scores, labels)
    assert auc(np.exp(3 * scores), labels) == pytest.approx(expected, abs=1e-9)
    assert auc(np.log(scores + 1e-3), labels) == pytest.approx(expected, abs=1e-9)
    assert auc(10 * scores - 4, labels) == pytest.approx(expected, abs=1e-9)


def test_auc_of_flipped_labels_is_the_complement():
    rng = np.random.default_rng(5)
    for _ in range(20):
        scores = rng.integers(0, 4, 30) / 3.0
        labels = rng.integers(0, 2, 30)
        labels[:2] = [0, 1]
        assert auc(scores, labels) + auc(scores, 1 - labels) == pytest.approx(100.0, abs=1e-9)


@pytest.mark.parametrize("scale, shift", [(2.0, -15.0), (0.01, 0.5), (-3.0, 200.0)])
def test_arr_is_unchanged_by_affine_maps(scale, shift):
    values = (60.0, 67.0, 70.0)
    moved = [scale * v + shift for v in values]
    assert arr(*moved) == pytest.approx(arr(*values))


def test_arr():
    assert arr(60.0, 67.0, 70.0) == pytest.approx(0.7)
    assert arr(60.0, 70.0, 70.0) == pytest.approx(1.0)
    assert arr(60.0, 55.0, 70.0) == pytest.approx(-0.5)
    with pytest.raises(UndefinedARRError):
        arr(65.0, 66.0, 65.0)


def test_curve_uses_population_std():
    curve = curve_from_aucs("GritNet baseline", {1: [80.0, 90.0], 2: [70.0, None], 3: [None, None]})
    assert curve.weeks == [1, 2]
    assert curve.points[0].mean_auc == pytest.approx(85.0)
    assert curve.points[0].std_auc == pytest.approx(5.0)
    assert curve.points[1].folds == 1
    assert curve.points[1].undefined_folds == 1


def test_curve_rejects_bad_points():
    with pytest.raises(ValueError):
        WeeklyCurve("x", [CurvePoint(2, 50.0, 0.0, 1), CurvePoint(1, 50.0, 0.0, 1)])
    with pytest.raises(ValueError):
        WeeklyCurve("x", [CurvePoint(1, 101.0, 0.0, 1)])


def test_weekly_curve_evaluates_each_fold():
    seqs = [TokenizedSequence(f"s{i}", (0,), (0,), (0,)) for i in range(4)]
    data = LabeledDataset(seqs, [1, 1, 0, 0])
    perfect = lambda s: np.array([0.9, 0.8, 0.2, 0.1])
    inverted = lambda s: np.array([0.1, 0.2, 0.8, 0.9])
    curve = weekly_curve("sys", {1: [perfect, inverted]}, {1: [data, data]})
    assert curve.at(1) == pytest.approx(50.0)
    assert curve.points[0].std_auc == pytest.approx(50.0)


def _curve(system, values):
    return WeeklyCurve(system, [CurvePoint(w, v, 0.0, 1) for w, v in enumerate(values, start=1)])


def test_arr_report_and_oracle_gap():
    baseline = _curve("GritNet baseline", [60.0, 62.0, 64.0, 66.0, 70.0])
    adapted = _curve("Adapted GritNet", [67.0, 64.0, 64.0, 70.0, 75.0])
    oracle = _curve("Oracle GritNet", [70.0, 66.0, 64.0, 70.0, 80.0])

    report = arr_report(baseline, adapted, oracle)
    assert report.per_week[1] == pytest.approx(0.7)
    assert report.per_week[2] == pytest.approx(0.5)
    assert report.per_week[3] is None
    assert report.undefined_weeks == [3]
    assert report.mean == pytest.approx((0.7 + 0.5 + 1.0) / 3)

    assert mean_abs_loss(baseline, oracle, [1, 2]) == pytest.approx(7.0)
    assert mean_abs_loss(oracle, oracle, range(1, 6)) == 0.0
    assert mean_abs_loss(baseline, oracle, [9]) is None


def test_emit_plot_writes_csv_and_svg(tmp_path):
    curves = [_curve("Vanilla baseline", [55.0, 58.0]), _curve("GritNet baseline", [60.0, 65.5])]
    csv_path, svg_path = emit_plot(curves, tmp_path / "scenario", title="toy")

    frame = pd.read_csv(csv_path)
    assert list(frame.columns) == ["system", "week", "mean_auc", "std_auc"]
    assert len(frame) == 4
    assert svg_path.read_text().lstrip().startswith("<?xml")

    csv_bytes, svg_bytes = csv_path.read_bytes(), svg_path.read_bytes()
    emit_plot(curves, tmp_path / "scenario", title="toy")
    assert csv_path.read_bytes() == csv_bytes
    assert svg_path.read_bytes() == svg_bytes

    loaded = read_curves(csv_path)
    assert [c.system for c in loaded] == ["Vanilla baseline", "GritNet baseline"]
    assert loaded[1].at(2) == pytest.approx(65.5)


def test_emit_plot_needs_a_curve(tmp_path):
    with pytest.raises(UsageError):
        emit_plot([], tmp_path / "empty")


def test_read_curves_checks_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("system,week\nx,1\n")
    with pytest.raises(UsageError):
        read_curves(path)


def test_write_table(tmp_path):
    path = write_table([{"system": "a", "metric": "arr", "week_1": 0.5}], tmp_path / "t.csv")
    assert path.read_text().splitlines() == ["system,metric,week_1", "a,arr,0.500000"]
