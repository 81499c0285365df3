from collections import defaultdict

import pytest
from pydantic import ValidationError
from scipy.stats import pointbiserialr

from errors import CalibrationError, SchemaMismatchError
from events.schema import EventKind, Outcome, action_token
from synthgen import (
    ShiftSpec,
    SyntheticCourseSpec,
    calibrate,
    generate,
    graduation_rate,
    load_course_spec,
    preset,
    preset_pace,
    preset_shift,
    scaled,
    shift,
    simulate,
    simulate_student,
)


@pytest.fixture
def small_spec():
    return SyntheticCourseSpec(name="toy", num_contents=10, num_quizzes=4, num_projects=1, events_per_day=5.0, delta_cap=10)


def _by_student(events):
    grouped = defaultdict(list)
    for event in events:
        grouped[event.student_id].append(event)
    return grouped


def test_generation_is_deterministic(small_spec):
    events_a, labels_a = generate(small_spec, 40, seed=11)
    events_b, labels_b = generate(small_spec, 40, seed=11)
    assert events_a == events_b
    assert labels_a == labels_b
    events_c, _ = generate(small_spec, 40, seed=12)
    assert events_c != events_a


def test_chunked_parallel_order_does_not_matter(small_spec):
    whole = simulate(small_spec, 30, seed=3)
    one = simulate_student(small_spec, 17, seed=3)
    assert whole.labels[one.student_id] == one.label
    assert [e for e in whole.events if e.student_id == one.student_id] == one.events


def test_generated_log_is_valid(small_spec):
    events, labels = generate(small_spec, 60, seed=5)
    schema = small_spec.schema
    grouped = _by_student(events)
    assert set(grouped) == set(labels)
    for student_events in grouped.values():
        days = [e.day for e in student_events]
        assert days == sorted(days)
        assert 0 <= days[0] and days[-1] < small_spec.term_days
        for event in student_events:
            action_token(schema, event)


def test_label_means_every_project_passed(small_spec):
    events, labels = generate(small_spec, 80, seed=2)
    for sid, student_events in _by_student(events).items():
        passed = {e.ordinal for e in student_events if e.kind is EventKind.PROJECT and e.outcome is Outcome.PASS}
        assert labels[sid] == int(len(passed) == small_spec.num_projects)


def test_harder_course_graduates_fewer(small_spec):
    easy = graduation_rate(small_spec.model_copy(update={"difficulty": 0.2}), 300, seed=1)
    hard = graduation_rate(small_spec.model_copy(update={"difficulty": 2.0}), 300, seed=1)
    assert easy > hard


def test_record_false_keeps_labels_and_lengths(small_spec):
    full = simulate(small_spec, 20, seed=4)
    light = simulate(small_spec, 20, seed=4, record=False)
    assert light.events == []
    assert light.labels == full.labels
    assert light.lengths == full.lengths
    assert full.mean_length == pytest.approx(len(full.events) / 20)


def test_calibration_meets_target(small_spec):
    tuned = calibrate(small_spec, target_rate=0.5, n_probe=200, seed=0, tolerance=0.05)
    assert tuned.target_rate == 0.5
    assert abs(graduation_rate(tuned, 200, seed=0) - 0.5) <= 0.05


def test_calibration_rejects_bad_targets(small_spec):
    with pytest.raises(CalibrationError):
        calibrate(small_spec, target_rate=1.0, n_probe=20)
    with pytest.raises(CalibrationError):
        calibrate(small_spec, n_probe=20)


def test_identity_shift_keeps_the_course(small_spec):
    assert shift(small_spec, ShiftSpec()) == small_spec


def test_shift_changes_counts_and_pacing(small_spec):
    target = shift(small_spec, ShiftSpec(delta_contents=5, delta_projects=1, difficulty_multiplier=1.5,
                                         pacing_multiplier=2.0, base_rate=0.3, name="toy_b"))
    assert (target.num_contents, target.num_quizzes, target.num_projects) == (15, 4, 2)
    assert target.difficulty == pytest.approx(1.5)
    assert target.events_per_day == pytest.approx(10.0)
    assert target.target_rate == 0.3
    assert target.name == "toy_b"
    with pytest.raises(SchemaMismatchError):
        shift(small_spec, ShiftSpec(delta_quizzes=-5))


def test_presets_match_course_shapes():
    assert preset("nd_a_v1").schema.vocab_size == 815
    assert preset("nd_b").schema.vocab_size == 756
    assert preset("nd_c").schema.vocab_size == 456
    with pytest.raises(KeyError):
        preset("nd_z")


def test_preset_shift_reaches_target_shape():
    target = shift(preset("nd_a_v1"), preset_shift("nd_a_v1", "nd_b"))
    assert target.schema == preset("nd_b").schema
    assert target.name == "nd_b"
    assert target.target_rate == pytest.approx(0.394)
    assert shift(preset("nd_a_v1"), preset_shift("nd_a_v1", "nd_a_v2")).schema == preset("nd_a_v1").schema


def test_scaled_shrinks_contents_and_quizzes():
    small = scaled(preset("nd_a_v1"), 0.1)
    assert (small.num_contents, small.num_quizzes, small.num_projects) == (47, 17, 4)
    assert small.reference_length == 42
    assert scaled(preset("nd_c"), 1.0) == preset("nd_c")
    with pytest.raises(ValueError):
        scaled(preset("nd_c"), 0.0)


def test_load_course_spec(tmp_path):
    path = tmp_path / "course.toml"
    path.write_text('[course]\npreset = "nd_c"\nterm_days = 70\n')
    spec = load_course_spec(path)
    assert spec.num_contents == 346
    assert spec.term_days == 70

    path.write_text('[course]\nname = "mini"\nnum_contents = 3\nnum_quizzes = 1\nnum_projects = 1\n')
    assert load_course_spec(path).schema.vocab_size == 3 + 2 + 2


def test_spec_validation():
    with pytest.raises(ValidationError):
        SyntheticCourseSpec(num_contents=0, num_quizzes=0, num_projects=0)
    with pytest.raises(ValidationError):
        SyntheticCourseSpec(num_contents=1, num_quizzes=0, num_projects=0, target_rate=1.5)


def test_doubling_the_hazard_lengthens_logs():
    # long curriculum, short term: nobody finishes, so length tracks activity
    spec = SyntheticCourseSpec(name="slow", num_contents=200, num_quizzes=40, num_projects=2,
                               events_per_day=2.0, term_days=28, hazard=0.3)
    calm = simulate(spec, 200, seed=3, record=False)
    busy = simulate(spec.model_copy(update={"hazard": 0.6}), 200, seed=3, record=False)
    assert busy.mean_length > 1.3 * calm.mean_length


def test_ability_correlates_with_graduation():
    result = simulate(scaled(preset("nd_c"), 0.1), 1000, seed=2, record=False)
    ids = sorted(result.labels)
    labels = [result.labels[sid] for sid in ids]
    assert 0.05 < result.graduation_rate < 0.95
    r, _ = pointbiserialr(labels, [result.abilities[sid] for sid in ids])
    assert r > 0.2


def test_preset_pace_follows_curriculum_length():
    assert preset("nd_a_v1").events_per_day == preset_pace(471 + 168 + 4)
    assert preset_pace(84, term_days=84, pace=7.0) == pytest.approx(7.0)
    assert scaled(preset("nd_c"), 0.1).events_per_day == pytest.approx(preset("nd_c").events_per_day * 0.1)


def test_easiest_setting_graduates_above_every_preset_target():
    for name in ("nd_a_v1", "nd_a_v2", "nd_b", "nd_c"):
        spec = scaled(preset(name), 0.1).model_copy(update={"difficulty": 0.0})
        assert graduation_rate(spec, 300, seed=0) > spec.target_rate + 0.1


@pytest.mark.slow
@pytest.mark.parametrize("name, target", [("nd_a_v1", 0.214), ("nd_b", 0.394), ("nd_c", 0.462)])
def test_presets_calibrate_to_their_graduation_rates(name, target):
    tuned = calibrate(preset(name), n_probe=2500, seed=0, tolerance=0.005)
    assert tuned.target_rate == pytest.approx(target)
    assert abs(graduation_rate(tuned, 5000, seed=0) - target) <= 0.03
