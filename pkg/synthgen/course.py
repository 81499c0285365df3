"""
Synthetic course descriptions, cross-course shifts and the preset courses.
"""

from pathlib import Path
from typing import Dict, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from config.config import load_toml
from errors import SchemaMismatchError
from events.schema import CourseSchema


class SyntheticCourseSpec(BaseModel):
    """
    Generative description of one course.

    Students draw an ability g ~ Beta(ability_alpha, ability_beta) and walk the
    curriculum in order. Each day a student is active with probability
    hazard * (0.5 + g), capped at 1, and drops out with probability
    dropout_hazard * (1.2 - g). Quiz and project success probabilities fall
    with item difficulty = difficulty * (difficulty_base + difficulty_slope * position).
    """
    name: str = "course"
    num_contents: int = Field(ge=0)
    num_quizzes: int = Field(ge=0)
    num_projects: int = Field(ge=0)
    delta_cap: int = Field(default=30, ge=1)
    term_days: int = Field(default=84, ge=7)
    ability_alpha: float = Field(default=2.0, gt=0)
    ability_beta: float = Field(default=2.0, gt=0)
    # Daily activity probability scale
    hazard: float = Field(default=0.6, gt=0, le=1)
    dropout_hazard: float = Field(default=0.01, gt=0, lt=1)
    # Mean number of actions on an active day
    events_per_day: float = Field(default=10.0, gt=0)
    difficulty: float = Field(default=1.0, ge=0)
    difficulty_base: float = Field(default=0.3, ge=0)
    difficulty_slope: float = Field(default=0.4, ge=0)
    # Share of contents / quizzes a student passes over without a trace
    skip_rate: float = Field(default=0.1, ge=0, lt=1)
    # Share of actions that revisit an already seen content
    review_rate: float = Field(default=0.15, ge=0, lt=1)
    # Desired graduation rate for calibrate(); None = leave difficulty as is
    target_rate: Optional[float] = None
    # Average sequence length of the course this spec imitates (informational)
    reference_length: Optional[int] = None
    seed: int = 0

    @field_validator("target_rate")
    @classmethod
    def _rate_in_range(cls, rate: Optional[float]) -> Optional[float]:
        if rate is not None and not 0.0 < rate < 1.0:
            raise ValueError(f"target_rate {rate} outside (0, 1)")
        return rate

    @model_validator(mode="after")
    def _curriculum_present(self) -> "SyntheticCourseSpec":
        if self.num_contents + self.num_quizzes + self.num_projects == 0:
            raise ValueError("course has no items")
        return self

    @property
    def schema(self) -> CourseSchema:
        return CourseSchema(self.num_contents, self.num_quizzes, self.num_projects, self.delta_cap)


class ShiftSpec(BaseModel):
    """Differences between a source course and a target course."""
    delta_contents: int = 0
    delta_quizzes: int = 0
    delta_projects: int = 0
    difficulty_multiplier: float = Field(default=1.0, gt=0)
    pacing_multiplier: float = Field(default=1.0, gt=0)
    base_rate: Optional[float] = None
    name: Optional[str] = None

    @field_validator("base_rate")
    @classmethod
    def _rate_in_range(cls, rate: Optional[float]) -> Optional[float]:
        if rate is not None and not 0.0 < rate < 1.0:
            raise ValueError(f"base_rate {rate} outside (0, 1)")
        return rate


def shift(spec: SyntheticCourseSpec, shift_spec: ShiftSpec) -> SyntheticCourseSpec:
    """
    Derive a target course from ``spec``.

    Raises:
        SchemaMismatchError: If the shifted item counts are negative or empty
    """
    counts = {
        "num_contents": spec.num_contents + shift_spec.delta_contents,
        "num_quizzes": spec.num_quizzes + shift_spec.delta_quizzes,
        "num_projects": spec.num_projects + shift_spec.delta_projects,
    }
    if min(counts.values()) < 0 or sum(counts.values()) == 0:
        raise SchemaMismatchError(f"Shift {shift_spec.model_dump()} leaves an invalid schema {counts}")
    update = dict(counts)
    update["difficulty"] = spec.difficulty * shift_spec.difficulty_multiplier
    update["events_per_day"] = spec.events_per_day * shift_spec.pacing_multiplier
    if shift_spec.base_rate is not None:
        update["target_rate"] = shift_spec.base_rate
    if shift_spec.name is not None:
        update["name"] = shift_spec.name
    return SyntheticCourseSpec(**{**spec.model_dump(), **update})


def scaled(spec: SyntheticCourseSpec, factor: float) -> SyntheticCourseSpec:
    """Shrink (or grow) contents, quizzes and daily pacing together; projects are kept."""
    if factor == 1.0:
        return spec
    if factor <= 0:
        raise ValueError(f"scale factor must be positive, got {factor}")
    return spec.model_copy(update={
        "num_contents": max(1, round(spec.num_contents * factor)) if spec.num_contents else 0,
        "num_quizzes": max(1, round(spec.num_quizzes * factor)) if spec.num_quizzes else 0,
        "events_per_day": spec.events_per_day * factor,
        "reference_length": round(spec.reference_length * factor) if spec.reference_length else None,
    })


# Items covered per active day, relative to items per term day
PRESET_PACE = 7.0

# Shapes and graduation rates of the four programs the presets imitate
PRESETS: Dict[str, dict] = {
    "nd_a_v1": dict(num_contents=471, num_quizzes=168, num_projects=4, target_rate=0.214, reference_length=421),
    "nd_a_v2": dict(num_contents=471, num_quizzes=168, num_projects=4, target_rate=0.203, reference_length=881),
    "nd_b": dict(num_contents=568, num_quizzes=84, num_projects=10, target_rate=0.394, reference_length=675),
    "nd_c": dict(num_contents=346, num_quizzes=50, num_projects=5, target_rate=0.462, reference_length=430),
}


def preset_pace(num_items: int, term_days: int = 84, pace: float = PRESET_PACE) -> float:
    """
    Actions per active day for a curriculum of ``num_items`` items.

    At this pace an average student (ability 0.5, default hazard) covers the
    curriculum in about a third of the term, so item difficulty decides who
    graduates rather than running out of days.
    """
    return round(pace * num_items / term_days, 2)


def preset(name: str) -> SyntheticCourseSpec:
    if name not in PRESETS:
        raise KeyError(f"Unknown course preset '{name}'; available: {sorted(PRESETS)}")
    shape = PRESETS[name]
    items = shape["num_contents"] + shape["num_quizzes"] + shape["num_projects"]
    return SyntheticCourseSpec(name=name, events_per_day=preset_pace(items), **shape)


def preset_shift(source: str, target: str) -> ShiftSpec:
    """The shift that turns preset ``source`` into preset ``target``."""
    src, tgt = preset(source), preset(target)
    return ShiftSpec(
        delta_contents=tgt.num_contents - src.num_contents,
        delta_quizzes=tgt.num_quizzes - src.num_quizzes,
        delta_projects=tgt.num_projects - src.num_projects,
        pacing_multiplier=tgt.reference_length / src.reference_length,
        base_rate=tgt.target_rate,
        name=target,
    )


def load_course_spec(path: Path) -> SyntheticCourseSpec:
    """
    Read a course spec TOML file.

    A ``preset`` key starts from that preset; other keys override it.
    """
    data = load_toml(path)
    course = data.get("course", data)
    name = course.pop("preset", None)
    if name is not None:
        return SyntheticCourseSpec(**{**preset(name).model_dump(), **course})
    return SyntheticCourseSpec(**course)
