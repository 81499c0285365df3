"""
Reading and writing the course file formats.

- Event log: JSON lines, one record per event with fields student_id, kind,
  ordinal, outcome (null|correct|incorrect|pass|fail) and day.
- Labels: CSV with header ``student_id,label``; label is 0 or 1.
- Schema: ``key=value`` lines with num_contents, num_quizzes, num_projects
  and delta_cap, read with python-dotenv.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional

import pandas as pd
from dotenv import dotenv_values

from errors import DatasetValidationError, SchemaMismatchError
from log.logger import get_logger
from .schema import CourseSchema, RawEvent, validate_event
from .tokenizer import LabeledDataset, TokenizedSequence, tokenize_course

logger = get_logger("Course IO")

SCHEMA_KEYS = ("num_contents", "num_quizzes", "num_projects", "delta_cap")


def write_schema(schema: CourseSchema, path: Path) -> None:
    lines = [f"{key}={value}" for key, value in schema.to_dict().items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_schema(path: Path) -> CourseSchema:
    values = dotenv_values(path)
    missing = [k for k in SCHEMA_KEYS[:3] if k not in values]
    if missing:
        raise DatasetValidationError(f"Schema file {path} lacks {', '.join(missing)}")
    try:
        return CourseSchema(
            num_contents=int(values["num_contents"]),
            num_quizzes=int(values["num_quizzes"]),
            num_projects=int(values["num_projects"]),
            delta_cap=int(values.get("delta_cap") or 30),
        )
    except (TypeError, ValueError) as exc:
        raise DatasetValidationError(f"Schema file {path} has a non-integer value: {exc}") from exc


def write_events(events: Iterable[RawEvent], path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for event in events:
            f.write(json.dumps(event.to_dict(), separators=(",", ":")) + "\n")


def read_events(path: Path) -> List[RawEvent]:
    events = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetValidationError(f"{path}:{line_no}: invalid JSON ({exc})") from exc
            try:
                events.append(RawEvent.from_dict(record))
            except SchemaMismatchError as exc:
                raise DatasetValidationError(f"{path}:{line_no}: {exc}") from exc
    return events


def write_labels(labels: Dict[str, int], path: Path) -> None:
    frame = pd.DataFrame({"student_id": list(labels.keys()), "label": [int(v) for v in labels.values()]})
    frame.to_csv(path, index=False, lineterminator="\n")


def read_labels(path: Path) -> Dict[str, int]:
    try:
        frame = pd.read_csv(path, dtype={"student_id": str})
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DatasetValidationError(f"Label file {path} could not be parsed: {exc}") from exc
    if list(frame.columns) != ["student_id", "label"]:
        raise DatasetValidationError(f"Label file {path} must have header student_id,label, got {list(frame.columns)}")
    if frame["student_id"].duplicated().any():
        raise DatasetValidationError(f"Label file {path} repeats student ids")
    if not frame["label"].isin([0, 1]).all():
        raise DatasetValidationError(f"Label file {path} has labels other than 0/1")
    return dict(zip(frame["student_id"], frame["label"].astype(int)))


@dataclass
class CourseData:
    """A loaded course: schema, tokenized sequences and (optionally) labels."""
    schema: CourseSchema
    sequences: Dict[str, TokenizedSequence]
    labels: Optional[Dict[str, int]] = None
    name: str = "course"
    events: List[RawEvent] = field(default_factory=list, repr=False)

    def dataset(self) -> LabeledDataset:
        if self.labels is None:
            raise DatasetValidationError(f"Course '{self.name}' has no labels")
        return LabeledDataset.from_mapping(self.sequences, self.labels)

    def unlabeled(self) -> List[TokenizedSequence]:
        return list(self.sequences.values())


def validate_course(schema: CourseSchema, events: List[RawEvent], labels: Optional[Dict[str, int]]) -> None:
    """Check events against the schema and labels against the event log."""
    for event in events:
        try:
            validate_event(schema, event)
        except SchemaMismatchError as exc:
            raise DatasetValidationError(str(exc)) from exc
    if labels is not None:
        with_events = {e.student_id for e in events}
        no_events = [sid for sid in labels if sid not in with_events]
        if no_events:
            raise DatasetValidationError(f"{len(no_events)} labelled students have no events, e.g. {no_events[:3]}")
        no_label = with_events.difference(labels)
        if no_label:
            raise DatasetValidationError(f"{len(no_label)} students have events but no label, e.g. {sorted(no_label)[:3]}")


def load_course(schema_path: Path, events_path: Path, labels_path: Optional[Path] = None, name: str = "course") -> CourseData:
    schema = read_schema(schema_path)
    events = read_events(events_path)
    labels = read_labels(labels_path) if labels_path is not None else None
    validate_course(schema, events, labels)
    sequences = tokenize_course(schema, events)
    logger.info(f"Loaded course {name}: {len(sequences)} students, {len(events)} events, vocab L={schema.vocab_size}")
    return CourseData(schema=schema, sequences=sequences, labels=labels, name=name, events=events)


def save_course(course_dir: Path, schema: CourseSchema, events: List[RawEvent], labels: Dict[str, int]) -> Dict[str, Path]:
    course_dir = Path(course_dir)
    course_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "schema": course_dir / "schema.txt",
        "events": course_dir / "events.jsonl",
        "labels": course_dir / "labels.csv",
    }
    write_schema(schema, paths["schema"])
    write_events(events, paths["events"])
    write_labels(labels, paths["labels"])
    return paths
