"""
JSON run report written next to every command's outputs.
"""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from log.logger import get_logger

logger = get_logger("Report")


@dataclass
class AucRecord:
    system: str
    week: int
    fold: Optional[int]
    auc: Optional[float]
    theta: Optional[float] = None
    scenario: Optional[str] = None
    seed: Optional[int] = None


@dataclass
class RunReport:
    """
    Everything a run decided and measured.

    ``config_hash`` is the sha256 of the canonical configuration JSON, so two
    reports with equal hashes and seeds describe the same experiment.
    """
    command: str
    config_hash: str
    seeds: List[int] = field(default_factory=list)
    aucs: List[AucRecord] = field(default_factory=list)
    dropped_students: Dict[str, int] = field(default_factory=dict)
    skipped_weeks: List[Dict[str, Any]] = field(default_factory=list)
    remap_notices: List[Dict[str, Any]] = field(default_factory=list)
    thetas: List[Dict[str, Any]] = field(default_factory=list)
    checkpoints: Dict[str, str] = field(default_factory=dict)
    tables: Dict[str, Any] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def add_auc(self, system: str, week: int, fold: Optional[int], value: Optional[float], **extra) -> None:
        self.aucs.append(AucRecord(system, week, fold, value, **extra))

    def add_dropped(self, key: str, count: int) -> None:
        self.dropped_students[key] = self.dropped_students.get(key, 0) + count

    def add_skipped(self, week: int, reason: str, **extra) -> None:
        self.skipped_weeks.append({"week": week, "reason": reason, **extra})

    def add_note(self, message: str) -> None:
        self.notes.append(message)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def write(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
        logger.info(f"Run report written to {path}")
        return path

    @classmethod
    def load(cls, path: Path) -> "RunReport":
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        data["aucs"] = [AucRecord(**r) for r in data.get("aucs", [])]
        return cls(**data)
