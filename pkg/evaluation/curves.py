"""
Week-by-week AUC curves and the derived recovery / oracle-gap tables.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from errors import UndefinedARRError, UndefinedAUCError
from events.tokenizer import LabeledDataset, TokenizedSequence
from log.logger import get_logger
from .metrics import arr, auc, mean_or_none

logger = get_logger("Curves")

Predictor = Callable[[Sequence[TokenizedSequence]], np.ndarray]


@dataclass
class CurvePoint:
    week: int
    mean_auc: float
    std_auc: float
    folds: int
    undefined_folds: int = 0


@dataclass
class WeeklyCurve:
    """Mean and spread of per-fold AUC for one system, week by week."""
    system: str
    points: List[CurvePoint] = field(default_factory=list)

    def __post_init__(self):
        weeks = [p.week for p in self.points]
        if any(b <= a for a, b in zip(weeks, weeks[1:])):
            raise ValueError(f"Curve '{self.system}': weeks must be strictly increasing, got {weeks}")
        for p in self.points:
            if not 0.0 <= p.mean_auc <= 100.0:
                raise ValueError(f"Curve '{self.system}': AUC {p.mean_auc} outside [0, 100]")

    @property
    def weeks(self) -> List[int]:
        return [p.week for p in self.points]

    def at(self, week: int) -> Optional[float]:
        for p in self.points:
            if p.week == week:
                return p.mean_auc
        return None

    def mean_over(self, weeks: Iterable[int]) -> Optional[float]:
        return mean_or_none(self.at(w) for w in weeks)

    def to_rows(self) -> List[Dict]:
        return [{"system": self.system, "week": p.week, "mean_auc": p.mean_auc, "std_auc": p.std_auc} for p in self.points]


def curve_from_aucs(system: str, fold_aucs: Mapping[int, Sequence[Optional[float]]]) -> WeeklyCurve:
    """Build a curve from per-week lists of per-fold AUC (None = undefined fold).

    Weeks where every fold is undefined are left out of the curve.
    """
    points = []
    for week in sorted(fold_aucs):
        values = [a for a in fold_aucs[week] if a is not None]
        undefined = len(fold_aucs[week]) - len(values)
        if undefined:
            logger.warning(f"{system} week {week}: {undefined} fold(s) with undefined AUC")
        if not values:
            continue
        points.append(CurvePoint(week, float(np.mean(values)), float(np.std(values)), len(values), undefined))
    return WeeklyCurve(system, points)


def weekly_curve(
    system: str,
    predictors: Mapping[int, Sequence[Predictor]],
    eval_sets: Mapping[int, Sequence[LabeledDataset]],
) -> WeeklyCurve:
    """
    Evaluate one system per week and fold.

    Args:
        system: Curve label
        predictors: week -> per-fold callables mapping sequences to probabilities
        eval_sets: week -> per-fold week-truncated evaluation sets

    Returns:
        WeeklyCurve with mean / std of the fold AUCs
    """
    fold_aucs: Dict[int, List[Optional[float]]] = {}
    for week in sorted(predictors):
        if len(predictors[week]) != len(eval_sets[week]):
            raise ValueError(f"Week {week}: {len(predictors[week])} predictors but {len(eval_sets[week])} eval sets")
        values = []
        for predict, data in zip(predictors[week], eval_sets[week]):
            try:
                values.append(auc(predict(data.sequences), data.labels))
            except UndefinedAUCError:
                values.append(None)
        fold_aucs[week] = values
    return curve_from_aucs(system, fold_aucs)


def mean_abs_loss(curve: WeeklyCurve, oracle_curve: WeeklyCurve, weeks: Iterable[int]) -> Optional[float]:
    """Mean absolute AUC gap to the oracle over the weeks both curves cover."""
    gaps = []
    for w in weeks:
        a, o = curve.at(w), oracle_curve.at(w)
        if a is not None and o is not None:
            gaps.append(abs(o - a))
    return float(np.mean(gaps)) if gaps else None


@dataclass
class ArrReport:
    """Per-week ARR of one adapted system plus its mean over a week range."""
    system: str
    per_week: Dict[int, Optional[float]] = field(default_factory=dict)
    mean_weeks: List[int] = field(default_factory=list)

    @property
    def mean(self) -> Optional[float]:
        return mean_or_none(self.per_week.get(w) for w in self.mean_weeks)

    @property
    def undefined_weeks(self) -> List[int]:
        return [w for w, v in sorted(self.per_week.items()) if v is None]

    def to_dict(self) -> Dict:
        return {
            "system": self.system,
            "per_week": {str(w): v for w, v in sorted(self.per_week.items())},
            "mean_weeks": self.mean_weeks,
            "mean": self.mean,
        }


def arr_report(
    baseline: WeeklyCurve,
    adapted: WeeklyCurve,
    oracle: WeeklyCurve,
    mean_weeks: Sequence[int] = (1, 2, 3, 4),
) -> ArrReport:
    report = ArrReport(adapted.system, mean_weeks=list(mean_weeks))
    for week in adapted.weeks:
        b, a, o = baseline.at(week), adapted.at(week), oracle.at(week)
        if b is None or o is None:
            report.per_week[week] = None
            continue
        try:
            report.per_week[week] = arr(b, a, o)
        except UndefinedARRError:
            logger.warning(f"{adapted.system} week {week}: ARR undefined (oracle AUC equals baseline AUC)")
            report.per_week[week] = None
    return report
