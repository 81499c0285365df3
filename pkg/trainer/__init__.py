from .folds import FoldAssignment, holdout_split, kfold, stratified_kfold
from .training import (
    EpochRecord,
    Trainer,
    TrainingHistory,
    WeeklyTraining,
    WeekResult,
    train,
    train_folds,
    train_weekly,
)
from .adaptation import (
    AdaptationResult,
    Adapter,
    ThetaResult,
    adapt,
    fc_probabilities,
    oracle_adapt,
    pseudo_label,
    selection_split,
)
from .report import AucRecord, RunReport
