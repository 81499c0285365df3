from .metrics import arr, auc, mean_or_none, pairwise_auc, try_auc
from .curves import (
    ArrReport,
    CurvePoint,
    WeeklyCurve,
    arr_report,
    curve_from_aucs,
    mean_abs_loss,
    weekly_curve,
)
from .plotting import curves_frame, emit_plot, read_curves, write_table
