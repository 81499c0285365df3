"""
CSV and SVG output of week-by-week curves.
"""

from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from errors import UsageError  # noqa: E402
from log.logger import get_logger  # noqa: E402
from .curves import CurvePoint, WeeklyCurve  # noqa: E402

logger = get_logger("Plotting")

CURVE_COLUMNS = ["system", "week", "mean_auc", "std_auc"]

# Fixed ids and no timestamp keep the SVG bytes reproducible
plt.rcParams["svg.hashsalt"] = "gritnet"
plt.rcParams["svg.fonttype"] = "none"
plt.rcParams["figure.figsize"] = (6.4, 4.0)
plt.rcParams["font.size"] = 9

_STYLES = {
    "vanilla": dict(linestyle=":", marker="s"),
    "gritnet": dict(linestyle="--", marker="o"),
    "adapted": dict(linestyle="-", marker="^"),
    "oracle": dict(linestyle="-.", marker="D"),
}


def curves_frame(curves: Sequence[WeeklyCurve]) -> pd.DataFrame:
    rows = [row for curve in curves for row in curve.to_rows()]
    return pd.DataFrame(rows, columns=CURVE_COLUMNS)


def _style(system: str) -> Dict:
    for key, style in _STYLES.items():
        if system.lower().startswith(key):
            return style
    return dict(linestyle="-", marker=".")


def emit_plot(curves: Sequence[WeeklyCurve], path: Path, title: str = "") -> Tuple[Path, Path]:
    """
    Write ``<path>.csv`` (system, week, mean_auc, std_auc) and ``<path>.svg``.

    Args:
        curves: One curve per system
        path: Output path; any suffix is replaced
        title: Optional chart title

    Returns:
        (csv path, svg path)

    Raises:
        UsageError: If no curves are given
    """
    if not curves:
        raise UsageError("emit_plot needs at least one curve")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    csv_path, svg_path = path.with_suffix(".csv"), path.with_suffix(".svg")

    curves_frame(curves).to_csv(csv_path, index=False, float_format="%.6f", lineterminator="\n")

    fig, ax = plt.subplots()
    for curve in curves:
        weeks = curve.weeks
        means = [p.mean_auc for p in curve.points]
        stds = [p.std_auc for p in curve.points]
        ax.errorbar(weeks, means, yerr=stds, label=curve.system, capsize=2, **_style(curve.system))
    ax.set_xlabel("Week")
    ax.set_ylabel("AUC (%)")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)

    logger.info(f"Wrote {csv_path} and {svg_path} ({len(curves)} curve(s))")
    return csv_path, svg_path


def read_curves(csv_path: Path) -> List[WeeklyCurve]:
    """Load curves written by emit_plot, in first-appearance order of the systems."""
    frame = pd.read_csv(csv_path)
    missing = [c for c in CURVE_COLUMNS if c not in frame.columns]
    if missing:
        raise UsageError(f"{csv_path}: missing column(s) {missing}")
    curves = []
    for system in dict.fromkeys(frame["system"]):
        rows = frame[frame["system"] == system].sort_values("week")
        points = [CurvePoint(int(r.week), float(r.mean_auc), float(r.std_auc), folds=0) for r in rows.itertuples()]
        curves.append(WeeklyCurve(str(system), points))
    return curves


def write_table(rows: List[Dict], path: Path) -> Path:
    """Write a flat table (ARR, oracle gap) as CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows).to_csv(path, index=False, float_format="%.6f", lineterminator="\n")
    return path
