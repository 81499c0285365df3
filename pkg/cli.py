"""
Command line for the GritNet outcome predictor.

    python cli.py generate   --preset nd_a_v1 --students 1000 --seed 7 --out data/nd_a_v1
    python cli.py train      --data data/nd_a_v1 --out runs/source/nd_a_v1 --weeks 1-8
    python cli.py adapt      --source-run runs/source/nd_a_v1 --target data/nd_b --out runs/adapt/nd_a_v1_to_nd_b
    python cli.py adapt      ... --oracle --target-labels data/nd_b/labels.csv
    python cli.py evaluate   --source-run ... --adapt-run ... --target data/nd_b --out runs/eval
    python cli.py plot       --curves runs/eval/nd_a_v1_to_nd_b.csv --out figures/nd_b
    python cli.py experiment --config configs/experiment.toml

Exit codes: 0 ok, 1 runtime failure, 2 usage or configuration error.
Logs go to stderr; the paths a command wrote go to stdout.
"""

import argparse
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from config.config import get_config, load_experiment_config
from errors import DatasetValidationError, GritNetError, UsageError
from evaluation.curves import WeeklyCurve
from evaluation.plotting import emit_plot, read_curves, write_table
from log.logger import get_logger
from numeric.tensor import set_precision
from pipeline import (
    ADAPTED,
    GRITNET,
    ORACLE,
    ExperimentRunner,
    load_adapt_run,
    load_source_run,
    load_target,
    recovery_table,
)
from synthgen.calibration import calibrate
from synthgen.course import load_course_spec, preset
from trainer.report import RunReport

logger = get_logger("CLI")

USAGE_ERRORS = (UsageError, DatasetValidationError, ValidationError, FileNotFoundError, tomllib.TOMLDecodeError)


def parse_weeks(text: str) -> List[int]:
    """``"1-8"``, ``"1,2,4"`` or a mix such as ``"1-4,6"``."""
    weeks = set()
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part:
                lo, hi = (int(x) for x in part.split("-", 1))
                weeks.update(range(lo, hi + 1))
            elif part:
                weeks.add(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid week list '{text}'")
    if not weeks or min(weeks) < 1:
        raise argparse.ArgumentTypeError(f"weeks must be positive integers, got '{text}'")
    return sorted(weeks)


def parse_thresholds(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid threshold list '{text}'")


def _existing(path: Optional[Path], what: str) -> Optional[Path]:
    if path is not None and not Path(path).exists():
        raise FileNotFoundError(f"{what} not found: {path}")
    return path


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Flag values in ExperimentConfig shape; unset flags stay None and are ignored."""
    train = {
        "weeks": getattr(args, "weeks", None),
        "epochs": getattr(args, "epochs", None),
    }
    adapt = {"thresholds": getattr(args, "thresholds", None)}
    seed = getattr(args, "seed", None)
    return {
        "folds": getattr(args, "folds", None),
        "workers": getattr(args, "workers", None),
        "seeds": [seed] if seed is not None else None,
        "students": getattr(args, "students", None),
        "scale": getattr(args, "scale", None),
        "train": {k: v for k, v in train.items() if v is not None},
        "adapt": {k: v for k, v in adapt.items() if v is not None},
    }


def _runner(args: argparse.Namespace, extra: Optional[Dict[str, Any]] = None) -> ExperimentRunner:
    overrides = _overrides(args)
    if extra:
        overrides.update(extra)
    config = load_experiment_config(_existing(args.config, "Config file"), overrides)
    return ExperimentRunner(config)


def _emit(paths: Sequence[Path]) -> None:
    for path in paths:
        print(path)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_generate(args: argparse.Namespace) -> int:
    if (args.spec is None) == (args.preset is None):
        raise UsageError("generate needs exactly one of --spec or --preset")
    if args.spec is not None:
        spec = load_course_spec(_existing(args.spec, "Course spec"))
    else:
        try:
            spec = preset(args.preset)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from exc
    runner = _runner(args)
    seed = runner.config.seeds[0]
    if args.calibrate and spec.target_rate is not None:
        spec = calibrate(spec, n_probe=runner.config.probe_students, seed=seed, workers=runner.workers)
    paths = runner.generate(spec, runner.config.students, seed, args.out)
    _emit(paths.values())
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    runner = _runner(args)
    course = load_target(_existing(args.data, "Course directory"), name=args.name)
    if course.labels is None:
        raise DatasetValidationError(f"{args.data} has no labels.csv; training needs labels")
    seed = runner.config.seeds[0]
    runner.train(course, args.out, seed)
    _emit([Path(args.out) / "train_report.json"])
    return 0


def cmd_adapt(args: argparse.Namespace) -> int:
    runner = _runner(args)
    source = load_source_run(_existing(args.source_run, "Source run"))
    labels_path = _existing(args.target_labels, "Target label file")
    target = load_target(_existing(args.target, "Target course directory"), labels_path)
    if args.oracle and target.labels is None:
        raise UsageError("--oracle needs --target-labels (or a labels.csv next to the target events)")
    seed = runner.config.seeds[0]
    runner.adapt(source, target, args.out, seed, oracle=args.oracle, remap_requested=args.remap_vocab)
    _emit([Path(args.out) / ("oracle_report.json" if args.oracle else "adapt_report.json")])
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    runner = _runner(args)
    source = load_source_run(_existing(args.source_run, "Source run"))
    target = load_target(_existing(args.target, "Target course directory"), _existing(args.target_labels, "Target label file"))
    adapted = load_adapt_run(_existing(args.adapt_run, "Adaptation run"), source, target)
    seed = runner.config.seeds[0]
    result = runner.evaluate(source, adapted, target)
    report = RunReport(command="evaluate", config_hash=runner.config.config_hash(), seeds=[seed])
    if adapted.notice is not None:
        report.remap_notices.append(adapted.notice.to_dict())
    runner.write_evaluation(result, Path(args.out), report)
    report_path = report.write(Path(args.out) / f"eval_report_{result.scenario}.json")
    _emit([Path(args.out) / f"{result.scenario}.csv", Path(args.out) / f"{result.scenario}.svg", report_path])
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    curves: Dict[str, WeeklyCurve] = {}
    for path in args.curves:
        for curve in read_curves(_existing(path, "Curve file")):
            curves[curve.system] = curve
    if not curves:
        raise UsageError("The curve files hold no curves")
    out = Path(args.out)
    written = list(emit_plot(list(curves.values()), out, title=args.title or ""))
    table = recovery_table(curves)
    if table:
        written.append(write_table(table, out.with_name(f"arr_{out.name}.csv")))
    else:
        missing = [name for name in (GRITNET, ADAPTED, ORACLE) if name not in curves]
        logger.warning(f"ARR table skipped: it needs baseline, adapted and oracle curves (missing {', '.join(missing)})")
    _emit(written)
    return 0


def cmd_experiment(args: argparse.Namespace) -> int:
    extra = {"output_dir": args.out} if args.out is not None else None
    runner = _runner(args, extra)
    runner.run_experiment()
    _emit([Path(runner.config.output_dir) / "experiment_report.json"])
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="Experiment TOML file; flags override its values")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int, help="Parallel jobs; 0 = all cores")
    common.add_argument("--weeks", type=parse_weeks, help="e.g. 1-8 or 1,2,4")
    common.add_argument("--folds", type=int)

    parser = argparse.ArgumentParser(prog="gritnet", description="GritNet student-outcome prediction and course-to-course adaptation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="Simulate a course event log")
    p.add_argument("--spec", type=Path, help="Course spec TOML")
    p.add_argument("--preset", help="Built-in course preset (nd_a_v1, nd_a_v2, nd_b, nd_c)")
    p.add_argument("--students", type=int)
    p.add_argument("--calibrate", action="store_true", help="Tune difficulty to the course's target graduation rate")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", parents=[common], help="k-fold week-by-week training on a labelled course")
    p.add_argument("--data", type=Path, required=True, help="Course directory with schema.txt, events.jsonl, labels.csv")
    p.add_argument("--name", help="Course name (default: directory name)")
    p.add_argument("--epochs", type=int)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("adapt", parents=[common], help="Adapt trained source models to a target course")
    p.add_argument("--source-run", type=Path, required=True)
    p.add_argument("--target", type=Path, required=True, help="Target course directory")
    p.add_argument("--target-labels", type=Path)
    p.add_argument("--oracle", action="store_true", help="Use true target labels instead of pseudo-labels")
    p.add_argument("--remap-vocab", action="store_true", help="Expect and accept a vocabulary remap")
    p.add_argument("--thresholds", type=parse_thresholds, help="θ grid, e.g. 0.1,0.2,0.3,0.4")
    p.add_argument("--epochs", type=int)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_adapt)

    p = sub.add_parser("evaluate", parents=[common], help="Weekly AUC curves and ARR table on a labelled target")
    p.add_argument("--source-run", type=Path, required=True)
    p.add_argument("--adapt-run", type=Path, required=True)
    p.add_argument("--target", type=Path, required=True)
    p.add_argument("--target-labels", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("plot", help="Redraw curves (and the ARR table) from curve CSV files")
    p.add_argument("--curves", type=Path, nargs="+", required=True)
    p.add_argument("--title")
    p.add_argument("--out", type=Path, required=True, help="Output path without suffix")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("experiment", parents=[common], help="generate -> train -> adapt -> evaluate in one go")
    p.add_argument("--students", type=int)
    p.add_argument("--scale", type=float, help="Course size factor (1.0 = preset size)")
    p.add_argument("--out", type=Path, help="Overrides output_dir")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        set_precision(get_config().precision)
        return args.func(args)
    except USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GritNetError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
