"""
Experiment stages behind the command line.

A run directory holds everything a stage writes:

    <run>/data/<course>/              schema.txt, events.jsonl, labels.csv
    <run>/source/<course>/            schema.txt, folds.csv, train_report.json,
                                      checkpoints/fold<f>/week<w>.gnet,
                                      baseline/fold<f>/week<w>.json
    <run>/adapt/<source>_to_<target>/ schema.txt, folds.csv, adapt_report.json,
                                      fold<f>/week<w>/theta_<θ>.gnet, oracle.gnet
    <run>/eval/                       <scenario>.csv / .svg, arr_<scenario>.csv

Every stage returns its results in memory as well, so ``experiment`` chains
them without reading files back; the ``load_*`` helpers rebuild the same
objects from disk for the individual commands.

Systems compared per week (target-course folds):

    Vanilla baseline   logistic regression trained on the source course
    GritNet baseline   source GritNet applied to the target as is
    Adapted GritNet    source GritNet after pseudo-label FC adaptation
    Oracle GritNet     source GritNet after FC adaptation on true labels
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from baseline import featurize_all, load_logreg, predict as logreg_predict, save_logreg, train_logreg
from baseline.logreg import LogRegModel
from config.config import ExperimentConfig, GritNetConfig
from errors import DatasetValidationError, GritNetError, TrainingConfigError, UsageError
from events.io import CourseData, load_course, read_schema, save_course, write_schema
from events.schema import CourseSchema
from events.tokenizer import LabeledDataset, TokenizedSequence
from evaluation.curves import WeeklyCurve, arr_report, curve_from_aucs, mean_abs_loss
from evaluation.metrics import try_auc
from evaluation.plotting import emit_plot, write_table
from gritnet.checkpoint import check_compatible, read_checkpoint, save_checkpoint
from gritnet.model import GritNet
from gritnet.remap import RemapNotice, remap_model
from gritnet_logger import GritNetLogger
from log.logger import get_logger
from parallel import run_jobs
from synthgen.calibration import calibrate
from synthgen.course import SyntheticCourseSpec, preset, preset_shift, scaled, shift
from synthgen.simulator import generate
from trainer.adaptation import Adapter
from trainer.folds import FoldAssignment, kfold, stratified_kfold
from trainer.report import RunReport
from trainer.training import train_folds

VANILLA = "Vanilla baseline"
GRITNET = "GritNet baseline"
ADAPTED = "Adapted GritNet"
ORACLE = "Oracle GritNet"
SYSTEMS = (VANILLA, GRITNET, ADAPTED, ORACLE)
ARR_WEEKS = (1, 2, 3, 4)

Key = Tuple[int, int]  # (fold, week)


def theta_system(theta: float) -> str:
    return f"{ADAPTED} (theta={theta:g})"


def theta_file(theta: float) -> str:
    return f"theta_{theta:g}.gnet"


@dataclass
class ModelEntry:
    """A model and the sequence length it pads to."""
    model: GritNet
    t_max: int

    def predict(self, sequences: Sequence[TokenizedSequence]) -> np.ndarray:
        return self.model.predict(list(sequences), self.t_max)


@dataclass
class SourceRun:
    course: str
    schema: CourseSchema
    assignment: FoldAssignment
    models: Dict[Key, ModelEntry] = field(default_factory=dict)
    baselines: Dict[Key, LogRegModel] = field(default_factory=dict)
    weeks: List[int] = field(default_factory=list)


@dataclass
class AdaptRun:
    source: str
    target: str
    schema: CourseSchema
    assignment: FoldAssignment
    gritnet: Dict[Key, ModelEntry] = field(default_factory=dict)
    adapted: Dict[Key, Dict[float, ModelEntry]] = field(default_factory=dict)
    selected: Dict[Key, float] = field(default_factory=dict)
    oracle: Dict[Key, ModelEntry] = field(default_factory=dict)
    notice: Optional[RemapNotice] = None

    @property
    def scenario(self) -> str:
        return f"{self.source}_to_{self.target}"


@dataclass
class EvaluationResult:
    scenario: str
    fold_aucs: Dict[str, Dict[int, List[Optional[float]]]]
    dropped: Dict[int, int] = field(default_factory=dict)

    def merge(self, other: "EvaluationResult") -> None:
        for system, weeks in other.fold_aucs.items():
            mine = self.fold_aucs.setdefault(system, {})
            for week, values in weeks.items():
                mine.setdefault(week, []).extend(values)
        for week, count in other.dropped.items():
            self.dropped[week] = self.dropped.get(week, 0) + count

    def curves(self) -> Dict[str, WeeklyCurve]:
        return {system: curve_from_aucs(system, weeks) for system, weeks in self.fold_aucs.items()}


def recovery_table(curves: Dict[str, WeeklyCurve], mean_weeks: Sequence[int] = ARR_WEEKS) -> List[Dict]:
    """
    ARR rows for the selected and every per-θ adapted curve plus oracle-gap rows.

    Needs the GritNet baseline, an adapted curve and the oracle; returns an
    empty list otherwise.
    """
    baseline, oracle = curves.get(GRITNET), curves.get(ORACLE)
    adapted_names = [name for name in curves if name.startswith(ADAPTED)]
    if baseline is None or oracle is None or not adapted_names:
        return []
    all_weeks = sorted(set(baseline.weeks) | set(oracle.weeks))
    rows = []
    for name in adapted_names:
        report = arr_report(baseline, curves[name], oracle, mean_weeks)
        row = {"system": name, "metric": "arr"}
        row.update({f"week_{w}": report.per_week.get(w) for w in all_weeks})
        row["mean_weeks_1_4"] = report.mean
        rows.append(row)
    for name in (VANILLA, GRITNET, ADAPTED):
        if name not in curves:
            continue
        row = {"system": name, "metric": "abs_loss_vs_oracle"}
        row.update({f"week_{w}": _gap(curves[name], oracle, w) for w in all_weeks})
        row["mean_weeks_1_4"] = mean_abs_loss(curves[name], oracle, mean_weeks)
        row["mean_all_weeks"] = mean_abs_loss(curves[name], oracle, all_weeks)
        rows.append(row)
    return rows


def _gap(curve: WeeklyCurve, oracle: WeeklyCurve, week: int) -> Optional[float]:
    a, o = curve.at(week), oracle.at(week)
    return abs(o - a) if a is not None and o is not None else None


# ---------------------------------------------------------------------------
# Parallel job bodies
# ---------------------------------------------------------------------------

@dataclass
class _AdaptJob:
    key: Key
    source: ModelEntry
    sequences: List[TokenizedSequence]
    labels: Optional[List[int]]
    runner_config: ExperimentConfig
    seed: int


def _adapt_job(job: _AdaptJob):
    cfg = job.runner_config
    train_config = cfg.train.model_copy(update={"seed": job.seed})
    adapter = Adapter(cfg.adapt, train_config, workers=1)
    if job.labels is None:
        return job.key, adapter.adapt(job.source.model, job.sequences)
    return job.key, adapter.oracle_adapt(job.source.model, job.sequences, job.labels)


@dataclass
class _BaselineJob:
    key: Key
    schema: CourseSchema
    dataset: LabeledDataset
    l2: float
    epochs: int
    lr: float
    seed: int


def _baseline_job(job: _BaselineJob):
    week = job.key[1]
    truncated, _ = job.dataset.truncate(week)
    if len(truncated) == 0 or len(set(truncated.labels)) < 2:
        return job.key, None
    features = featurize_all(job.schema, truncated.sequences, week)
    return job.key, train_logreg(features, truncated.label_array(), job.l2, job.epochs, job.lr, job.seed)


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------

class ExperimentRunner(GritNetLogger):
    """Runs and persists the generate / train / adapt / evaluate stages."""

    def __init__(self, config: ExperimentConfig, workers: Optional[int] = None):
        self.config = config
        self.workers = workers if workers is not None else config.workers
        self.logger = get_logger("Experiment")

    # -- helpers -----------------------------------------------------------

    def model_config(self, schema: CourseSchema, seed: int) -> GritNetConfig:
        return GritNetConfig(
            vocab_size=schema.vocab_size,
            delta_buckets=schema.delta_buckets,
            embedding_dim=self.config.embedding_dim,
            hidden_dim=self.config.hidden_dim,
            seed=seed,
            pool_padding=self.config.pool_padding,
        )

    def _new_report(self, command: str, seeds: Sequence[int]) -> RunReport:
        return RunReport(command=command, config_hash=self.config.config_hash(), seeds=list(seeds))

    def _folds(self, course: CourseData, seed: int) -> FoldAssignment:
        ids = list(course.sequences)
        if course.labels is not None:
            labels = [course.labels[sid] for sid in ids]
            return stratified_kfold(labels, self.config.folds, seed, ids)
        return kfold(len(ids), self.config.folds, seed, ids)

    def _target_folds(self, target: CourseData, path: Path, seed: int) -> FoldAssignment:
        """Folds already written next to earlier adaptation output win, so pseudo-label and oracle runs pair up."""
        if path.exists():
            assignment = read_folds(path)
            if assignment.student_ids == list(target.sequences):
                return assignment
            self.log_warning(f"{path} lists other students than {target.name}; reassigning folds")
        return self._folds(target, seed)

    @staticmethod
    def _write_folds(assignment: FoldAssignment, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame({"student_id": assignment.student_ids, "fold": assignment.folds})
        frame.to_csv(path, index=False, lineterminator="\n")

    # -- specs ---------------------------------------------------------------

    def course_spec(self, name: str, seed: int, source: Optional[str] = None) -> SyntheticCourseSpec:
        """Preset ``name`` (shifted from ``source`` when given), scaled and optionally calibrated."""
        try:
            if source is not None and source != name:
                spec = shift(preset(source), preset_shift(source, name))
            else:
                spec = preset(name)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from exc
        spec = scaled(spec, self.config.scale).model_copy(update={"delta_cap": self.config.delta_cap})
        if self.config.calibrate and spec.target_rate is not None:
            spec = calibrate(spec, n_probe=self.config.probe_students, seed=seed, workers=self.workers)
        return spec

    # -- stages --------------------------------------------------------------

    def generate(self, spec: SyntheticCourseSpec, n_students: int, seed: int, out_dir: Path) -> Dict[str, Path]:
        self.log_info(f"Generating {n_students} students", course=spec.name, seed=seed)
        events, labels = generate(spec, n_students, seed, workers=self.workers)
        paths = save_course(out_dir, spec.schema, events, labels)
        rate = float(np.mean(list(labels.values())))
        self.log_info(f"{len(events)} events, graduation rate {rate:.3f}", indent=1, course=spec.name, seed=seed)
        return paths

    def train(self, course: CourseData, out_dir: Path, seed: int) -> SourceRun:
        """Stratified k-fold week-by-week training on one course."""
        out_dir = Path(out_dir)
        self.log_section(f"Training on {course.name}", course=course.name, seed=seed)
        dataset = course.dataset()
        assignment = self._folds(course, seed)
        weeks = self.config.weeks
        model_config = self.model_config(course.schema, seed)
        train_config = self.config.train.model_copy(update={"seed": seed})
        report = self._new_report("train", [seed])

        per_fold = train_folds(dataset, assignment, weeks, model_config, train_config, self.workers)
        run = SourceRun(course.name, course.schema, assignment, weeks=list(weeks))
        out_dir.mkdir(parents=True, exist_ok=True)
        write_schema(course.schema, out_dir / "schema.txt")
        self._write_folds(assignment, out_dir / "folds.csv")

        for fold, weekly in enumerate(per_fold):
            test = dataset.subset(assignment.test_indices(fold))
            for week, result in sorted(weekly.results.items()):
                report.add_dropped(f"fold{fold}/week{week}/train", len(result.dropped))
                if result.model is None:
                    report.add_skipped(week, result.skipped, fold=fold)
                    self.log_warning(f"skipped: {result.skipped}", indent=1, fold=fold, week=week)
                    continue
                entry = ModelEntry(result.model, result.t_max)
                run.models[(fold, week)] = entry
                path = out_dir / "checkpoints" / f"fold{fold}" / f"week{week}.gnet"
                report.checkpoints[str(path.relative_to(out_dir))] = save_checkpoint(entry.model, path, entry.t_max)
                held, dropped = test.truncate(week)
                report.add_dropped(f"fold{fold}/week{week}/test", len(dropped))
                value = try_auc(entry.predict(held.sequences), held.labels) if len(held) else None
                report.add_auc("GritNet (source CV)", week, fold, value, seed=seed)
                self.log_info(f"source CV AUC={value}", indent=1, fold=fold, week=week)

        jobs = [
            _BaselineJob((fold, week), course.schema, dataset.subset(assignment.train_indices(fold)),
                         self.config.baseline_l2, self.config.baseline_epochs, self.config.baseline_lr, seed)
            for fold in range(assignment.k) for week in weeks
        ]
        for key, model in run_jobs(_baseline_job, jobs, self.workers):
            if model is None:
                continue
            run.baselines[key] = model
            save_logreg(model, out_dir / "baseline" / f"fold{key[0]}" / f"week{key[1]}.json")

        report.write(out_dir / "train_report.json")
        return run

    def _source_for_target(self, source: SourceRun, target: CourseData, seed: int, remap_requested: bool, report: RunReport):
        """Source models expressed in the target vocabulary."""
        if source.schema == target.schema:
            return dict(source.models), None
        notice = None
        models = {}
        for key, entry in sorted(source.models.items()):
            remapped, notice = remap_model(entry.model, source.schema, target.schema, seed=seed)
            models[key] = ModelEntry(remapped, entry.t_max)
        message = (
            f"Vocabulary remapped {source.course} (L={source.schema.vocab_size}) -> {target.name} "
            f"(L={target.schema.vocab_size}): {notice.reused} reused, {notice.fresh} fresh, {notice.dropped} dropped"
        )
        if remap_requested:
            self.log_info(message)
        else:
            self.log_warning(message + " (no --remap-vocab given)")
        report.remap_notices.append({**notice.to_dict(), "requested": remap_requested, "target": target.name})
        return models, notice

    def adapt(
        self,
        source: SourceRun,
        target: CourseData,
        out_dir: Path,
        seed: int,
        oracle: bool = False,
        remap_requested: bool = False,
    ) -> AdaptRun:
        """
        Adapt every (fold, week) source model to the target fold's training part.

        With ``oracle`` the true target labels replace the pseudo-labels.
        """
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        mode = "oracle" if oracle else "pseudo-label"
        self.log_section(f"Adapting {source.course} -> {target.name} ({mode})", course=target.name, seed=seed)
        if oracle and target.labels is None:
            raise UsageError("Oracle adaptation needs target labels")
        report = self._new_report("adapt", [seed])
        models, notice = self._source_for_target(source, target, seed, remap_requested, report)
        assignment = self._target_folds(target, out_dir / "folds.csv", seed)
        run = AdaptRun(source.course, target.name, target.schema, assignment, gritnet=models, notice=notice)
        write_schema(target.schema, out_dir / "schema.txt")
        self._write_folds(assignment, out_dir / "folds.csv")

        sequences = list(target.sequences.values())
        jobs = []
        t_maxes: Dict[Key, int] = {}
        for (fold, week), entry in sorted(models.items()):
            train_idx = assignment.train_indices(fold)
            labels = [target.labels[sequences[i].student_id] for i in train_idx] if target.labels is not None else [0] * len(train_idx)
            part, dropped = LabeledDataset([sequences[i] for i in train_idx], labels).truncate(week)
            report.add_dropped(f"fold{fold}/week{week}/adapt", len(dropped))
            if len(part) == 0:
                report.add_skipped(week, "no target student has events in the window", fold=fold)
                continue
            t_maxes[(fold, week)] = part.max_length()
            jobs.append(_AdaptJob((fold, week), entry, part.sequences, part.labels if oracle else None, self.config, seed))

        for (fold, week), result in run_jobs(_safe_adapt_job, jobs, self.workers):
            if isinstance(result, GritNetError):
                report.add_skipped(week, str(result), fold=fold, mode=mode)
                self.log_warning(str(result), indent=1, fold=fold, week=week)
                continue
            t_max = t_maxes[(fold, week)]
            week_dir = out_dir / f"fold{fold}" / f"week{week}"
            if oracle:
                run.oracle[(fold, week)] = ModelEntry(result.model, t_max)
                path = week_dir / "oracle.gnet"
                report.checkpoints[str(path.relative_to(out_dir))] = save_checkpoint(result.model, path, t_max)
            else:
                run.selected[(fold, week)] = result.theta
                run.adapted[(fold, week)] = {}
                for theta, model in sorted(result.models.items()):
                    run.adapted[(fold, week)][theta] = ModelEntry(model, t_max)
                    path = week_dir / theta_file(theta)
                    report.checkpoints[str(path.relative_to(out_dir))] = save_checkpoint(model, path, t_max)
            report.thetas.append({
                "fold": fold, "week": week, "mode": mode,
                "non_fc_digest_source": models[(fold, week)].model.params.non_fc_digest(),
                **result.to_dict(),
            })

        report_name = "oracle_report.json" if oracle else "adapt_report.json"
        report.write(out_dir / report_name)
        return run

    def evaluate(self, source: SourceRun, adapted: AdaptRun, target: CourseData) -> EvaluationResult:
        """Per-fold, per-week AUC of every system on the target test folds."""
        if target.labels is None:
            raise UsageError(f"Evaluating on {target.name} needs its labels")
        dataset = target.dataset()
        result = EvaluationResult(adapted.scenario, {})

        def record(system, week, value):
            result.fold_aucs.setdefault(system, {}).setdefault(week, []).append(value)

        for week in source.weeks:
            for fold in range(adapted.assignment.k):
                test, dropped = dataset.subset(adapted.assignment.test_indices(fold)).truncate(week)
                result.dropped[week] = result.dropped.get(week, 0) + len(dropped)
                if len(test) == 0:
                    continue
                key = (fold, week)
                if key in source.baselines:
                    features = featurize_all(target.schema, test.sequences, week)
                    record(VANILLA, week, try_auc(logreg_predict(source.baselines[key], features), test.labels))
                if key in adapted.gritnet:
                    record(GRITNET, week, try_auc(adapted.gritnet[key].predict(test.sequences), test.labels))
                if key in adapted.adapted:
                    selected = adapted.selected[key]
                    for theta, entry in adapted.adapted[key].items():
                        value = try_auc(entry.predict(test.sequences), test.labels)
                        record(theta_system(theta), week, value)
                        if theta == selected:
                            record(ADAPTED, week, value)
                if key in adapted.oracle:
                    record(ORACLE, week, try_auc(adapted.oracle[key].predict(test.sequences), test.labels))
        return result

    def write_evaluation(self, result: EvaluationResult, out_dir: Path, report: RunReport) -> Dict[str, WeeklyCurve]:
        """Plot the four systems, write the ARR / oracle-gap table and fill the report."""
        curves = result.curves()
        plotted = [curves[name] for name in SYSTEMS if name in curves and curves[name].points]
        if not plotted:
            raise TrainingConfigError(f"{result.scenario}: no system produced an AUC")
        emit_plot(plotted, Path(out_dir) / result.scenario, title=result.scenario.replace("_to_", " -> "))
        table = recovery_table(curves)
        if table:
            write_table(table, Path(out_dir) / f"arr_{result.scenario}.csv")
        else:
            self.log_warning(f"{result.scenario}: ARR needs baseline, adapted and oracle curves; table skipped")
        for system, weeks in result.fold_aucs.items():
            for week, values in sorted(weeks.items()):
                for fold, value in enumerate(values):
                    report.add_auc(system, week, fold, value, scenario=result.scenario)
        report.tables[result.scenario] = {
            "recovery": table,
            "dropped_per_week": {str(w): c for w, c in sorted(result.dropped.items())},
        }
        for row in table:
            if row["metric"] == "arr":
                self.log_info(f"{result.scenario} {row['system']}: mean ARR weeks 1-4 = {row['mean_weeks_1_4']}", indent=1)
        return curves

    # -- full study -----------------------------------------------------------

    def run_experiment(self) -> RunReport:
        """generate -> train -> adapt (pseudo + oracle) -> evaluate for every seed and target."""
        cfg = self.config
        root = Path(cfg.output_dir)
        report = self._new_report("experiment", cfg.seeds)
        pooled: Dict[str, EvaluationResult] = {}

        for seed in cfg.seeds:
            seed_dir = root / f"seed{seed}"
            self.log_section(f"Seed {seed}", seed=seed)
            source_spec = self.course_spec(cfg.source, seed)
            paths = self.generate(source_spec, cfg.students, seed, seed_dir / "data" / cfg.source)
            source_course = load_course(paths["schema"], paths["events"], paths["labels"], name=cfg.source)
            source_run = self.train(source_course, seed_dir / "source" / cfg.source, seed)

            for target in cfg.targets:
                target_spec = self.course_spec(target, seed, source=cfg.source)
                # distinct population from the source course
                target_seed = seed + 1_000_003
                tpaths = self.generate(target_spec, cfg.students, target_seed, seed_dir / "data" / target)
                target_course = load_course(tpaths["schema"], tpaths["events"], tpaths["labels"], name=target)
                adapt_dir = seed_dir / "adapt" / f"{cfg.source}_to_{target}"
                adapted = self.adapt(source_run, target_course, adapt_dir, seed, oracle=False, remap_requested=True)
                oracle = self.adapt(source_run, target_course, adapt_dir, seed, oracle=True, remap_requested=True)
                adapted.oracle = oracle.oracle
                if adapted.notice is not None:
                    report.remap_notices.append({**adapted.notice.to_dict(), "seed": seed, "target": target})

                result = self.evaluate(source_run, adapted, target_course)
                if result.scenario in pooled:
                    pooled[result.scenario].merge(result)
                else:
                    pooled[result.scenario] = result

        self.log_section(f"Evaluation over seeds {list(cfg.seeds)}")
        for scenario, result in pooled.items():
            self.write_evaluation(result, root / "eval", report)
        report.write(root / "experiment_report.json")
        return report


def _safe_adapt_job(job: _AdaptJob):
    try:
        return _adapt_job(job)
    except GritNetError as exc:
        return job.key, exc


# ---------------------------------------------------------------------------
# Loading stage outputs
# ---------------------------------------------------------------------------

def _key_from_path(path: Path) -> Key:
    """(fold, week) of ``.../fold<f>/week<w>`` with an optional suffix on the last part."""
    fold, week = path.parent.name, path.name.split(".")[0]
    if not (fold.startswith("fold") and week.startswith("week")):
        raise DatasetValidationError(f"{path} is not a fold<f>/week<w> path")
    return int(fold[4:]), int(week[4:])


def read_folds(path: Path) -> FoldAssignment:
    frame = pd.read_csv(path, dtype={"student_id": str})
    folds = frame["fold"].to_numpy(dtype=np.int64)
    return FoldAssignment(folds, int(folds.max()) + 1, frame["student_id"].tolist())


def load_source_run(run_dir: Path, name: Optional[str] = None) -> SourceRun:
    """Rebuild a SourceRun from a ``train`` output directory."""
    run_dir = Path(run_dir)
    if not (run_dir / "checkpoints").is_dir():
        raise UsageError(f"{run_dir} holds no checkpoints/ directory")
    schema = read_schema(run_dir / "schema.txt")
    run = SourceRun(name or run_dir.name, schema, read_folds(run_dir / "folds.csv"))
    for path in sorted((run_dir / "checkpoints").glob("fold*/week*.gnet")):
        model, t_max = read_checkpoint(path)
        check_compatible(model, schema, path)
        run.models[_key_from_path(path)] = ModelEntry(model, t_max)
    for path in sorted((run_dir / "baseline").glob("fold*/week*.json")):
        run.baselines[_key_from_path(path)] = load_logreg(path)
    run.weeks = sorted({week for _, week in run.models})
    return run


def load_adapt_run(adapt_dir: Path, source: SourceRun, target: CourseData) -> AdaptRun:
    """Rebuild an AdaptRun (pseudo-label and oracle models) from an ``adapt`` output directory."""
    adapt_dir = Path(adapt_dir)
    report_path = adapt_dir / "adapt_report.json"
    run = AdaptRun(source.course, target.name, target.schema, read_folds(adapt_dir / "folds.csv"))
    if report_path.exists():
        for entry in RunReport.load(report_path).thetas:
            if entry["theta"] is not None:
                run.selected[(entry["fold"], entry["week"])] = entry["theta"]
    for path in sorted(adapt_dir.glob("fold*/week*/*.gnet")):
        model, t_max = read_checkpoint(path)
        check_compatible(model, target.schema, path)
        key = _key_from_path(path.parent)
        if path.name == "oracle.gnet":
            run.oracle[key] = ModelEntry(model, t_max)
        else:
            theta = float(path.stem[len("theta_"):])
            run.adapted.setdefault(key, {})[theta] = ModelEntry(model, t_max)
    run.adapted = {k: v for k, v in run.adapted.items() if k in run.selected}

    same = source.schema == target.schema
    seed = _seed_of(adapt_dir)
    for key, entry in sorted(source.models.items()):
        if same:
            run.gritnet[key] = entry
        else:
            remapped, run.notice = remap_model(entry.model, source.schema, target.schema, seed=seed)
            run.gritnet[key] = ModelEntry(remapped, entry.t_max)
    return run


def _seed_of(adapt_dir: Path) -> int:
    for name in ("adapt_report.json", "oracle_report.json"):
        path = Path(adapt_dir) / name
        if path.exists():
            seeds = RunReport.load(path).seeds
            if seeds:
                return seeds[0]
    return 0


def load_target(data_dir: Path, labels_path: Optional[Path] = None, name: Optional[str] = None) -> CourseData:
    """Load a course directory; labels come from ``labels_path`` or ``labels.csv`` when present."""
    data_dir = Path(data_dir)
    labels = labels_path if labels_path is not None else data_dir / "labels.csv"
    return load_course(
        data_dir / "schema.txt",
        data_dir / "events.jsonl",
        labels if Path(labels).exists() else None,
        name=name or data_dir.name,
    )
