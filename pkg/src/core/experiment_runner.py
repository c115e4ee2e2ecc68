"""
Run orchestration: stages, run directory and manifest.

A run directory holds everything needed to recompute every reported number
without retraining (layout in docs/RUN_DIRECTORY.md). ``manifest.json`` is
rewritten after every stage, so an aborted run still shows which stages
completed and which one failed.
"""

import logging
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional

import numpy as np
import pandas as pd

from attacks import (
    BaseAttack,
    ThresholdAttack,
    fit_entropy_threshold,
    fit_max_score_threshold,
    fit_top3,
    guaranteed_member_margin,
    load_attack,
    save_attack,
    scaling_sweep,
)
from core.experiment_config import ExperimentConfig
from core.membership import save_records
from core.result_handler import ResultHandler
from core.shadow_pipeline import (
    MEMBER_TAG,
    ExperimentData,
    PreparationResult,
    build_eval_datasets,
    build_eval_records,
    build_experiment_data,
    eval_member_subset,
    model_accuracies,
    run_preparation,
    sweep_nonmembers,
)
from data import LabeledDataset, save_csv
from metrics import EvalReport, evaluate_attack, mmps
from network import Network, load_network, predict_scores, save_network
from utils.config_loader import config_hash
from utils.errors import StageError
from utils.file_handler import FileHandler
from utils.logger import StageLogger
from utils.seeding import derive_seed
from utils.version import __version__

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"
RESOLVED_CONFIG_FILE = "config.resolved.json"
ATTACK_NAMES = ("entropy", "max", "top3")
SHADOW_DATASET = "shadow"
MODEL_SUFFIX = ".mianet"


@dataclass
class StageRecord:
    """Outcome of one pipeline stage."""
    name: str
    status: str = "running"
    seconds: float = 0.0
    artifacts: List[str] = field(default_factory=list)
    error: Optional[str] = None


@dataclass
class RunManifest:
    """Self-description of a run directory."""
    experiment: str
    scenario: str
    master_seed: int
    config_hash: str
    version: str
    status: str = "running"
    failed_stage: Optional[str] = None
    stages: List[StageRecord] = field(default_factory=list)
    artifact_hashes: Dict[str, str] = field(default_factory=dict)

    def record(self, stage: StageRecord) -> None:
        """Add a stage, replacing an earlier record of the same name."""
        self.stages = [s for s in self.stages if s.name != stage.name] + [stage]

    def stage(self, name: str) -> Optional[StageRecord]:
        return next((s for s in self.stages if s.name == name), None)

    def artifacts(self) -> List[str]:
        return [path for stage in self.stages for path in stage.artifacts]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunManifest":
        data = dict(data)
        data["stages"] = [StageRecord(**stage) for stage in data.get("stages", [])]
        return cls(**data)

    @classmethod
    def load(cls, path: Path, file_handler: FileHandler) -> "RunManifest":
        return cls.from_dict(file_handler.load_json(path))


def resolve_run_dir(config: ExperimentConfig, main_config: Dict[str, Any], out: Optional[str] = None) -> Path:
    """``--out`` wins, then ``experiment.output_dir``, then a per-run folder under the output directory."""
    if out:
        return Path(out)
    if config.output_dir:
        return Path(config.output_dir)
    base = Path(main_config.get("paths", {}).get("output_directory", "./output"))
    return base / f"{config.name}__{config.scenario.id}__seed{config.seed}"


class ExperimentRunner:
    """Runs the pipeline stages of one (config, scenario, seed) into one run directory."""

    def __init__(self, config: ExperimentConfig, main_config: Dict[str, Any], run_dir: Path,
                 progress: bool = False):
        """
        Initialize ExperimentRunner.

        Args:
            config: Validated experiment configuration
            main_config: Tool configuration (output format, HTML switch)
            run_dir: Run directory, created when missing
            progress: Show training progress bars
        """
        self.config = config
        self.main_config = main_config
        self.progress = progress

        output = main_config.get("output", {})
        self.files = FileHandler(run_dir, float_format=output.get("float_format", "%.17g"),
                                 json_indent=output.get("json_indent", 2))
        self.files.ensure_directories()
        self.results = ResultHandler(main_config, self.files)

        self.resolved = config.to_dict()
        self.config_hash = config_hash(self.resolved)
        self.log = StageLogger(logger)
        self.log.set_context(scenario=config.scenario.id, seed=config.seed)
        self.manifest = self._open_manifest()

        self.data: Optional[ExperimentData] = None
        self.members: Optional[LabeledDataset] = None
        self.eval_datasets: Dict[str, LabeledDataset] = {}
        self.preparation: Optional[PreparationResult] = None
        self.target: Optional[Network] = None
        self.attacks: Dict[str, BaseAttack] = {}
        self.reports: List[EvalReport] = []
        self.profile: Dict[str, float] = {}
        self.accuracies: Dict[str, float] = {}

    @property
    def run_dir(self) -> Path:
        return self.files.run_dir

    def _open_manifest(self) -> RunManifest:
        """Continue the manifest of a run with the same resolved config, start a fresh one otherwise."""
        path = self.files.path(MANIFEST_FILE)
        if path.exists():
            try:
                existing = RunManifest.load(path, self.files)
                if existing.config_hash == self.config_hash:
                    existing.status, existing.failed_stage = "running", None
                    return existing
                logger.warning(f"Run directory {self.run_dir} holds a different config; starting a new manifest")
            except (TypeError, ValueError) as e:
                logger.warning(f"Ignoring unreadable manifest {path}: {e}")
        self.files.save_json(self.resolved, self.files.path(RESOLVED_CONFIG_FILE))
        return RunManifest(experiment=self.config.name, scenario=self.config.scenario.id,
                           master_seed=self.config.seed, config_hash=self.config_hash, version=__version__)

    def save_manifest(self) -> Path:
        artifacts = [p for p in self.manifest.artifacts() if self.files.path(p).exists()]
        self.manifest.artifact_hashes = self.files.artifact_hashes(artifacts)
        return self.files.save_json(self.manifest.to_dict(), self.files.path(MANIFEST_FILE))

    def finish(self) -> RunManifest:
        self.manifest.status = "completed"
        self.save_manifest()
        return self.manifest

    @contextmanager
    def stage(self, name: str) -> Iterator[StageRecord]:
        """
        Time a stage and record it in the manifest.

        Raises:
            StageError: Wrapping whatever the stage body raised
        """
        record = StageRecord(name=name)
        self.log.log_stage_start(name)
        start = time.perf_counter()
        try:
            yield record
        except Exception as e:
            record.status, record.error = "failed", str(e)
            record.seconds = time.perf_counter() - start
            self.manifest.record(record)
            self.manifest.status, self.manifest.failed_stage = "failed", name
            self.save_manifest()
            self.log.log_error_with_traceback("Stage failed", e, stage=name)
            raise StageError(name, e) from e

        record.status = "completed"
        record.seconds = time.perf_counter() - start
        self.manifest.record(record)
        self.save_manifest()
        self.log.log_stage_complete(name, record.seconds, artifacts=len(record.artifacts))

    def _add(self, record: StageRecord, path: Path) -> Path:
        record.artifacts.append(self.files.relative(path))
        return path

    # Stages

    def generate_data(self) -> ExperimentData:
        with self.stage("generate_data") as record:
            self.data = build_experiment_data(self.config)
            for name in self.data.split.indices:
                self._add(record, save_csv(getattr(self.data.split, name), self.files.path("data", f"{name}.csv")))
            self._add(record, self.files.save_json(self.data.stats.to_dict(), self.files.path("data", "stats.json")))
            indices = {name: np.asarray(idx).tolist() for name, idx in self.data.split.indices.items()}
            self._add(record, self.files.save_json(indices, self.files.path("data", "split_indices.json")))

            self.members = eval_member_subset(self.config, self.data)
            self.eval_datasets = build_eval_datasets(self.config, self.data)
            self._add(record, save_csv(self.members, self.files.path("data", "eval", f"{MEMBER_TAG}.csv")))
            for name, ds in self.eval_datasets.items():
                self._add(record, save_csv(ds, self.files.path("data", "eval", f"{name}.csv")))
        return self.data

    def prepare(self) -> PreparationResult:
        with self.stage("prepare") as record:
            self.preparation = run_preparation(self.config, self.data, self.progress)
            self.target = self.preparation.target
            self._add(record, save_network(self.preparation.target, self.files.path("models", "target" + MODEL_SUFFIX)))
            self._add(record, save_network(self.preparation.shadow, self.files.path("models", "shadow" + MODEL_SUFFIX)))
            history = pd.DataFrame(
                [{"model": "target", **asdict(s)} for s in self.preparation.target_history]
                + [{"model": "shadow", **asdict(s)} for s in self.preparation.shadow_history])
            self._add(record, self.files.save_table(history, self.files.path("models", "history.csv")))
            self._add(record, save_records(self.preparation.attack_training,
                                           self.files.path("records", "attack_training.csv")))
        return self.preparation

    def fit_attacks(self) -> Dict[str, BaseAttack]:
        with self.stage("fit_attacks") as record:
            training = self.preparation.attack_training
            if any(r.source_tag == MEMBER_TAG for r in training):
                raise ValueError("Attack training records must come from the shadow model only")
            self.attacks = {
                "entropy": fit_entropy_threshold(training),
                "max": fit_max_score_threshold(training),
                "top3": fit_top3(training, derive_seed(self.config.seed, "top3"), self.config.top3),
            }
            for name, attack in self.attacks.items():
                self._add(record, save_attack(attack, self.files.path("attacks", name + MODEL_SUFFIX)))
        return self.attacks

    def evaluate(self) -> List[EvalReport]:
        with self.stage("evaluate") as record:
            evaluation = self.config.evaluation
            records = build_eval_records(self.target, self.members, self.eval_datasets, self.config)
            for name, recs in records.items():
                self._add(record, save_records(recs, self.files.path("records", f"eval_{name}.csv")))
            if evaluation.include_shadow:
                records[SHADOW_DATASET] = self.preparation.attack_training

            self.reports = []
            for name, recs in records.items():
                start = time.perf_counter()
                self.reports += [evaluate_attack(attack, recs, dataset=name, num_bins=evaluation.ece_bins,
                                                 binning=evaluation.ece_binning)
                                 for attack in self.attacks.values()]
                self.log.log_performance_metric("evaluate_attacks", 1000.0 * (time.perf_counter() - start),
                                                dataset=name, records=len(recs))
            self.profile = self._mmps_profile()
            self.accuracies = model_accuracies(self.target, self.data)
            for report in self.reports:
                self.log.debug("Evaluated", attack=report.attack, dataset=report.dataset,
                               fpr=f"{report.fpr:.4f}", auroc=f"{report.auroc:.4f}")
        return self.reports

    def _mmps_profile(self) -> Dict[str, float]:
        datasets = {MEMBER_TAG: self.members, **self.eval_datasets}
        return {name: mmps(predict_scores(self.target, ds.features, self.config.temperature))
                for name, ds in datasets.items()}

    def report(self) -> List[Path]:
        with self.stage("report") as record:
            paths = self.results.save_eval_reports(self.reports)
            paths += self.results.save_summary(self.reports, self.meta(), self.model_summary(), self.profile,
                                               self.attack_summary())
            for path in paths:
                self._add(record, path)
        return paths

    def sweep(self) -> pd.DataFrame:
        with self.stage("sweep") as record:
            nonmembers = sweep_nonmembers(self.config, self.data)
            start = time.perf_counter()
            table = scaling_sweep(self.target, self.attacks, nonmembers, self.config.sweep.deltas,
                                  self.config.temperature)
            self.log.log_performance_metric("scaling_sweep", 1000.0 * (time.perf_counter() - start),
                                            deltas=len(self.config.sweep.deltas), samples=len(nonmembers))
            self._add(record, self.files.save_table(table, self.files.path("sweep", "scaling_sweep.csv")))
        return table

    # Summary helpers

    def meta(self) -> Dict[str, Any]:
        return {
            "experiment": self.config.name,
            "scenario": self.config.scenario.id,
            "scenario_kind": self.config.scenario.kind,
            "scenario_value": self.config.scenario.value,
            "seed": self.config.seed,
            "config_hash": self.config_hash,
            "version": __version__,
        }

    def model_summary(self) -> Dict[str, Any]:
        summary: Dict[str, Any] = dict(self.accuracies)
        if self.preparation is not None:
            summary["target_epochs"] = len(self.preparation.target_history)
            summary["shadow_epochs"] = len(self.preparation.shadow_history)
        return summary

    def attack_summary(self) -> Dict[str, Dict[str, Any]]:
        num_classes = self.config.data.num_classes
        summary = {}
        for name, attack in self.attacks.items():
            if isinstance(attack, ThresholdAttack):
                summary[name] = {"tau": attack.tau,
                                 "guaranteed_margin": guaranteed_member_margin(attack, num_classes)}
            else:
                summary[name] = {"cutoff": attack.cutoff, "epochs_trained": attack.epochs_trained}
        return summary

    def load_trained(self) -> bool:
        """
        Reuse the target model and fitted attacks of an earlier run with the same config.

        Returns:
            True if every artifact was found and loaded
        """
        prepared = self.manifest.stage("prepare")
        fitted = self.manifest.stage("fit_attacks")
        if not (prepared and fitted and prepared.status == fitted.status == "completed"):
            return False
        paths = ["models/target" + MODEL_SUFFIX] + [f"attacks/{name}{MODEL_SUFFIX}" for name in ATTACK_NAMES]
        missing = self.files.missing(paths)
        if missing:
            logger.warning(f"Cannot reuse trained artifacts, missing: {', '.join(missing)}")
            return False
        self.target = load_network(self.files.path(paths[0]))
        self.attacks = {name: load_attack(self.files.path("attacks", name + MODEL_SUFFIX)) for name in ATTACK_NAMES}
        logger.info(f"Reusing target model and attacks from {self.run_dir}")
        return True


def cmd_generate_data(config: ExperimentConfig, main_config: Dict[str, Any], out: Optional[str] = None) -> Path:
    """Write the raw splits, normalization stats and evaluation datasets of a run."""
    runner = ExperimentRunner(config, main_config, resolve_run_dir(config, main_config, out))
    runner.generate_data()
    runner.finish()
    return runner.run_dir


def cmd_run(config: ExperimentConfig, main_config: Dict[str, Any], out: Optional[str] = None,
            progress: bool = False) -> ExperimentRunner:
    """
    Full pipeline: data, target and shadow training, attack fitting, evaluation on every dataset, reports.

    Raises:
        StageError: The failing stage; the manifest marks it and earlier artifacts stay on disk
    """
    runner = ExperimentRunner(config, main_config, resolve_run_dir(config, main_config, out), progress)
    runner.generate_data()
    runner.prepare()
    runner.fit_attacks()
    runner.evaluate()
    runner.report()
    runner.finish()
    logger.info(f"Run complete: {len(runner.reports)} reports in {runner.run_dir}")
    return runner


def cmd_scaling_sweep(config: ExperimentConfig, main_config: Dict[str, Any], out: Optional[str] = None,
                      progress: bool = False) -> pd.DataFrame:
    """Scaling sweep on the target model, training and fitting first unless a matching run already did."""
    runner = ExperimentRunner(config, main_config, resolve_run_dir(config, main_config, out), progress)
    if runner.load_trained():
        with runner.stage("load_data"):
            runner.data = build_experiment_data(config)
    else:
        runner.generate_data()
        runner.prepare()
        runner.fit_attacks()
    table = runner.sweep()
    runner.finish()
    return table
