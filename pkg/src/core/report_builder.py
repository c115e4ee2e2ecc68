"""
Cross-run reporting.

Reads completed run directories, averages their summaries over seeds per
scenario and writes the comparison table, EMD values, KDE curves of the
maximum prediction scores and an HTML overview. Delta columns compare each
scenario with the standard scenario and only appear when more than one
scenario is present.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from core.experiment_runner import MANIFEST_FILE, RESOLVED_CONFIG_FILE, SHADOW_DATASET
from core.membership import load_records
from core.result_handler import ResultHandler
from metrics.distribution import emd_1d, kde_gaussian, kde_grid, scott_bandwidth
from utils.errors import RunDirectoryError
from utils.file_handler import FileHandler

logger = logging.getLogger(__name__)

GROUP_KEYS = ["scenario", "attack", "dataset"]
METRIC_COLUMNS = ["precision", "recall", "fpr", "auroc", "auprc", "fpr_at_95tpr",
                  "mmps_fp", "mmps_tn", "ece", "oe", "emd_vs_members"]
DELTA_COLUMNS = ["precision", "recall", "fpr", "auroc", "auprc", "fpr_at_95tpr", "ece", "oe", "emd_vs_members"]
REQUIRED_ARTIFACTS = (MANIFEST_FILE, RESOLVED_CONFIG_FILE, "reports/summary.csv", "reports/summary.json")


@dataclass
class RunSummary:
    """What the report needs from one completed run."""
    run_dir: Path
    meta: Dict[str, Any]
    model: Dict[str, Any]
    profile: Dict[str, float]
    table: pd.DataFrame

    @property
    def scenario(self) -> str:
        return self.meta["scenario"]

    @property
    def datasets(self) -> List[str]:
        return [d for d in self.table["dataset"].unique() if d != SHADOW_DATASET]


@dataclass
class ComparisonResult:
    comparison: pd.DataFrame
    emd: pd.DataFrame
    accuracy: pd.DataFrame
    profile: pd.DataFrame
    kde_files: List[Path] = field(default_factory=list)
    paths: List[Path] = field(default_factory=list)


class ReportBuilder:
    """Builds the consolidated comparison of one or more run directories."""

    def __init__(self, config: Dict[str, Any], out_dir: Path):
        """
        Initialize ReportBuilder.

        Args:
            config: Main configuration dictionary
            out_dir: Directory receiving the comparison artifacts
        """
        output = config.get("output", {})
        self.files = FileHandler(out_dir, float_format=output.get("float_format", "%.17g"),
                                 json_indent=output.get("json_indent", 2))
        self.results = ResultHandler(config, self.files)

    def load_run(self, run_dir: Path) -> RunSummary:
        """
        Load the summary of a completed run.

        Raises:
            RunDirectoryError: Listing every missing artifact
        """
        run_files = FileHandler(run_dir)
        missing = run_files.missing(REQUIRED_ARTIFACTS)
        if missing:
            raise RunDirectoryError(str(run_dir), missing)

        manifest = run_files.load_json(run_files.path(MANIFEST_FILE))
        if manifest.get("status") != "completed" or manifest.get("failed_stage"):
            raise RunDirectoryError(str(run_dir), [f"completed run (failed stage: {manifest.get('failed_stage')})"])

        summary = run_files.load_json(run_files.path("reports", "summary.json"))
        table = pd.read_csv(run_files.path("reports", "summary.csv"), keep_default_na=True)
        run = RunSummary(run_dir=Path(run_dir), meta=summary["meta"], model=summary["model"],
                         profile=summary["mmps_profile"], table=table)

        missing = run_files.missing(f"records/eval_{name}.csv" for name in run.datasets)
        if missing:
            raise RunDirectoryError(str(run_dir), missing)
        return run

    def load_runs(self, run_dirs: Sequence[Path]) -> List[RunSummary]:
        if not run_dirs:
            raise ValueError("At least one run directory is required")
        problems: List[str] = []
        runs = []
        for run_dir in run_dirs:
            try:
                runs.append(self.load_run(Path(run_dir)))
            except RunDirectoryError as e:
                problems.extend(f"{e.run_dir}: {item}" for item in e.missing)
        if problems:
            raise RunDirectoryError(", ".join(str(d) for d in run_dirs), problems)
        logger.info(f"Loaded {len(runs)} runs: {', '.join(sorted({r.scenario for r in runs}))}")
        return runs

    @staticmethod
    def baseline_scenario(runs: Sequence[RunSummary]) -> Optional[str]:
        standard = sorted({r.scenario for r in runs if r.meta.get("scenario_kind") == "standard"})
        return standard[0] if standard else None

    def aggregate(self, runs: Sequence[RunSummary]) -> pd.DataFrame:
        """Mean over seeds per (scenario, attack, dataset), with Delta columns against the standard scenario."""
        table = pd.concat([r.table for r in runs], ignore_index=True)
        grouped = table.groupby(GROUP_KEYS, sort=True)
        frame = grouped[METRIC_COLUMNS].mean().reset_index()
        frame.insert(3, "n_seeds", grouped["seed"].nunique().to_numpy())

        scenarios = frame["scenario"].unique()
        if len(scenarios) < 2:
            return frame
        baseline = self.baseline_scenario(runs)
        if baseline is None:
            logger.warning("No standard scenario among the runs; Delta columns omitted")
            return frame

        reference = frame[frame["scenario"] == baseline].set_index(["attack", "dataset"])[DELTA_COLUMNS]
        joined = frame.join(reference, on=["attack", "dataset"], rsuffix="_baseline")
        for column in DELTA_COLUMNS:
            frame[f"delta_{column}"] = joined[column] - joined[f"{column}_baseline"]
        return frame

    def emd_table(self, comparison: pd.DataFrame) -> pd.DataFrame:
        """EMD between member and nonmember max scores per (scenario, dataset); identical across attacks."""
        first_attack = sorted(comparison["attack"].unique())[0]
        rows = comparison[comparison["attack"] == first_attack]
        return rows[["scenario", "dataset", "n_seeds", "emd_vs_members"]].rename(
            columns={"emd_vs_members": "emd"}).reset_index(drop=True)

    @staticmethod
    def accuracy_table(runs: Sequence[RunSummary]) -> pd.DataFrame:
        frame = pd.DataFrame([{"scenario": r.scenario, "seed": r.meta["seed"], **r.model} for r in runs])
        columns = [c for c in ("train_accuracy", "test_accuracy", "generalization_gap") if c in frame]
        grouped = frame.groupby("scenario", sort=True)
        result = grouped[columns].mean().reset_index()
        result["n_seeds"] = grouped["seed"].nunique().to_numpy()
        return result

    @staticmethod
    def profile_table(runs: Sequence[RunSummary]) -> pd.DataFrame:
        frame = pd.DataFrame([{"scenario": r.scenario, "dataset": name, "mmps": value}
                              for r in runs for name, value in r.profile.items()])
        return frame.groupby(["scenario", "dataset"], sort=True)["mmps"].mean().reset_index()

    def kde_curves(self, runs: Sequence[RunSummary]) -> List[Path]:
        """
        Write one KDE file per (scenario, dataset) of pooled maximum scores.

        Columns: ``score``, ``density_members``, ``density_nonmembers``. Both
        curves share a grid wide enough for the wider kernel and fine enough
        for the narrower one.
        """
        pooled: Dict[tuple, Dict[str, List[np.ndarray]]] = {}
        for run in runs:
            for name in run.datasets:
                records = load_records(run.run_dir / "records" / f"eval_{name}.csv")
                max_scores = np.array([r.scores.max() for r in records])
                flags = np.array([r.is_member for r in records], dtype=bool)
                entry = pooled.setdefault((run.scenario, name), {"members": [], "nonmembers": []})
                entry["members"].append(max_scores[flags])
                entry["nonmembers"].append(max_scores[~flags])

        paths = []
        for (scenario, name), entry in sorted(pooled.items()):
            members = np.concatenate(entry["members"])
            nonmembers = np.concatenate(entry["nonmembers"])
            h_members, h_nonmembers = scott_bandwidth(members), scott_bandwidth(nonmembers)
            h_min, h_max = min(h_members, h_nonmembers), max(h_members, h_nonmembers)
            low = min(members.min(), nonmembers.min()) - 3.0 * (h_max - h_min)
            high = max(members.max(), nonmembers.max()) + 3.0 * (h_max - h_min)
            grid = kde_grid(low, high, h_min)
            frame = pd.DataFrame({
                "score": grid,
                "density_members": kde_gaussian(members, grid, h_members),
                "density_nonmembers": kde_gaussian(nonmembers, grid, h_nonmembers),
            })
            paths.append(self.files.save_table(frame, self.files.path("kde", f"{scenario}__{name}.csv")))
            logger.debug(f"KDE {scenario}/{name}: EMD={emd_1d(members, nonmembers):.4f}")
        return paths

    def build(self, run_dirs: Sequence[Path]) -> ComparisonResult:
        runs = self.load_runs(run_dirs)
        comparison = self.aggregate(runs)
        result = ComparisonResult(comparison=comparison, emd=self.emd_table(comparison),
                                  accuracy=self.accuracy_table(runs), profile=self.profile_table(runs))
        result.kde_files = self.kde_curves(runs)
        result.paths = [
            self.files.save_table(result.comparison, self.files.path("comparison.csv")),
            self.files.save_table(result.emd, self.files.path("emd.csv")),
            self.files.save_table(result.accuracy, self.files.path("accuracy.csv")),
            self.files.save_table(result.profile, self.files.path("profile.csv")),
        ]
        html = self.results.save_comparison_html(result.comparison, result.emd, len(runs),
                                                 self.files.path("comparison.html"))
        if html is not None:
            result.paths.append(html)
        logger.info(f"Comparison written to {self.files.run_dir} ({len(result.kde_files)} KDE curves)")
        return result


def cmd_report(run_dirs: Sequence[Path], main_config: Dict[str, Any], out: Optional[str] = None) -> ComparisonResult:
    """Consolidated comparison of completed runs, written to ``out`` (default ``<output>/report``)."""
    out_dir = Path(out) if out else Path(main_config.get("paths", {}).get("output_directory", "./output")) / "report"
    out_dir.mkdir(parents=True, exist_ok=True)
    return ReportBuilder(main_config, out_dir).build([Path(d) for d in run_dirs])
