"""
Multi-seed directional checks of leakage, calibration and defenses on the default experiment.

Deselected by default; run with ``pytest -m experiment``. The module fixture
trains 5 seeds x 4 scenarios with the shipped default config.
"""

from pathlib import Path

import numpy as np
import pandas as pd
import pytest
import yaml
from scipy.integrate import trapezoid

from core import ReportBuilder, cmd_run, cmd_scaling_sweep, load_experiment
from core.shadow_pipeline import build_experiment_data
from network import accuracy, load_network
from utils.config_loader import ConfigLoader

pytestmark = pytest.mark.experiment

REPO_ROOT = Path(__file__).resolve().parent.parent
SEEDS = (1, 2, 3, 4, 5)
SCENARIOS = ("standard", "label_smoothing", "temperature", "l2")
ATTACKS = ("entropy", "max", "top3")


@pytest.fixture(scope="module")
def module_env():
    with pytest.MonkeyPatch.context() as patch:
        patch.setenv("MIA_LOG_TO_FILE", "false")
        patch.setenv("MIA_LOG_TO_CONSOLE", "false")
        loader = ConfigLoader(base_path=REPO_ROOT)
        main_config = loader.load_main_config()
        main_config["output"]["generate_html_report"] = False
        yield loader, main_config


@pytest.fixture(scope="module")
def scenario_runs(module_env, tmp_path_factory):
    """Summary table, accuracies and run directory of every (scenario, seed)."""
    loader, main_config = module_env
    root = tmp_path_factory.mktemp("experiments")
    runs = {}
    for scenario in SCENARIOS:
        for seed in SEEDS:
            config = load_experiment(loader, seed=seed, scenario=scenario)
            runner = cmd_run(config, main_config, str(root / f"{scenario}_{seed}"))
            runs[scenario, seed] = {
                "table": pd.read_csv(runner.run_dir / "reports" / "summary.csv"),
                "accuracy": runner.accuracies,
                "run_dir": runner.run_dir,
            }
    return runs


def _rows(runs, scenario, dataset):
    frames = [runs[scenario, seed]["table"] for seed in SEEDS]
    table = pd.concat(frames, ignore_index=True)
    return table[table["dataset"] == dataset]


def _mean(runs, scenario, dataset, attack, column):
    rows = _rows(runs, scenario, dataset)
    return rows.loc[rows["attack"] == attack, column].mean()


def test_scaling_forces_member_decisions(module_env, tmp_path):
    loader, main_config = module_env
    path = tmp_path / "scaling.yaml"
    path.write_text(yaml.safe_dump({
        "data": {"mixture": {"dim": 2}, "n_samples": 400},
        "training": {"epochs": 400},
        "evaluation": {"n_eval": 100},
        "sweep": {"n_samples": 500},
    }), encoding="utf-8")
    config = load_experiment(loader, str(path), seed=7)
    run_dir = tmp_path / "run"
    table = cmd_scaling_sweep(config, main_config, str(run_dir))

    target = load_network(run_dir / "models" / "target.mianet")
    data = build_experiment_data(config)
    assert accuracy(target, data.normalized["target_train"]) >= 0.99

    first, last = table.iloc[0], table.iloc[-1]
    assert last["delta"] == 1e6
    assert last["mean_max_score"] >= 0.999
    for attack in ATTACKS:
        assert last[f"frac_member_{attack}"] >= 0.99
        assert first[f"frac_member_{attack}"] < 0.70


def test_standard_model_overfits(scenario_runs):
    for seed in SEEDS:
        acc = scenario_runs["standard", seed]["accuracy"]
        assert acc["train_accuracy"] >= 0.99
        assert acc["generalization_gap"] >= 0.15


def test_false_positives_are_overconfident(scenario_runs):
    for seed in SEEDS:
        table = scenario_runs["standard", seed]["table"]
        rows = table[table["dataset"] == "test"].set_index("attack")
        for attack in ATTACKS:
            assert rows.loc[attack, "mmps_fp"] > rows.loc[attack, "mmps_tn"]


def test_label_smoothing_raises_leakage_and_improves_calibration(scenario_runs):
    for attack in ATTACKS:
        assert (_mean(scenario_runs, "label_smoothing", "test", attack, "auroc")
                > _mean(scenario_runs, "standard", "test", attack, "auroc"))
    for column in ("ece", "oe"):
        assert (_mean(scenario_runs, "label_smoothing", "test", "max", column)
                < _mean(scenario_runs, "standard", "test", "max", column))


def test_defenses_lower_leakage(scenario_runs):
    def auroc(scenario, attack):
        return _mean(scenario_runs, scenario, "test", attack, "auroc")

    assert auroc("temperature", "entropy") < auroc("standard", "entropy")
    assert auroc("temperature", "max") < auroc("standard", "max")
    max_drop = auroc("standard", "max") - auroc("temperature", "max")
    assert abs(auroc("temperature", "top3") - auroc("standard", "top3")) < max_drop

    assert np.mean([scenario_runs["l2", seed]["accuracy"]["train_accuracy"] for seed in SEEDS]) < 0.90
    for attack in ATTACKS:
        assert auroc("l2", attack) < auroc("standard", attack)


def test_nonmembers_near_the_data_are_often_flagged(scenario_runs):
    for attack in ATTACKS:
        assert _mean(scenario_runs, "standard", "shifted_near", attack, "fpr") > 0.20
        assert _mean(scenario_runs, "standard", "fake", attack, "fpr") > 0.20


def test_label_smoothing_separates_score_distributions(scenario_runs, module_env, tmp_path):
    assert (_mean(scenario_runs, "label_smoothing", "test", "max", "emd_vs_members")
            > _mean(scenario_runs, "standard", "test", "max", "emd_vs_members"))

    _, main_config = module_env
    run_dirs = [scenario_runs[scenario, seed]["run_dir"] for scenario in ("standard", "label_smoothing")
                for seed in SEEDS]
    result = ReportBuilder(main_config, tmp_path / "report").build(run_dirs)
    assert "delta_auroc" in result.comparison.columns
    for path in result.kde_files:
        curve = pd.read_csv(path)
        for column in ("density_members", "density_nonmembers"):
            assert trapezoid(curve[column], curve["score"]) == pytest.approx(1.0, abs=0.01)
