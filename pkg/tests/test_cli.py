import json
import shutil

import pandas as pd
import pytest
import yaml

from core.experiment_runner import ExperimentRunner, RunManifest
from helpers import TINY_EXPERIMENT
from main import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main
from utils.errors import StageError
from utils.file_handler import FileHandler

DATASETS = ("test", "fake", "shifted_near", "shifted_far", "noise", "permuted", "scaled")
ATTACKS = ("entropy", "max", "top3")


@pytest.fixture(scope="module")
def quiet_env():
    with pytest.MonkeyPatch.context() as patch:
        patch.setenv("MIA_LOG_TO_FILE", "false")
        patch.setenv("MIA_LOG_TO_CONSOLE", "false")
        yield


@pytest.fixture(scope="module")
def tiny_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("config") / "tiny.yaml"
    path.write_text(yaml.safe_dump(TINY_EXPERIMENT, sort_keys=False), encoding="utf-8")
    return str(path)


@pytest.fixture(scope="module")
def completed_run(quiet_env, tiny_file, tmp_path_factory):
    run_dir = tmp_path_factory.mktemp("runs") / "standard"
    assert main(["run", "--config", tiny_file, "--out", str(run_dir)]) == EXIT_OK
    return run_dir


def _report_json(run_dir):
    return {p.name: p.read_bytes() for p in sorted((run_dir / "reports").glob("*.json"))}


def test_run_writes_every_attack_dataset_pair(completed_run):
    reports = _report_json(completed_run)
    for attack in ATTACKS:
        for dataset in DATASETS + ("shadow",):
            assert f"{attack}__{dataset}.json" in reports

    summary = pd.read_csv(completed_run / "reports" / "summary.csv")
    assert len(summary) == len(ATTACKS) * (len(DATASETS) + 1)
    assert summary["fpr"].between(0.0, 1.0).all()
    assert summary["auroc"].between(0.0, 1.0).all()

    summary_json = json.loads(reports["summary.json"])
    assert summary_json["meta"]["scenario"] == "standard"
    assert summary_json["meta"]["seed"] == 3
    assert set(summary_json["attacks"]) == set(ATTACKS)
    assert (completed_run / "reports" / "report.html").exists()


def test_run_directory_layout_and_manifest(completed_run):
    files = FileHandler(completed_run)
    manifest = RunManifest.load(files.path("manifest.json"), files)
    assert manifest.status == "completed" and manifest.failed_stage is None
    assert [s.name for s in manifest.stages] == ["generate_data", "prepare", "fit_attacks", "evaluate", "report"]
    assert all(s.status == "completed" for s in manifest.stages)
    assert not files.missing(manifest.artifacts())
    assert set(manifest.artifact_hashes) == set(manifest.artifacts())
    assert not files.missing(["config.resolved.json", "models/target.mianet", "models/shadow.mianet",
                              "attacks/top3.mianet", "records/attack_training.csv", "data/eval/members.csv"])
    resolved = json.loads(files.path("config.resolved.json").read_text(encoding="utf-8"))
    assert resolved["training"]["epochs"] == 15


def test_rerun_gives_byte_identical_reports(completed_run, tiny_file, tmp_path):
    assert main(["run", "--config", tiny_file, "--out", str(tmp_path / "again")]) == EXIT_OK
    assert _report_json(tmp_path / "again") == _report_json(completed_run)


def test_generate_data_is_reproducible(tiny_file, tmp_path):
    for name in ("a", "b"):
        assert main(["generate-data", "--config", tiny_file, "--seed", "11", "--out", str(tmp_path / name)]) == EXIT_OK
    csv_files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a" / "data").rglob("*.csv"))
    assert len(csv_files) == 4 + 1 + len(DATASETS)
    for relative in csv_files:
        assert (tmp_path / "a" / relative).read_bytes() == (tmp_path / "b" / relative).read_bytes()
    assert not (tmp_path / "a" / "models" / "target.mianet").exists()


def test_bad_config_key_exits_with_usage_code(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("training:\n  epochs: 3\n  learning_rate: 0.1\n", encoding="utf-8")
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "run")]) == EXIT_USAGE
    err = capsys.readouterr().err
    assert "training.learning_rate" in err and "line 3" in err


@pytest.mark.parametrize("seed", ["-3", "abc", str(2**64)])
def test_bad_seed_is_a_usage_error(seed, capsys):
    with pytest.raises(SystemExit) as info:
        main(["run", "--seed", seed])
    assert info.value.code == EXIT_USAGE
    assert "seed" in capsys.readouterr().err


def test_missing_subcommand_is_a_usage_error():
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == EXIT_USAGE


def test_scaling_sweep_reuses_a_finished_run(completed_run, tiny_file, tmp_path):
    run_dir = tmp_path / "copy"
    shutil.copytree(completed_run, run_dir)
    target_before = (run_dir / "models" / "target.mianet").read_bytes()

    assert main(["scaling-sweep", "--config", tiny_file, "--out", str(run_dir)]) == EXIT_OK

    table = pd.read_csv(run_dir / "sweep" / "scaling_sweep.csv")
    assert table["delta"].tolist() == TINY_EXPERIMENT["sweep"]["deltas"]
    assert {"mean_max_score", "frac_member_max", "frac_guaranteed_entropy"} <= set(table.columns)
    assert (run_dir / "models" / "target.mianet").read_bytes() == target_before

    files = FileHandler(run_dir)
    stages = [s.name for s in RunManifest.load(files.path("manifest.json"), files).stages]
    assert stages[-2:] == ["load_data", "sweep"]
    assert "prepare" in stages


def test_report_on_a_single_run(completed_run, tmp_path):
    out = tmp_path / "report"
    assert main(["report", str(completed_run), "--out", str(out)]) == EXIT_OK

    comparison = pd.read_csv(out / "comparison.csv")
    assert not [c for c in comparison.columns if c.startswith("delta_")]
    assert (comparison["n_seeds"] == 1).all()
    assert len(comparison) == len(ATTACKS) * (len(DATASETS) + 1)
    assert sorted(p.name for p in (out / "kde").glob("*.csv")) == sorted(f"standard__{d}.csv" for d in DATASETS)
    kde = pd.read_csv(out / "kde" / "standard__test.csv")
    assert list(kde.columns) == ["score", "density_members", "density_nonmembers"]
    for name in ("emd.csv", "accuracy.csv", "profile.csv", "comparison.html"):
        assert (out / name).exists()


def test_report_compares_scenarios_against_standard(completed_run, tiny_file, tmp_path):
    temperature_run = tmp_path / "temperature"
    assert main(["run", "--config", tiny_file, "--scenario", "temperature", "--out", str(temperature_run)]) == EXIT_OK
    out = tmp_path / "report"
    assert main(["report", str(completed_run), str(temperature_run), "--out", str(out)]) == EXIT_OK

    comparison = pd.read_csv(out / "comparison.csv")
    assert "delta_fpr" in comparison.columns
    standard = comparison[comparison["scenario"] == "standard"]
    assert (standard["delta_fpr"].abs() < 1e-12).all()
    assert set(comparison["scenario"]) == {"standard", "temperature"}


def test_report_lists_missing_artifacts(tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["report", str(empty), "--out", str(tmp_path / "report")]) == EXIT_FAILURE
    err = capsys.readouterr().err
    assert "manifest.json" in err and "reports/summary.csv" in err


def test_failed_stage_is_recorded(tiny_config, main_config, tmp_path, capsys):
    runner = ExperimentRunner(tiny_config, main_config, tmp_path / "failing")
    runner.generate_data()
    with pytest.raises(StageError) as info:
        runner.fit_attacks()
    assert info.value.stage == "fit_attacks"

    files = FileHandler(tmp_path / "failing")
    manifest = RunManifest.load(files.path("manifest.json"), files)
    assert manifest.status == "failed" and manifest.failed_stage == "fit_attacks"
    assert manifest.stage("generate_data").status == "completed"
    assert manifest.stage("fit_attacks").error

    assert main(["report", str(tmp_path / "failing"), "--out", str(tmp_path / "report")]) == EXIT_FAILURE
    assert "reports/summary.csv" in capsys.readouterr().err
