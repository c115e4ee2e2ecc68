import copy
import json

import numpy as np
import pytest
import yaml

from core.experiment_config import EvalDatasetSpec, load_experiment
from core.membership import balance, collect_records, load_records, save_records
from core.shadow_pipeline import (
    SHADOW_MEMBER_TAG,
    SHADOW_NONMEMBER_TAG,
    build_eval_dataset,
    build_eval_datasets,
    build_eval_records,
    build_experiment_data,
    eval_member_subset,
    run_preparation,
    shared_train_config,
)
from data import bounding_box
from helpers import TINY_EXPERIMENT, make_records, random_score_vectors
from network import TemperatureConfig, init_network
from utils.errors import ConfigError, DatasetFormatError
from utils.seeding import STAGES, derive_seed


@pytest.fixture
def experiment_data(tiny_config):
    return build_experiment_data(tiny_config)


@pytest.fixture
def preparation(tiny_config, experiment_data):
    return run_preparation(tiny_config, experiment_data)


def _rows(ds):
    return {tuple(row) for row in ds.features.tolist()}


def test_derived_seeds_are_stable_and_distinct():
    seeds = [derive_seed(42, stage) for stage in STAGES]
    assert len(set(seeds)) == len(STAGES)
    assert derive_seed(42, "data") == derive_seed(42, "data")
    assert derive_seed(42, "eval_datasets", 0) != derive_seed(42, "eval_datasets", 1)
    assert derive_seed(2**64 - 1, "split") >= 0
    with pytest.raises(ValueError):
        derive_seed(42, "nonsense")
    with pytest.raises(ValueError):
        derive_seed(-1, "data")


def test_experiment_data_splits_are_disjoint_and_normalized(tiny_config, experiment_data):
    indices = experiment_data.split.indices
    names = list(indices)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            assert not set(indices[a].tolist()) & set(indices[b].tolist())
    assert {name: len(ds) for name, ds in experiment_data.normalized.items()} == tiny_config.data.split_sizes()

    target_train = experiment_data.normalized["target_train"]
    np.testing.assert_allclose(target_train.features.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(target_train.features.std(axis=0), 1.0, atol=1e-12)

    again = build_experiment_data(tiny_config)
    assert all(np.array_equal(indices[k], again.split.indices[k]) for k in indices)


def test_target_and_shadow_share_the_recipe(tiny_config, preparation):
    assert preparation.train_config == shared_train_config(tiny_config)
    assert preparation.train_config.seed == derive_seed(tiny_config.seed, "train_shuffle")
    assert preparation.target.config == preparation.shadow.config
    assert len(preparation.target_history) == len(preparation.shadow_history) == tiny_config.training.epochs
    assert not np.array_equal(preparation.target.parameters[0], preparation.shadow.parameters[0])


def test_attack_training_uses_balanced_shadow_records_only(preparation):
    records = preparation.attack_training
    flags = np.array([r.is_member for r in records])
    assert flags.sum() == (~flags).sum() > 0
    assert {r.source_tag for r in records if r.is_member} == {SHADOW_MEMBER_TAG}
    assert {r.source_tag for r in records if not r.is_member} == {SHADOW_NONMEMBER_TAG}


def test_shadow_records_come_from_the_shadow_model(tiny_config, experiment_data, preparation):
    from network import predict_scores
    shadow_train = experiment_data.normalized["shadow_train"]
    expected = predict_scores(preparation.shadow, shadow_train.features, tiny_config.temperature)
    member_scores = np.vstack([r.scores for r in preparation.attack_training if r.is_member])
    expected_rows = {tuple(row) for row in expected.tolist()}
    assert all(tuple(row) in expected_rows for row in member_scores.tolist())


def test_preparation_is_deterministic(tiny_config):
    first = run_preparation(tiny_config)
    second = run_preparation(tiny_config)
    assert all(np.array_equal(a, b) for a, b in zip(first.target.parameters, second.target.parameters))
    assert [r.source_tag for r in first.attack_training] == [r.source_tag for r in second.attack_training]
    np.testing.assert_array_equal(np.vstack([r.scores for r in first.attack_training]),
                                  np.vstack([r.scores for r in second.attack_training]))


def test_eval_datasets_have_the_configured_size(tiny_config, experiment_data):
    n = tiny_config.evaluation.n_eval
    members = eval_member_subset(tiny_config, experiment_data)
    assert len(members) == n
    assert _rows(members) <= _rows(experiment_data.normalized["target_train"])

    datasets = build_eval_datasets(tiny_config, experiment_data)
    assert list(datasets) == [spec.name for spec in tiny_config.evaluation.datasets]
    assert all(len(ds) == n for ds in datasets.values())
    assert _rows(datasets["test"]) <= _rows(experiment_data.normalized["target_test"])

    low, high = bounding_box(experiment_data.normalized["target_train"])
    assert np.all(datasets["noise"].features >= low) and np.all(datasets["noise"].features <= high)

    scaled_spec = next(spec for spec in tiny_config.evaluation.datasets if spec.kind == "scaled")
    held_out_rows = _rows(experiment_data.normalized["target_test"])
    unscaled = datasets[scaled_spec.name].features / scaled_spec.delta
    assert all(min(np.abs(np.array(list(held_out_rows)) - row).max(axis=1)) < 1e-9 for row in unscaled)


def test_permuted_dataset_keeps_raw_value_multisets(tiny_config, experiment_data):
    datasets = build_eval_datasets(tiny_config, experiment_data)
    stats = experiment_data.stats
    raw = datasets["permuted"].features * stats.std + stats.mean
    raw_test = np.sort(experiment_data.split.target_test.features, axis=1)
    for row in np.sort(raw, axis=1):
        assert np.min(np.abs(raw_test - row).max(axis=1)) < 1e-9


def test_eval_records_share_the_member_half(tiny_config, experiment_data, preparation):
    members = eval_member_subset(tiny_config, experiment_data)
    datasets = build_eval_datasets(tiny_config, experiment_data)
    records = build_eval_records(preparation.target, members, datasets, tiny_config)
    n = tiny_config.evaluation.n_eval
    for name, ds_records in records.items():
        assert len(ds_records) == 2 * n
        assert sum(r.is_member for r in ds_records) == n
        assert {r.source_tag for r in ds_records if not r.is_member} == {name}
        assert ds_records[:n] == records["test"][:n]


def test_collect_records_preserves_order_and_tags(toy_dataset):
    from network import NetworkConfig, predict_scores
    net = init_network(NetworkConfig(input_dim=3, hidden_dims=(5,), num_classes=4), 0)
    records = collect_records(net, toy_dataset, True, TemperatureConfig(2.0), "audit")
    np.testing.assert_array_equal(np.vstack([r.scores for r in records]),
                                  predict_scores(net, toy_dataset.features, 2.0))
    assert [r.true_label for r in records] == toy_dataset.labels.tolist()
    assert all(r.is_member and r.source_tag == "audit" for r in records)
    assert collect_records(net, toy_dataset.subset([]), False, None, "empty") == []


def test_balance_subsamples_the_larger_class(rng):
    records = make_records(random_score_vectors(rng, 30, 3), [1] * 10 + [0] * 20)
    balanced = balance(records, seed=3)
    assert sum(r.is_member for r in balanced) == sum(not r.is_member for r in balanced) == 10
    positions = [records.index(r) for r in balanced]
    assert positions == sorted(positions)
    assert [records.index(r) for r in balance(records, seed=3)] == positions
    with pytest.raises(ValueError):
        balance(records[:10], seed=0)


def test_record_files_roundtrip(tmp_path, rng):
    scores = random_score_vectors(rng, 6, 3)
    records = make_records(scores, [1, 1, 1, 0, 0, 0], tag="shadow_test", labels=[0, 1, 2, None, 1, None])
    loaded = load_records(save_records(records, tmp_path / "records.csv"))
    np.testing.assert_array_equal(np.vstack([r.scores for r in loaded]), scores)
    assert [r.true_label for r in loaded] == [0, 1, 2, None, 1, None]
    assert [r.is_member for r in loaded] == [True, True, True, False, False, False]


@pytest.mark.parametrize("content, row", [
    ("s0,s1,is_member,tag,label\n0.5,0.5,2,x,0\n", 2),
    ("s0,s1,is_member,tag,label\n0.5,0.5,1,x,0\n0.9,0.3,0,x,1\n", 3),
    ("a,b,is_member,tag,label\n0.5,0.5,1,x,0\n", 1),
])
def test_record_file_errors(tmp_path, content, row):
    path = tmp_path / "bad.csv"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(DatasetFormatError) as info:
        load_records(path)
    assert info.value.row == row


def _write(tmp_path, text, name="user.yaml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_defaults_load_without_a_user_config(loader):
    config = load_experiment(loader)
    assert config.scenario.id == "standard"
    assert config.network.hidden_dims == (64, 64)
    assert len(config.evaluation.datasets) == 7


def test_unknown_key_names_key_and_line(loader, tmp_path):
    path = _write(tmp_path, "experiment:\n  name: x\ntraining:\n  epochz: 3\n")
    with pytest.raises(ConfigError) as info:
        load_experiment(loader, path)
    assert info.value.key == "training.epochz"
    assert info.value.line == 4


def test_bad_value_names_key_and_line(loader, tmp_path):
    path = _write(tmp_path, "training:\n  epochs: many\n")
    with pytest.raises(ConfigError) as info:
        load_experiment(loader, path)
    assert info.value.key == "training.epochs"
    assert info.value.line == 2


@pytest.mark.parametrize("text, key", [
    ("network:\n  hidden_dims: []\n", "network.hidden_dims"),
    ("network:\n  activation: tanh\n", "network.activation"),
    ("evaluation:\n  n_eval: 100000\n", "evaluation.n_eval"),
    ("evaluation:\n  datasets:\n    - name: members\n      kind: held_out\n", "evaluation.datasets[0].name"),
    ("evaluation:\n  datasets:\n    - name: a\n      kind: blur\n", "evaluation.datasets[0].kind"),
    ("evaluation:\n  datasets:\n    - name: a\n      kind: shifted\n      offset: [1.0, 2.0]\n",
     "evaluation.datasets[0].offset"),
    ("evaluation:\n  datasets:\n    - name: a\n      kind: shifted\n      offset: [1.0, x, 0, 0, 0, 0, 0, 0, 0, 0]\n",
     "evaluation.datasets[0].offset[1]"),
    ("sweep:\n  deltas: [10.0, 1.0]\n", "sweep.deltas[1]"),
    ("data:\n  split_fractions: [0.5, 0.5, 0.5, 0.5]\n", "data.split_fractions"),
    ("training:\n  label_smoothing: 1.0\n", "training"),
])
def test_invalid_values_are_config_errors(loader, tmp_path, text, key):
    with pytest.raises(ConfigError) as info:
        load_experiment(loader, _write(tmp_path, text))
    assert info.value.key == key
    assert info.value.line is not None


def test_json_configs_and_overrides(loader, tmp_path):
    path = _write(tmp_path, json.dumps({"experiment": {"seed": 5}, "training": {"epochs": 3}}), "user.json")
    config = load_experiment(loader, path, seed=9, scenario="label_smoothing")
    assert config.seed == 9
    assert config.training.epochs == 3
    assert config.training.label_smoothing == 0.1
    assert config.to_dict()["scenario"] == {"id": "label_smoothing", "kind": "label_smoothing", "value": 0.1}


@pytest.mark.parametrize("scenario, check", [
    ("temperature", lambda c: c.temperature.T == 10.0),
    ("l2", lambda c: c.training.l2_lambda == 0.005),
    ("standard", lambda c: c.training.label_smoothing == 0.0 and c.temperature.T == 1.0),
])
def test_each_scenario_changes_one_setting(loader, scenario, check):
    assert check(load_experiment(loader, scenario=scenario))


def test_unknown_scenario_lists_the_available_ones(loader):
    with pytest.raises(ConfigError, match="label_smoothing"):
        load_experiment(loader, scenario="dropout")


def test_missing_config_file(loader, tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_experiment(loader, str(tmp_path / "absent.yaml"))


def test_shifted_dataset_accepts_one_offset_per_feature(loader, tmp_path):
    experiment = copy.deepcopy(TINY_EXPERIMENT)
    experiment["evaluation"]["datasets"] = [
        {"name": "shift_first", "kind": "shifted", "offset": [3.0, 0.0, 0.0, -1.0]},
        {"name": "shift_all", "kind": "shifted", "offset": 0.5},
    ]
    config = load_experiment(loader, _write(tmp_path, yaml.safe_dump(experiment)))
    first, second = config.evaluation.datasets
    assert first.offset == (3.0, 0.0, 0.0, -1.0)
    assert second.offset == 0.5

    entries = config.to_dict()["evaluation"]["datasets"]
    assert entries[0]["offset"] == [3.0, 0.0, 0.0, -1.0]
    assert yaml.safe_load(yaml.safe_dump(config.to_dict()))["evaluation"]["datasets"] == entries

    data = build_experiment_data(config)
    unshifted = build_eval_dataset(EvalDatasetSpec(name="base", kind="shifted", offset=0.0), config, data, seed=4)
    shifted = build_eval_dataset(first, config, data, seed=4)
    raw_difference = (shifted.features - unshifted.features) * data.stats.std
    np.testing.assert_allclose(raw_difference, np.tile([3.0, 0.0, 0.0, -1.0], (len(shifted), 1)), atol=1e-9)
