"""
Attack preparation and evaluation data.

Target and shadow models share architecture and training recipe (including
the shuffle seed) and differ only in their disjoint training splits and
initialization seeds. Attacks are fitted on shadow records only; target
records are used for evaluation.
"""

import logging
from dataclasses import dataclass, replace
from typing import Dict, List, Tuple

import numpy as np

from core.experiment_config import EvalDatasetSpec, ExperimentConfig
from core.membership import MembershipRecord, balance, collect_records
from data import (
    DisjointSplit,
    LabeledDataset,
    NormStats,
    bounding_box,
    compute_stats,
    generate_mixture,
    make_fake,
    make_permuted,
    make_scaled,
    make_shifted,
    make_uniform_noise,
    normalize,
    split_disjoint,
)
from network import EpochStats, Network, TrainConfig, accuracy, init_network, train
from utils.seeding import derive_seed

logger = logging.getLogger(__name__)

MEMBER_TAG = "members"
SHADOW_MEMBER_TAG = "shadow_train"
SHADOW_NONMEMBER_TAG = "shadow_test"


@dataclass(frozen=True)
class ExperimentData:
    """Raw splits, the target-train normalization statistics and the normalized splits."""
    split: DisjointSplit
    stats: NormStats
    normalized: Dict[str, LabeledDataset]

    @property
    def num_classes(self) -> int:
        return self.split.target_train.num_classes


@dataclass(frozen=True)
class PreparationResult:
    target: Network
    shadow: Network
    attack_training: List[MembershipRecord]
    train_config: TrainConfig
    target_history: List[EpochStats]
    shadow_history: List[EpochStats]


def build_experiment_data(config: ExperimentConfig) -> ExperimentData:
    """Generate the member distribution sample, split it and normalize every split with target-train stats."""
    source = generate_mixture(config.data.mixture_spec(), config.data.n_samples, derive_seed(config.seed, "data"))
    split = split_disjoint(source, config.data.split_fractions, derive_seed(config.seed, "split"))
    stats = compute_stats(split.target_train)
    normalized = {name: normalize(getattr(split, name), stats) for name in split.indices}
    sizes = ", ".join(f"{name}={len(ds)}" for name, ds in normalized.items())
    logger.info(f"Data ready: {len(source)} samples ({sizes})")
    return ExperimentData(split=split, stats=stats, normalized=normalized)


def shared_train_config(config: ExperimentConfig) -> TrainConfig:
    """The single TrainConfig used for both target and shadow."""
    return replace(config.training, seed=derive_seed(config.seed, "train_shuffle"))


def train_models(config: ExperimentConfig, data: ExperimentData,
                 progress: bool = False) -> Tuple[Network, Network, TrainConfig, List[EpochStats], List[EpochStats]]:
    train_config = shared_train_config(config)
    target, target_history = train(init_network(config.network, derive_seed(config.seed, "target_init")),
                                   data.normalized["target_train"], train_config, progress, "target")
    shadow, shadow_history = train(init_network(config.network, derive_seed(config.seed, "shadow_init")),
                                   data.normalized["shadow_train"], train_config, progress, "shadow")
    return target, shadow, train_config, target_history, shadow_history


def run_preparation(config: ExperimentConfig, data: ExperimentData = None,
                    progress: bool = False) -> PreparationResult:
    """
    Train target and shadow models and assemble the attack training records.

    Args:
        config: Experiment configuration
        data: Prepared data (built from ``config`` when omitted)
        progress: Show training progress bars

    Returns:
        Trained models and balanced shadow records (members: shadow train split,
        nonmembers: shadow held-out split)
    """
    data = data or build_experiment_data(config)
    target, shadow, train_config, target_history, shadow_history = train_models(config, data, progress)

    records = (collect_records(shadow, data.normalized["shadow_train"], True, config.temperature, SHADOW_MEMBER_TAG)
               + collect_records(shadow, data.normalized["shadow_test"], False, config.temperature,
                                 SHADOW_NONMEMBER_TAG))
    attack_training = balance(records, derive_seed(config.seed, "balance_attack"))
    logger.info(f"Attack training set: {len(attack_training)} shadow records")
    return PreparationResult(target=target, shadow=shadow, attack_training=attack_training,
                             train_config=train_config, target_history=target_history,
                             shadow_history=shadow_history)


def _subsample(ds: LabeledDataset, n: int, seed: int) -> LabeledDataset:
    if len(ds) < n:
        raise ValueError(f"Need {n} samples, dataset has {len(ds)}")
    chosen = np.sort(np.random.default_rng(int(seed)).choice(len(ds), size=n, replace=False))
    return ds.subset(chosen)


def eval_member_subset(config: ExperimentConfig, data: ExperimentData) -> LabeledDataset:
    """The target-train members shared by every evaluation dataset."""
    return _subsample(data.normalized["target_train"], config.evaluation.n_eval,
                      derive_seed(config.seed, "eval_members"))


def build_eval_dataset(spec: EvalDatasetSpec, config: ExperimentConfig, data: ExperimentData,
                       seed: int) -> LabeledDataset:
    """
    Build one normalized nonmember dataset of ``n_eval`` samples.

    ``held_out`` draws from the target test split, ``fake`` samples per-class
    Gaussians fitted to the raw target train split, ``shifted`` offsets fresh
    mixture samples in raw space, ``uniform_noise`` covers the normalized
    target-train bounding box, ``permuted`` shuffles each held-out sample's
    raw features and ``scaled`` multiplies normalized held-out samples by delta.
    """
    n = config.evaluation.n_eval
    if spec.kind == "held_out":
        return _subsample(data.normalized["target_test"], n, seed)
    if spec.kind == "fake":
        return normalize(make_fake(data.split.target_train, n, seed), data.stats)
    if spec.kind == "shifted":
        fresh = generate_mixture(config.data.mixture_spec(), n, seed)
        return normalize(make_shifted(fresh, spec.offset), data.stats)
    if spec.kind == "uniform_noise":
        low, high = bounding_box(data.normalized["target_train"])
        return make_uniform_noise(low, high, n, data.num_classes, seed)
    if spec.kind == "permuted":
        raw = _subsample(data.split.target_test, n, seed)
        return normalize(make_permuted(raw, seed), data.stats)
    if spec.kind == "scaled":
        return make_scaled(_subsample(data.normalized["target_test"], n, seed), spec.delta)
    raise ValueError(f"Unknown evaluation dataset kind: {spec.kind}")


def build_eval_datasets(config: ExperimentConfig, data: ExperimentData) -> Dict[str, LabeledDataset]:
    return {spec.name: build_eval_dataset(spec, config, data, derive_seed(config.seed, "eval_datasets", i))
            for i, spec in enumerate(config.evaluation.datasets)}


def build_eval_records(target: Network, members: LabeledDataset, datasets: Dict[str, LabeledDataset],
                       config: ExperimentConfig) -> Dict[str, List[MembershipRecord]]:
    """Target records per evaluation dataset: the shared members plus that dataset's nonmembers."""
    member_records = collect_records(target, members, True, config.temperature, MEMBER_TAG)
    return {name: member_records + collect_records(target, ds, False, config.temperature, name)
            for name, ds in datasets.items()}


def sweep_nonmembers(config: ExperimentConfig, data: ExperimentData) -> LabeledDataset:
    """Fresh normalized samples from the member distribution for the scaling sweep."""
    fresh = generate_mixture(config.data.mixture_spec(), config.sweep.n_samples, derive_seed(config.seed, "sweep"))
    return normalize(fresh, data.stats)


def model_accuracies(target: Network, data: ExperimentData) -> Dict[str, float]:
    train_acc = accuracy(target, data.normalized["target_train"])
    test_acc = accuracy(target, data.normalized["target_test"])
    return {"train_accuracy": train_acc, "test_accuracy": test_acc, "generalization_gap": train_acc - test_acc}
