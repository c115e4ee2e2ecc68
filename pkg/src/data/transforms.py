import logging
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray

from data.dataset import LabeledDataset, NormStats, TransformSpec, TransformKind

logger = logging.getLogger(__name__)

SPLIT_NAMES: Tuple[str, ...] = ("target_train", "target_test", "shadow_train", "shadow_test")


@dataclass(frozen=True)
class DisjointSplit:
    """Four disjoint subsets of one dataset, with the source indices of each."""
    target_train: LabeledDataset
    target_test: LabeledDataset
    shadow_train: LabeledDataset
    shadow_test: LabeledDataset
    indices: Dict[str, NDArray[np.int64]]


def split_sizes(n: int, fractions: Sequence[float]) -> NDArray[np.int64]:
    """Largest-remainder allocation of ``n`` items to ``fractions`` (sizes sum to ``n``)."""
    fractions = np.asarray(fractions, dtype=np.float64)
    if np.any(fractions < 0) or not np.isclose(fractions.sum(), 1.0, atol=1e-9):
        raise ValueError(f"Split fractions must be non-negative and sum to 1, got {fractions.tolist()}")
    raw = fractions * n
    sizes = np.floor(raw).astype(np.int64)
    remainder = int(n - sizes.sum())
    order = np.argsort(-(raw - sizes), kind="stable")
    sizes[order[:remainder]] += 1
    return sizes


def split_disjoint(ds: LabeledDataset, fractions: Sequence[float], seed: int) -> DisjointSplit:
    """
    Partition a dataset into target/shadow train/test splits after a seeded shuffle.

    Args:
        ds: Source dataset
        fractions: Four fractions (target_train, target_test, shadow_train, shadow_test)
        seed: Shuffle seed

    Returns:
        The four splits and their index sets
    """
    if len(fractions) != len(SPLIT_NAMES):
        raise ValueError(f"Expected {len(SPLIT_NAMES)} split fractions, got {len(fractions)}")
    sizes = split_sizes(len(ds), fractions)
    empty = [name for name, size in zip(SPLIT_NAMES, sizes) if size == 0]
    if empty:
        raise ValueError(f"Split fractions leave empty splits for n={len(ds)}: {', '.join(empty)}")

    order = np.random.default_rng(int(seed)).permutation(len(ds))
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    indices = {name: np.sort(order[bounds[i]:bounds[i + 1]]) for i, name in enumerate(SPLIT_NAMES)}
    parts = {name: ds.subset(idx) for name, idx in indices.items()}
    logger.debug(f"Split {len(ds)} samples into {dict(zip(SPLIT_NAMES, sizes.tolist()))}")
    return DisjointSplit(indices=indices, **parts)


def compute_stats(train: LabeledDataset) -> NormStats:
    """Per-feature mean and population std of a non-empty training set."""
    if len(train) == 0:
        raise ValueError("Cannot compute normalization statistics of an empty dataset")
    return NormStats(mean=train.features.mean(axis=0), std=train.features.std(axis=0))


def normalize(ds: LabeledDataset, stats: NormStats) -> LabeledDataset:
    """Standard score ``(x - mu) / sigma`` with the given (training) statistics."""
    return ds.with_features((ds.features - stats.mean) / stats.std)


def denormalize(ds: LabeledDataset, stats: NormStats) -> LabeledDataset:
    return ds.with_features(ds.features * stats.std + stats.mean)


def make_permuted(ds: LabeledDataset, seed: int) -> LabeledDataset:
    """
    Permute the features of every sample independently (fresh permutation per row).

    Row value multisets are preserved; the feature structure is destroyed.
    """
    if len(ds) == 0:
        raise ValueError("Cannot permute an empty dataset")
    rng = np.random.default_rng(int(seed))
    order = np.argsort(rng.random(ds.features.shape), axis=1, kind="stable")
    return ds.with_features(np.take_along_axis(ds.features, order, axis=1))


def make_scaled(ds_normalized: LabeledDataset, delta: float) -> LabeledDataset:
    """Multiply (already normalized) features by ``delta > 0``."""
    if not delta > 0:
        raise ValueError(f"Scale factor must be positive, got {delta}")
    return ds_normalized.with_features(ds_normalized.features * float(delta))


def make_shifted(ds: LabeledDataset, offset: Union[float, Sequence[float]]) -> LabeledDataset:
    """Add a constant offset vector (or scalar) to every sample."""
    offset = np.asarray(offset, dtype=np.float64)
    if offset.ndim > 1 or (offset.ndim == 1 and offset.shape[0] != ds.num_features):
        raise ValueError(f"Offset must be a scalar or have {ds.num_features} entries")
    return ds.with_features(ds.features + offset)


def make_uniform_noise(low: NDArray[np.float64], high: NDArray[np.float64], n: int,
                       num_classes: int, seed: int) -> LabeledDataset:
    """
    Uniform samples over the box ``[low, high]`` with uniformly random labels.

    Labels carry no information here; they exist so the samples fit the
    dataset type.
    """
    low = np.asarray(low, dtype=np.float64)
    high = np.asarray(high, dtype=np.float64)
    if np.any(low >= high):
        raise ValueError("Uniform noise needs low < high in every feature")
    rng = np.random.default_rng(int(seed))
    features = rng.uniform(low, high, size=(n, low.shape[0]))
    labels = rng.integers(0, num_classes, size=n)
    return LabeledDataset(features, labels, num_classes)


def bounding_box(ds: LabeledDataset) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Per-feature min and max; degenerate features are widened by 1e-8."""
    low = ds.features.min(axis=0)
    high = ds.features.max(axis=0)
    high = np.where(high > low, high, low + 1e-8)
    return low, high


def apply_transform(spec: TransformSpec, ds: LabeledDataset, n: int = None) -> LabeledDataset:
    """Build the nonmember dataset described by ``spec`` from ``ds``."""
    if spec.kind is TransformKind.PERMUTE:
        return make_permuted(ds, spec.seed)
    if spec.kind is TransformKind.SCALE:
        return make_scaled(ds, spec.delta)
    if spec.kind is TransformKind.SHIFT:
        return make_shifted(ds, spec.offset)
    return make_uniform_noise(spec.low, spec.high, len(ds) if n is None else n, ds.num_classes, spec.seed)
