from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Dict, Any

import numpy as np
from numpy.typing import NDArray

STD_FLOOR = 1e-8


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix, class labels and class count."""
    features: NDArray[np.float64]
    labels: NDArray[np.int64]
    num_classes: int

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if features.ndim != 2:
            raise ValueError(f"Features must be a 2-D matrix, got shape {features.shape}")
        if features.shape[0] != labels.shape[0]:
            raise ValueError(f"{features.shape[0]} feature rows but {labels.shape[0]} labels")
        if self.num_classes < 1:
            raise ValueError(f"num_classes must be positive, got {self.num_classes}")
        if labels.size and (labels.min() < 0 or labels.max() >= self.num_classes):
            raise ValueError(f"Labels must be in [0, {self.num_classes})")
        if not np.all(np.isfinite(features)):
            raise ValueError("Features must be finite")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return int(self.features.shape[0])

    @property
    def num_features(self) -> int:
        return int(self.features.shape[1])

    def subset(self, indices: Sequence[int]) -> "LabeledDataset":
        indices = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(self.features[indices], self.labels[indices], self.num_classes)

    def with_features(self, features: NDArray[np.float64]) -> "LabeledDataset":
        return LabeledDataset(features, self.labels, self.num_classes)

    def class_counts(self) -> NDArray[np.int64]:
        return np.bincount(self.labels, minlength=self.num_classes)


@dataclass(frozen=True)
class MixtureSpec:
    """Isotropic Gaussian mixture: one mean and std per class, plus class weights."""
    means: NDArray[np.float64]
    stds: NDArray[np.float64]
    weights: Optional[NDArray[np.float64]] = None

    def __post_init__(self):
        means = np.atleast_2d(np.asarray(self.means, dtype=np.float64))
        stds = np.asarray(self.stds, dtype=np.float64).reshape(-1)
        if stds.size == 1:
            stds = np.full(means.shape[0], float(stds[0]))
        if means.shape[0] < 2:
            raise ValueError("A mixture needs at least two classes")
        if stds.shape[0] != means.shape[0] or np.any(stds <= 0):
            raise ValueError("One positive std per class is required")
        weights = (np.full(means.shape[0], 1.0 / means.shape[0]) if self.weights is None
                   else np.asarray(self.weights, dtype=np.float64))
        if weights.shape != (means.shape[0],) or np.any(weights < 0) or not np.isclose(weights.sum(), 1.0):
            raise ValueError("Class weights must be non-negative and sum to 1")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)
        object.__setattr__(self, "weights", weights)

    @property
    def num_classes(self) -> int:
        return int(self.means.shape[0])

    @property
    def dim(self) -> int:
        return int(self.means.shape[1])

    @classmethod
    def on_circle(cls, num_classes: int = 4, radius: float = 2.0, std: float = 1.0, dim: int = 2) -> "MixtureSpec":
        """
        Class means evenly spaced on a circle in the first two coordinates.

        Extra dimensions (``dim > 2``) get zero means, i.e. pure noise features.
        """
        if dim < 2:
            raise ValueError("dim must be at least 2")
        angles = 2.0 * np.pi * np.arange(num_classes) / num_classes
        means = np.zeros((num_classes, dim))
        means[:, 0] = radius * np.cos(angles)
        means[:, 1] = radius * np.sin(angles)
        return cls(means=means, stds=np.full(num_classes, std))


@dataclass(frozen=True)
class NormStats:
    """Per-feature mean and (floored) std of a training set."""
    mean: NDArray[np.float64]
    std: NDArray[np.float64]

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=np.float64))
        object.__setattr__(self, "std", np.maximum(np.asarray(self.std, dtype=np.float64), STD_FLOOR))

    def to_dict(self) -> Dict[str, Any]:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "NormStats":
        return cls(mean=np.asarray(data["mean"]), std=np.asarray(data["std"]))


class TransformKind(Enum):
    PERMUTE = "permute"
    SCALE = "scale"
    SHIFT = "shift"
    UNIFORM_NOISE = "uniform_noise"


@dataclass(frozen=True)
class TransformSpec:
    """One nonmember-dataset construction."""
    kind: TransformKind
    seed: int = 0
    delta: float = 1.0
    offset: Optional[NDArray[np.float64]] = None
    low: Optional[NDArray[np.float64]] = None
    high: Optional[NDArray[np.float64]] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", TransformKind(self.kind))
        if self.kind is TransformKind.SCALE and not self.delta > 0:
            raise ValueError(f"Scale factor must be positive, got {self.delta}")
        if self.kind is TransformKind.SHIFT and self.offset is None:
            raise ValueError("A shift needs an offset")
        if self.kind is TransformKind.UNIFORM_NOISE:
            if self.low is None or self.high is None:
                raise ValueError("Uniform noise needs low and high bounds")
            if np.any(np.asarray(self.low) >= np.asarray(self.high)):
                raise ValueError("Uniform noise needs low < high")
