"""
Calibration metrics over K equal-width score bins.

By default a sample is binned by the score its model gives the TRUE class;
``BinningKey.MAX_CONFIDENCE`` bins by the maximum score instead. Within a
bin, accuracy is the fraction of argmax-correct predictions and the bin score
is the mean binning score. Empty bins contribute nothing; a score of exactly
1.0 belongs to the top bin.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

DEFAULT_BINS = 15


class BinningKey(Enum):
    TRUE_CLASS = "true_class"
    MAX_CONFIDENCE = "max_confidence"


@dataclass(frozen=True)
class CalibrationBinning:
    """Per-bin sample count, accuracy and mean score."""
    num_bins: int
    counts: NDArray[np.int64]
    acc: NDArray[np.float64]
    score: NDArray[np.float64]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def weights(self) -> NDArray[np.float64]:
        return self.counts / self.total


def mmps(score_vectors: ArrayLike) -> float:
    """Mean of the per-vector maximum prediction scores."""
    scores = np.atleast_2d(np.asarray(score_vectors, dtype=np.float64))
    if scores.shape[0] == 0 or scores.size == 0:
        raise ValueError("MMPS of an empty set is undefined")
    return float(scores.max(axis=1).mean())


def calibration_bins(score_vectors: ArrayLike, true_labels: ArrayLike, num_bins: int = DEFAULT_BINS,
                     key: Union[BinningKey, str] = BinningKey.TRUE_CLASS) -> CalibrationBinning:
    """
    Bin samples for ECE/OE.

    Args:
        score_vectors: ``(N, d)`` prediction scores
        true_labels: ``N`` class indices
        num_bins: Number of equal-width bins over [0, 1]
        key: Binning score (true-class score or max confidence)

    Returns:
        The binning
    """
    scores = np.atleast_2d(np.asarray(score_vectors, dtype=np.float64))
    labels = np.asarray(true_labels, dtype=np.int64).reshape(-1)
    if scores.shape[0] == 0:
        raise ValueError("Calibration of an empty set is undefined")
    if labels.shape[0] != scores.shape[0]:
        raise ValueError(f"{scores.shape[0]} score vectors but {labels.shape[0]} labels")
    if labels.min() < 0 or labels.max() >= scores.shape[1]:
        raise ValueError(f"Labels must be in [0, {scores.shape[1]})")
    if num_bins < 1:
        raise ValueError(f"num_bins must be positive, got {num_bins}")

    rows = np.arange(scores.shape[0])
    if BinningKey(key) is BinningKey.TRUE_CLASS:
        binned = scores[rows, labels]
    else:
        binned = scores.max(axis=1)
    correct = (np.argmax(scores, axis=1) == labels).astype(np.float64)

    edges = np.arange(num_bins + 1) / num_bins
    index = np.digitize(binned, edges[1:-1], right=False)
    counts = np.bincount(index, minlength=num_bins)
    occupied = np.maximum(counts, 1)
    acc = np.bincount(index, weights=correct, minlength=num_bins) / occupied
    score = np.bincount(index, weights=binned, minlength=num_bins) / occupied
    return CalibrationBinning(num_bins=num_bins, counts=counts, acc=acc, score=score)


def ece(score_vectors: ArrayLike, true_labels: ArrayLike, num_bins: int = DEFAULT_BINS,
        key: Union[BinningKey, str] = BinningKey.TRUE_CLASS) -> float:
    """Expected calibration error ``sum |B_i|/N * |acc(B_i) - score(B_i)|``."""
    bins = calibration_bins(score_vectors, true_labels, num_bins, key)
    return float(np.sum(bins.weights * np.abs(bins.acc - bins.score)))


def oe(score_vectors: ArrayLike, true_labels: ArrayLike, num_bins: int = DEFAULT_BINS,
       key: Union[BinningKey, str] = BinningKey.TRUE_CLASS) -> float:
    """Overconfidence error ``sum |B_i|/N * score(B_i) * max(score(B_i) - acc(B_i), 0)``."""
    bins = calibration_bins(score_vectors, true_labels, num_bins, key)
    return float(np.sum(bins.weights * bins.score * np.maximum(bins.score - bins.acc, 0.0)))
