from dataclasses import dataclass, asdict
from typing import Dict

import numpy as np
from numpy.typing import ArrayLike
from sklearn.metrics import confusion_matrix


@dataclass(frozen=True)
class ConfusionCounts:
    """Counts of a binary member/nonmember decision against ground truth."""
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("Confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)


def confusion(decisions: ArrayLike, truths: ArrayLike) -> ConfusionCounts:
    """Tally decisions (1 = member) against membership ground truth."""
    decisions = np.asarray(decisions).astype(np.int64).reshape(-1)
    truths = np.asarray(truths).astype(np.int64).reshape(-1)
    if decisions.shape != truths.shape:
        raise ValueError(f"{decisions.size} decisions but {truths.size} ground-truth flags")
    tn, fp, fn, tp = confusion_matrix(truths, decisions, labels=[0, 1]).ravel()
    return ConfusionCounts(tp=int(tp), fp=int(fp), tn=int(tn), fn=int(fn))


def precision(counts: ConfusionCounts) -> float:
    """TP / (TP + FP); 0 when the attack predicted no members."""
    predicted = counts.tp + counts.fp
    return counts.tp / predicted if predicted else 0.0


def recall(counts: ConfusionCounts) -> float:
    positives = counts.tp + counts.fn
    return counts.tp / positives if positives else 0.0


def fpr(counts: ConfusionCounts) -> float:
    """FP / (FP + TN); 0 when there are no nonmembers."""
    negatives = counts.fp + counts.tn
    return counts.fp / negatives if negatives else 0.0


def is_degenerate(counts: ConfusionCounts) -> bool:
    """True when one of precision, recall or FPR fell back to its zero-denominator value."""
    return (counts.tp + counts.fp) == 0 or (counts.tp + counts.fn) == 0 or (counts.fp + counts.tn) == 0
