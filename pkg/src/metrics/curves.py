"""
Threshold-free metrics: ROC curve, AUROC, AUPRC and FPR at a fixed TPR.

The ROC curve keeps the integer TP/FP counts next to the rates so the
trapezoidal area can be computed in integer arithmetic; it then equals the
pair-counting statistic P(member > nonmember) + P(tie) / 2 exactly.
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from sklearn import metrics as sk_metrics


@dataclass(frozen=True)
class RocCurve:
    """ROC points from (0, 0) to (1, 1), one per distinct score threshold."""
    fpr: NDArray[np.float64]
    tpr: NDArray[np.float64]
    fp_counts: NDArray[np.int64]
    tp_counts: NDArray[np.int64]

    @property
    def n_negative(self) -> int:
        return int(self.fp_counts[-1])

    @property
    def n_positive(self) -> int:
        return int(self.tp_counts[-1])

    def points(self):
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))


def _check_inputs(raw_scores: ArrayLike, truths: ArrayLike):
    raw_scores = np.asarray(raw_scores, dtype=np.float64).reshape(-1)
    truths = np.asarray(truths).astype(bool).reshape(-1)
    if raw_scores.shape != truths.shape:
        raise ValueError(f"{raw_scores.size} scores but {truths.size} ground-truth flags")
    return raw_scores, truths


def roc_curve(raw_scores: ArrayLike, truths: ArrayLike) -> RocCurve:
    """
    ROC curve of ``score >= t`` over every distinct threshold ``t``.

    Args:
        raw_scores: Membership statistic, larger meaning "member"
        truths: Ground-truth member flags (both classes required)

    Returns:
        Curve with rates and counts
    """
    raw_scores, truths = _check_inputs(raw_scores, truths)
    n_pos = int(truths.sum())
    n_neg = int(truths.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC analysis needs both member and nonmember records")

    fpr, tpr, _ = sk_metrics.roc_curve(truths, raw_scores, drop_intermediate=False)
    fp_counts = np.rint(fpr * n_neg).astype(np.int64)
    tp_counts = np.rint(tpr * n_pos).astype(np.int64)
    return RocCurve(fpr=fp_counts / n_neg, tpr=tp_counts / n_pos, fp_counts=fp_counts, tp_counts=tp_counts)


def auroc(curve: RocCurve) -> float:
    """Trapezoidal area under the ROC curve."""
    widths = np.diff(curve.fp_counts)
    heights = curve.tp_counts[1:] + curve.tp_counts[:-1]
    doubled_area = int(np.sum(widths * heights))
    return doubled_area / (2 * curve.n_positive * curve.n_negative)


def auprc(raw_scores: ArrayLike, truths: ArrayLike) -> float:
    """
    Area under the precision-recall curve with step-wise interpolation.

    Sum over descending distinct thresholds of ``(R_k - R_{k-1}) * P_k``,
    i.e. average precision.
    """
    raw_scores, truths = _check_inputs(raw_scores, truths)
    if not truths.any():
        raise ValueError("AUPRC needs at least one member record")
    return float(sk_metrics.average_precision_score(truths, raw_scores))


def fpr_at_tpr(curve: RocCurve, target_tpr: float = 0.95) -> float:
    """Smallest FPR among curve points whose TPR reaches ``target_tpr``."""
    if not 0.0 <= target_tpr <= 1.0:
        raise ValueError(f"target TPR must be in [0, 1], got {target_tpr}")
    reaching = curve.tpr >= target_tpr - 1e-12
    return float(curve.fpr[reaching].min())
