import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence

import numpy as np
import pandas as pd

from attacks.base_attack import BaseAttack, records_to_arrays
from attacks.threshold_attack import ThresholdAttack
from metrics.calibration import BinningKey, DEFAULT_BINS, ece, mmps, oe
from metrics.confusion import ConfusionCounts, confusion, fpr, is_degenerate, precision, recall
from metrics.curves import auprc, auroc, fpr_at_tpr, roc_curve
from metrics.distribution import emd_1d

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvalReport:
    """All metrics of one (model, attack, dataset) evaluation."""
    attack: str
    dataset: str
    counts: ConfusionCounts
    precision: float
    recall: float
    fpr: float
    auroc: float
    auprc: float
    fpr_at_95tpr: float
    mmps_fp: Optional[float]
    mmps_tn: Optional[float]
    ece: Optional[float]
    oe: Optional[float]
    emd_vs_members: float
    degenerate: bool = False
    threshold: Optional[float] = None
    tags: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """Flat, JSON-safe mapping (no NaN or infinity)."""
        flat = {
            "attack": self.attack,
            "dataset": self.dataset,
            "precision": self.precision,
            "recall": self.recall,
            "fpr": self.fpr,
            "auroc": self.auroc,
            "auprc": self.auprc,
            "fpr_at_95tpr": self.fpr_at_95tpr,
            "mmps_fp": self.mmps_fp,
            "mmps_tn": self.mmps_tn,
            "ece": self.ece,
            "oe": self.oe,
            "emd_vs_members": self.emd_vs_members,
            "degenerate": self.degenerate,
            "threshold": self.threshold if self.threshold is not None and np.isfinite(self.threshold) else None,
        }
        flat.update(self.counts.to_dict())
        flat.update({f"tag_{k}": v for k, v in sorted(self.tags.items())})
        return flat

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([self.to_dict()])


def _subset_mmps(scores: np.ndarray, mask: np.ndarray) -> Optional[float]:
    return mmps(scores[mask]) if mask.any() else None


def evaluate_attack(attack: BaseAttack, eval_records: Sequence, dataset: str = None,
                    num_bins: int = DEFAULT_BINS, binning: BinningKey = BinningKey.TRUE_CLASS) -> EvalReport:
    """
    Evaluate a fitted attack on records with known membership.

    Calibration errors are computed on the nonmember records that carry a
    true label; MMPS is split into false positives and true negatives; the
    EMD compares member and nonmember maximum-score distributions.

    Args:
        attack: Fitted attack
        eval_records: Records with ``scores``, ``is_member``, ``source_tag`` and ``true_label``
        dataset: Dataset name for the report (defaults to the nonmember source tag)
        num_bins: ECE/OE bin count
        binning: ECE/OE binning key

    Returns:
        The report
    """
    scores, is_member = records_to_arrays(eval_records)
    if scores.shape[0] == 0:
        raise ValueError("Cannot evaluate an attack on an empty record set")
    decisions, raw = attack.predict(scores)

    counts = confusion(decisions, is_member)
    curve = roc_curve(raw, is_member)

    nonmember = ~is_member
    labeled = np.array([getattr(r, "true_label", None) is not None for r in eval_records])
    calibration_mask = nonmember & labeled
    if calibration_mask.any():
        labels = np.array([r.true_label for r, keep in zip(eval_records, calibration_mask) if keep], dtype=np.int64)
        ece_value = ece(scores[calibration_mask], labels, num_bins, binning)
        oe_value = oe(scores[calibration_mask], labels, num_bins, binning)
    else:
        ece_value = oe_value = None

    max_scores = scores.max(axis=1)
    tags = sorted({r.source_tag for r, flag in zip(eval_records, nonmember) if flag})
    report = EvalReport(
        attack=attack.name,
        dataset=dataset or ",".join(tags),
        counts=counts,
        precision=precision(counts),
        recall=recall(counts),
        fpr=fpr(counts),
        auroc=auroc(curve),
        auprc=auprc(raw, is_member),
        fpr_at_95tpr=fpr_at_tpr(curve, 0.95),
        mmps_fp=_subset_mmps(scores, nonmember & (decisions == 1)),
        mmps_tn=_subset_mmps(scores, nonmember & (decisions == 0)),
        ece=ece_value,
        oe=oe_value,
        emd_vs_members=emd_1d(max_scores[is_member], max_scores[nonmember]),
        degenerate=is_degenerate(counts),
        threshold=attack.tau if isinstance(attack, ThresholdAttack) else None,
        tags={"n_members": int(is_member.sum()), "n_nonmembers": int(nonmember.sum())},
    )
    logger.debug(f"{report.attack} on {report.dataset}: precision={report.precision:.4f} "
                 f"recall={report.recall:.4f} fpr={report.fpr:.4f} auroc={report.auroc:.4f}")
    return report
