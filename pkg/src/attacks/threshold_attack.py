"""
Entropy and maximum-score threshold attacks.

A threshold is fitted on shadow records by maximizing Youden's J
(TPR - FPR) over every achievable split: midpoints between consecutive
distinct statistic values plus the sentinels -inf and +inf. Among optimal
thresholds the one with the lowest FPR wins, i.e. the highest threshold for
the max-score attack and the lowest for the entropy attack.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.special import entr

from attacks.base_attack import (
    AttackKind,
    BaseAttack,
    check_score_vectors,
    records_to_arrays,
    require_both_classes,
)

logger = logging.getLogger(__name__)


def entropy(s: NDArray[np.float64]) -> NDArray[np.float64]:
    """Natural-log Shannon entropy along the last axis, with 0 ln 0 = 0."""
    return np.sum(entr(np.asarray(s, dtype=np.float64)), axis=-1)


def max_score(s: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.max(np.asarray(s, dtype=np.float64), axis=-1)


@dataclass(frozen=True)
class ThresholdAttack(BaseAttack):
    """Member if ``max_score >= tau`` (max-score attack) or ``entropy <= tau`` (entropy attack)."""
    statistic: AttackKind
    tau: float

    def __post_init__(self):
        statistic = AttackKind(self.statistic)
        if statistic is AttackKind.TOP3:
            raise ValueError("A threshold attack uses the entropy or max-score statistic")
        object.__setattr__(self, "statistic", statistic)
        object.__setattr__(self, "tau", float(self.tau))

    @property
    def kind(self) -> AttackKind:
        return self.statistic

    def statistic_values(self, scores: NDArray[np.float64]) -> NDArray[np.float64]:
        if self.statistic is AttackKind.ENTROPY:
            return entropy(scores)
        return max_score(scores)

    def raw_scores(self, scores: NDArray[np.float64]) -> NDArray[np.float64]:
        values = self.statistic_values(scores)
        return -values if self.statistic is AttackKind.ENTROPY else values

    def decide(self, scores: NDArray[np.float64]) -> NDArray[np.int64]:
        values = self.statistic_values(scores)
        if self.statistic is AttackKind.ENTROPY:
            return (values <= self.tau).astype(np.int64)
        return (values >= self.tau).astype(np.int64)

    def to_payload(self) -> Tuple[Dict[str, Any], List[NDArray[np.float64]]]:
        return {"variant": self.statistic.value, "tau": self.tau}, []


def candidate_thresholds(values: NDArray[np.float64]) -> NDArray[np.float64]:
    """Midpoints between consecutive distinct values, plus -inf and +inf."""
    unique = np.unique(np.asarray(values, dtype=np.float64))
    midpoints = (unique[:-1] + unique[1:]) / 2.0
    return np.concatenate([[-np.inf], midpoints, [np.inf]])


def _positive_counts(values, is_member, thresholds, member_if_greater):
    members = np.sort(values[is_member])
    nonmembers = np.sort(values[~is_member])
    if member_if_greater:
        tp = members.size - np.searchsorted(members, thresholds, side="left")
        fp = nonmembers.size - np.searchsorted(nonmembers, thresholds, side="left")
    else:
        tp = np.searchsorted(members, thresholds, side="right")
        fp = np.searchsorted(nonmembers, thresholds, side="right")
    return tp, fp, members.size, nonmembers.size


def _fit_threshold(records: Sequence, statistic: AttackKind) -> ThresholdAttack:
    scores, is_member = records_to_arrays(records)
    require_both_classes(is_member)
    scores = check_score_vectors(scores)

    values = entropy(scores) if statistic is AttackKind.ENTROPY else max_score(scores)
    member_if_greater = statistic is AttackKind.MAX_SCORE
    thresholds = candidate_thresholds(values)
    tp, fp, n_members, n_nonmembers = _positive_counts(values, is_member, thresholds, member_if_greater)

    # J scaled by n_members * n_nonmembers; exact in integers, so ties compare equal
    scaled_j = tp.astype(np.int64) * n_nonmembers - fp.astype(np.int64) * n_members
    optimal = thresholds[scaled_j == scaled_j.max()]
    tau = optimal.max() if member_if_greater else optimal.min()
    logger.debug(f"{statistic.value} threshold fitted: tau={tau:.6g}, "
                 f"J={scaled_j.max() / (n_members * n_nonmembers):.4f}, "
                 f"candidates={thresholds.size}")
    return ThresholdAttack(statistic=statistic, tau=float(tau))


def fit_max_score_threshold(records: Sequence) -> ThresholdAttack:
    """
    Fit the maximum-score threshold attack on labeled records.

    Args:
        records: Objects with ``scores`` and ``is_member`` (both classes present)

    Returns:
        Fitted attack
    """
    return _fit_threshold(records, AttackKind.MAX_SCORE)


def fit_entropy_threshold(records: Sequence) -> ThresholdAttack:
    """Fit the entropy threshold attack on labeled records."""
    return _fit_threshold(records, AttackKind.ENTROPY)
