from abc import ABC, abstractmethod
from enum import Enum
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

SCORE_SUM_TOLERANCE = 1e-9


class AttackKind(Enum):
    """Score-based membership inference attacks."""
    ENTROPY = "entropy"
    MAX_SCORE = "max"
    TOP3 = "top3"


def check_score_vectors(scores: NDArray[np.float64]) -> NDArray[np.float64]:
    """
    Validate a batch of prediction score vectors.

    Args:
        scores: ``(n, d)`` matrix or a single ``d``-vector

    Returns:
        Scores as a float64 ``(n, d)`` matrix

    Raises:
        ValueError: If entries leave [0, 1] or a row does not sum to 1 within 1e-9
    """
    scores = np.atleast_2d(np.asarray(scores, dtype=np.float64))
    if scores.ndim != 2:
        raise ValueError(f"Score vectors must form a matrix, got shape {scores.shape}")
    if scores.size and (np.any(scores < 0.0) or np.any(scores > 1.0)):
        raise ValueError("Score entries must be in [0, 1]")
    if scores.size and np.any(np.abs(scores.sum(axis=1) - 1.0) > SCORE_SUM_TOLERANCE):
        raise ValueError("Score vectors must sum to 1")
    return scores


def records_to_arrays(records: Sequence) -> Tuple[NDArray[np.float64], NDArray[np.bool_]]:
    """Stack ``records`` (objects with ``scores`` and ``is_member``) into arrays."""
    if not records:
        return np.zeros((0, 0)), np.zeros(0, dtype=bool)
    scores = np.vstack([np.asarray(r.scores, dtype=np.float64) for r in records])
    is_member = np.array([bool(r.is_member) for r in records])
    return scores, is_member


def require_both_classes(is_member: NDArray[np.bool_]) -> None:
    if not (np.any(is_member) and np.any(~is_member)):
        raise ValueError("Attack fitting needs both member and nonmember records")


class BaseAttack(ABC):
    """Base class for fitted membership inference attacks."""

    kind: AttackKind

    @abstractmethod
    def raw_scores(self, scores: NDArray[np.float64]) -> NDArray[np.float64]:
        """
        Continuous membership statistic, larger meaning "more likely member".

        Args:
            scores: ``(n, d)`` prediction score vectors

        Returns:
            ``n`` raw scores for threshold-free metrics
        """
        pass

    @abstractmethod
    def decide(self, scores: NDArray[np.float64]) -> NDArray[np.int64]:
        """Membership decisions (1 = member) for ``(n, d)`` score vectors."""
        pass

    @abstractmethod
    def to_payload(self) -> Tuple[Dict[str, Any], List[NDArray[np.float64]]]:
        """Header fields and arrays for the parameter file."""
        pass

    def predict(self, scores: NDArray[np.float64]) -> Tuple[NDArray[np.int64], NDArray[np.float64]]:
        scores = check_score_vectors(scores)
        return self.decide(scores), self.raw_scores(scores)

    @property
    def name(self) -> str:
        return self.kind.value


def predict_membership(attack: BaseAttack, s: NDArray[np.float64]) -> Tuple[int, float]:
    """
    Decision and raw score for a single score vector.

    Returns:
        ``(decision, raw_score)`` with decision 1 for "member"
    """
    decisions, raw = attack.predict(np.asarray(s, dtype=np.float64).reshape(1, -1))
    return int(decisions[0]), float(raw[0])
