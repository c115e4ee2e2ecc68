from attacks.base_attack import (
    AttackKind,
    BaseAttack,
    check_score_vectors,
    predict_membership,
    records_to_arrays,
)
from attacks.threshold_attack import (
    ThresholdAttack,
    entropy,
    max_score,
    candidate_thresholds,
    fit_max_score_threshold,
    fit_entropy_threshold,
)
from attacks.top3_attack import Top3Attack, Top3Settings, top3_features, fit_top3
from attacks.theory import guaranteed_member_margin, max_entropy_given_max
from attacks.scaling import scaling_sweep, DEFAULT_DELTAS
from attacks.persistence import save_attack, load_attack

__all__ = [
    'AttackKind',
    'BaseAttack',
    'check_score_vectors',
    'predict_membership',
    'records_to_arrays',
    'ThresholdAttack',
    'entropy',
    'max_score',
    'candidate_thresholds',
    'fit_max_score_threshold',
    'fit_entropy_threshold',
    'Top3Attack',
    'Top3Settings',
    'top3_features',
    'fit_top3',
    'guaranteed_member_margin',
    'max_entropy_given_max',
    'scaling_sweep',
    'DEFAULT_DELTAS',
    'save_attack',
    'load_attack',
]
