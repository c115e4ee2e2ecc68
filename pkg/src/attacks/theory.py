"""
Guaranteed-membership margins of threshold attacks.

For a fitted threshold attack on ``d`` classes, the margin is the largest
``eps`` such that every score vector whose maximum is at least ``1 - eps`` is
classified as a member. Once scaling drives a model's maximum score past
``1 - eps`` the attack's decision is fixed, whatever the input was.

- max-score attack: ``eps = 1 - tau``.
- entropy attack: the highest entropy of a vector with maximum ``1 - eps``
  is ``h(eps) + eps * ln(d - 1)`` (``h`` the binary entropy; the remaining
  mass spread evenly), so ``eps`` is the largest value keeping this at or
  below ``tau``.

Margins are clipped to ``[0, (d - 1) / d]`` and are NaN when no score vector
is guaranteed to be classified as a member.
"""

import numpy as np
from scipy.optimize import brentq
from scipy.special import entr

from attacks.base_attack import AttackKind
from attacks.threshold_attack import ThresholdAttack


def max_entropy_given_max(eps: float, d: int) -> float:
    """Largest entropy of a ``d``-class score vector whose maximum is ``1 - eps``."""
    if d < 2:
        raise ValueError("At least two classes are required")
    return float(entr(eps) + entr(1.0 - eps) + eps * np.log(d - 1))


def guaranteed_member_margin(attack: ThresholdAttack, d: int) -> float:
    """
    Largest ``eps`` with: ``max(s) >= 1 - eps`` implies a member decision.

    Args:
        attack: Fitted threshold attack
        d: Number of classes

    Returns:
        Margin in ``[0, (d - 1) / d]``, or NaN when none exists
    """
    if d < 2:
        raise ValueError("At least two classes are required")
    upper = (d - 1) / d
    tau = attack.tau

    if attack.statistic is AttackKind.MAX_SCORE:
        if tau > 1.0:
            return float("nan")
        return float(min(max(1.0 - tau, 0.0), upper))

    if tau < 0.0:
        return float("nan")
    if tau >= np.log(d):
        return upper
    eps = brentq(lambda e: max_entropy_given_max(e, d) - tau, 0.0, upper, xtol=1e-15)
    # the root may land just past tau; back off until the bound holds
    while eps > 0.0 and max_entropy_given_max(eps, d) > tau:
        eps = np.nextafter(eps, 0.0)
    return float(eps)
