import logging
import time
from typing import Mapping, Sequence, Union

import numpy as np
import pandas as pd

from attacks.base_attack import BaseAttack
from attacks.threshold_attack import ThresholdAttack
from attacks.theory import guaranteed_member_margin
from data.dataset import LabeledDataset
from data.transforms import make_scaled
from network import Activation, Network, TemperatureConfig, predict_scores

logger = logging.getLogger(__name__)

DEFAULT_DELTAS = (1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6)


def scaling_sweep(net: Network, attacks: Mapping[str, BaseAttack], nonmember_ds_normalized: LabeledDataset,
                  deltas: Sequence[float] = DEFAULT_DELTAS,
                  temp: Union[TemperatureConfig, float, None] = None) -> pd.DataFrame:
    """
    Scale normalized nonmembers by each ``delta`` and record how the attacks respond.

    Columns: ``delta``, ``mean_max_score``, ``frac_member_<attack>`` per attack
    and, for threshold attacks, ``frac_guaranteed_<attack>``: the fraction of
    samples whose maximum score lies inside the attack's guaranteed-membership
    margin.

    Args:
        net: (Leaky-)ReLU target model
        attacks: Fitted attacks keyed by name
        nonmember_ds_normalized: Normalized nonmember samples
        deltas: Positive scale factors in ascending order
        temp: Temperature applied to the target scores

    Returns:
        One row per delta
    """
    if len(nonmember_ds_normalized) == 0:
        raise ValueError("Scaling sweep needs a non-empty dataset")
    deltas = [float(delta) for delta in deltas]
    if not deltas or any(delta <= 0 for delta in deltas) or any(b <= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError(f"Scale factors must be positive and strictly ascending, got {deltas}")
    if net.config.activation not in (Activation.RELU, Activation.LEAKY_RELU):
        raise ValueError("Scaling sweep requires a ReLU or leaky ReLU network")

    margins = {name: guaranteed_member_margin(attack, net.config.num_classes)
               for name, attack in attacks.items() if isinstance(attack, ThresholdAttack)}

    rows = []
    for delta in deltas:
        start = time.perf_counter()
        scores = predict_scores(net, make_scaled(nonmember_ds_normalized, delta).features, temp)
        max_scores = scores.max(axis=1)
        row = {"delta": delta, "mean_max_score": float(max_scores.mean())}
        for name, attack in attacks.items():
            decisions, _ = attack.predict(scores)
            row[f"frac_member_{name}"] = float(decisions.mean())
        for name, margin in margins.items():
            row[f"frac_guaranteed_{name}"] = (0.0 if np.isnan(margin)
                                              else float(np.mean(max_scores >= 1.0 - margin)))
        rows.append(row)
        logger.debug(f"delta={delta:g}: mean max score {row['mean_max_score']:.6f} "
                     f"({(time.perf_counter() - start) * 1000:.1f} ms)")
    return pd.DataFrame(rows)
