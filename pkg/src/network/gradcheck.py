from typing import List

import numpy as np
from numpy.typing import NDArray

from network.config import TrainConfig
from network.losses import training_loss, backward
from network.model import Network


def numerical_gradients(net: Network, batch: NDArray[np.float64], labels: NDArray[np.int64],
                        train_config: TrainConfig, step: float = 1e-3) -> List[NDArray[np.float64]]:
    """Central finite differences of ``training_loss`` for every parameter entry."""
    params = [p.copy() for p in net.parameters]
    grads = []
    for k, p in enumerate(params):
        grad = np.zeros_like(p)
        for index in np.ndindex(p.shape):
            original = p[index]
            p[index] = original + step
            plus = training_loss(net.with_parameters(params), batch, labels, train_config)
            p[index] = original - step
            minus = training_loss(net.with_parameters(params), batch, labels, train_config)
            p[index] = original
            grad[index] = (plus - minus) / (2.0 * step)
        grads.append(grad)
    return grads


def max_relative_error(net: Network, batch: NDArray[np.float64], labels: NDArray[np.int64],
                       train_config: TrainConfig, step: float = 1e-3, floor: float = 1e-2) -> float:
    """
    Largest ``|analytic - numeric| / max(|analytic|, |numeric|, floor)`` over all parameters.

    Entries where either gradient exceeds ``floor`` in magnitude are compared
    by relative error. Below it the result is the absolute error divided by
    ``floor``: with the default ``floor=1e-2`` a reported 1e-4 bounds the
    absolute error of those entries by 1e-6. A tiny floor such as 1e-8 makes
    the check relative for every entry that is not exactly zero.
    """
    analytic = backward(net, batch, labels, train_config)
    numeric = numerical_gradients(net, batch, labels, train_config, step)
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst
