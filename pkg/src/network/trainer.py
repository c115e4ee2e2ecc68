import logging
import time
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from tqdm import tqdm

from network.config import TrainConfig, OutputHead
from network.losses import training_loss, backward
from network.model import Network, forward_logits
from network.optimizers import build_optimizer

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpochStats:
    """Objective and accuracy on the full training set after one epoch."""
    epoch: int
    train_loss: float
    train_acc: float


def _training_accuracy(net: Network, features: np.ndarray, labels: np.ndarray) -> float:
    logits = forward_logits(net, features)
    if net.config.output is OutputHead.SIGMOID:
        predictions = (logits[:, 0] > 0).astype(np.int64)
    else:
        predictions = np.argmax(logits, axis=1)
    return float(np.mean(predictions == labels))


def train(net: Network, dataset, train_config: TrainConfig,
          progress: bool = False, description: str = "train") -> Tuple[Network, List[EpochStats]]:
    """
    Mini-batch training with a seeded shuffle each epoch.

    The last partial batch is kept. With ``train_config.early_stopping`` set,
    training stops once the best epoch-mean loss has not improved by
    ``min_delta`` for ``patience`` consecutive epochs; ``epochs`` is then the
    hard cap and the history is shorter.

    Args:
        net: Initial network (not modified)
        dataset: ``LabeledDataset`` with valid labels for the network's head
        train_config: Training recipe
        progress: Show a tqdm progress bar
        description: Progress-bar label

    Returns:
        Trained network and per-epoch history
    """
    if len(dataset) == 0:
        raise ValueError("Cannot train on an empty dataset")

    features = np.asarray(dataset.features, dtype=np.float64)
    labels = np.asarray(dataset.labels, dtype=np.int64)
    n = features.shape[0]

    rng = np.random.default_rng(int(train_config.seed))
    optimizer = build_optimizer(train_config.optimizer)
    params = [p.copy() for p in net.parameters]
    state = optimizer.init_state(params)

    stopping = train_config.early_stopping
    best_loss = np.inf
    epochs_without_improvement = 0

    history: List[EpochStats] = []
    start = time.perf_counter()
    epochs = tqdm(range(train_config.epochs), desc=description, disable=not progress, leave=False)
    for epoch in epochs:
        order = rng.permutation(n)
        weighted_loss = 0.0
        for lo in range(0, n, train_config.batch_size):
            idx = order[lo:lo + train_config.batch_size]
            current = net.with_parameters(params)
            batch_x, batch_y = features[idx], labels[idx]
            weighted_loss += training_loss(current, batch_x, batch_y, train_config) * idx.size
            grads = backward(current, batch_x, batch_y, train_config)
            params, state = optimizer.step(params, grads, state)

        net = net.with_parameters(params)
        epoch_loss = weighted_loss / n
        stats = EpochStats(epoch=epoch + 1, train_loss=epoch_loss,
                           train_acc=_training_accuracy(net, features, labels))
        history.append(stats)
        logger.debug(f"{description} epoch {stats.epoch}: loss={stats.train_loss:.6f} acc={stats.train_acc:.4f}")

        if stopping is not None:
            if epoch_loss < best_loss - stopping.min_delta:
                best_loss = epoch_loss
                epochs_without_improvement = 0
            else:
                epochs_without_improvement += 1
                if epochs_without_improvement >= stopping.patience:
                    logger.debug(f"{description}: early stop after {stats.epoch} epochs")
                    break

    if history:
        logger.info(f"{description}: {len(history)} epochs in {time.perf_counter() - start:.2f}s, "
                    f"loss={history[-1].train_loss:.4f}, acc={history[-1].train_acc:.4f}")
    return net, history
