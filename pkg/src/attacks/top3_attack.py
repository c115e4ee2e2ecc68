import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from attacks.base_attack import (
    AttackKind,
    BaseAttack,
    check_score_vectors,
    records_to_arrays,
    require_both_classes,
)
from data.dataset import LabeledDataset
from network import (
    Activation,
    EarlyStopping,
    Network,
    NetworkConfig,
    OptimizerSpec,
    OutputHead,
    TrainConfig,
    init_network,
    predict_probability,
    train,
)

logger = logging.getLogger(__name__)

TOP_K = 3


def top3_features(s: NDArray[np.float64]) -> NDArray[np.float64]:
    """
    The three largest scores in descending order, zero-padded when ``d < 3``.

    Accepts a single vector or an ``(n, d)`` matrix.
    """
    s = np.asarray(s, dtype=np.float64)
    single = s.ndim == 1
    s = np.atleast_2d(s)
    ordered = -np.sort(-s, axis=1)[:, :TOP_K]
    if ordered.shape[1] < TOP_K:
        ordered = np.hstack([ordered, np.zeros((ordered.shape[0], TOP_K - ordered.shape[1]))])
    return ordered[0] if single else ordered


@dataclass(frozen=True)
class Top3Settings:
    """Hyperparameters of the top-3 attack model."""
    hidden_units: int = 64
    lr: float = 0.01
    batch_size: int = 16
    max_epochs: int = 500
    min_delta: float = 5e-4
    patience: int = 15
    cutoff: float = 0.5

    def __post_init__(self):
        if self.max_epochs < 1 or self.hidden_units < 1 or self.batch_size < 1:
            raise ValueError("Top-3 settings need positive hidden_units, batch_size and max_epochs")

    def network_config(self) -> NetworkConfig:
        return NetworkConfig(input_dim=TOP_K, hidden_dims=(self.hidden_units,), num_classes=1,
                             activation=Activation.RELU, output=OutputHead.SIGMOID)

    def train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(
            epochs=self.max_epochs,
            batch_size=self.batch_size,
            optimizer=OptimizerSpec(name="adam", lr=self.lr),
            seed=seed,
            early_stopping=EarlyStopping(min_delta=self.min_delta, patience=self.patience),
        )


@dataclass(frozen=True, eq=False)
class Top3Attack(BaseAttack):
    """Sigmoid MLP over the sorted top-3 scores; member if its output reaches ``cutoff``."""
    network: Network
    cutoff: float = 0.5
    epochs_trained: int = field(default=0, compare=False)

    kind = AttackKind.TOP3

    def __post_init__(self):
        config = self.network.config
        if config.input_dim != TOP_K or config.output is not OutputHead.SIGMOID:
            raise ValueError("A top-3 attack needs a 3-input sigmoid network")
        if not 0.0 < self.cutoff < 1.0:
            raise ValueError(f"cutoff must be in (0, 1), got {self.cutoff}")

    def raw_scores(self, scores: NDArray[np.float64]) -> NDArray[np.float64]:
        return predict_probability(self.network, top3_features(scores))

    def decide(self, scores: NDArray[np.float64]) -> NDArray[np.int64]:
        return (self.raw_scores(scores) >= self.cutoff).astype(np.int64)

    def to_payload(self) -> Tuple[Dict[str, Any], List[NDArray[np.float64]]]:
        header = {"variant": AttackKind.TOP3.value, "cutoff": self.cutoff,
                  "network": self.network.config.to_dict()}
        return header, self.network.parameters


def fit_top3(records: Sequence, seed: int, settings: Top3Settings = None) -> Top3Attack:
    """
    Train the top-3 attack MLP on labeled records.

    Adam with binary cross-entropy; training stops when the best epoch loss
    has not improved by ``min_delta`` for ``patience`` epochs, or at
    ``max_epochs``.

    Args:
        records: Objects with ``scores`` and ``is_member``; balanced upstream
        seed: Seed for initialization and batch shuffling
        settings: Hyperparameters (defaults when omitted)

    Returns:
        Fitted attack
    """
    settings = settings or Top3Settings()
    scores, is_member = records_to_arrays(records)
    require_both_classes(is_member)
    features = top3_features(check_score_vectors(scores))

    # Two "classes" so the member flags are valid labels; the head has one unit.
    dataset = LabeledDataset(features, is_member.astype(np.int64), num_classes=2)
    init_seed, shuffle_seed = np.random.SeedSequence(int(seed)).generate_state(2, dtype=np.uint32)
    net = init_network(settings.network_config(), int(init_seed))
    net, history = train(net, dataset, settings.train_config(int(shuffle_seed)), description="top3 attack")
    logger.info(f"Top-3 attack trained for {len(history)} epochs "
                f"(final loss {history[-1].train_loss:.4f}, acc {history[-1].train_acc:.4f})")
    return Top3Attack(network=net, cutoff=settings.cutoff, epochs_trained=len(history))
