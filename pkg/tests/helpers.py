import numpy as np

from core.membership import MembershipRecord


def random_score_vectors(rng: np.random.Generator, n: int, d: int, sharpness: float = 1.0) -> np.ndarray:
    logits = rng.normal(scale=sharpness, size=(n, d))
    e = np.exp(logits - logits.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def make_records(scores: np.ndarray, flags, tag: str = "toy", labels=None):
    labels = [None] * len(flags) if labels is None else labels
    return [MembershipRecord(scores=s, is_member=bool(f), source_tag=tag, true_label=l)
            for s, f, l in zip(scores, flags, labels)]


TINY_EXPERIMENT = {
    "experiment": {"name": "tiny", "seed": 3},
    "data": {
        "mixture": {"num_classes": 3, "dim": 4, "radius": 2.0, "std": 1.0},
        "n_samples": 240,
    },
    "network": {"hidden_dims": [16, 16]},
    "training": {"epochs": 15, "batch_size": 16},
    "attacks": {"top3": {"hidden_units": 8, "max_epochs": 20, "patience": 5}},
    "evaluation": {"n_eval": 25},
    "sweep": {"deltas": [1.0, 100.0, 1000000.0], "n_samples": 40},
}
