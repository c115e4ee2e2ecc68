"""
Seed splitting for reproducible pipeline stages.

A master seed is expanded into one independent 64-bit seed per stage with
``numpy.random.SeedSequence``: the stage's index in ``STAGES`` is used as the
spawn key, so ``derive_seed(master, stage)`` depends only on the pair and
rerunning a single stage reproduces it exactly. Dataset-specific seeds add a
second spawn-key component (the position of the dataset in the evaluation
list).
"""

from typing import Tuple

import numpy as np

STAGES: Tuple[str, ...] = (
    "data",
    "split",
    "target_init",
    "shadow_init",
    "train_shuffle",
    "balance_attack",
    "top3",
    "eval_members",
    "eval_datasets",
    "sweep",
)

MAX_SEED = 2**64 - 1


def derive_seed(master_seed: int, stage: str, *sub_keys: int) -> int:
    """
    Derive a per-stage seed from the master seed.

    Args:
        master_seed: Non-negative 64-bit master seed
        stage: Stage name from ``STAGES``
        *sub_keys: Optional extra non-negative integers (e.g. dataset index)

    Returns:
        64-bit integer seed
    """
    if stage not in STAGES:
        raise ValueError(f"Unknown seed stage: {stage}")
    if not 0 <= int(master_seed) <= MAX_SEED:
        raise ValueError(f"Master seed must be an unsigned 64-bit integer, got {master_seed}")

    spawn_key = (STAGES.index(stage),) + tuple(int(k) for k in sub_keys)
    state = np.random.SeedSequence(entropy=int(master_seed), spawn_key=spawn_key).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 32) | int(state[1])
