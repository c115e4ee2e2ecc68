import logging

import numpy as np

from data.dataset import LabeledDataset, MixtureSpec

logger = logging.getLogger(__name__)


def generate_mixture(spec: MixtureSpec, n: int, seed: int) -> LabeledDataset:
    """
    Draw ``n`` labeled samples from an isotropic Gaussian mixture.

    Labels are drawn from the class weights first, then each sample from its
    class Gaussian. The result is a deterministic function of ``(spec, n, seed)``.

    Args:
        spec: Mixture definition
        n: Number of samples (may be 0)
        seed: RNG seed

    Returns:
        Labeled samples
    """
    if n < 0:
        raise ValueError(f"Sample count must be non-negative, got {n}")
    rng = np.random.default_rng(int(seed))
    labels = rng.choice(spec.num_classes, size=n, p=spec.weights)
    noise = rng.standard_normal((n, spec.dim))
    features = spec.means[labels] + spec.stds[labels, None] * noise
    logger.debug(f"Generated {n} mixture samples (classes={spec.num_classes}, dim={spec.dim})")
    return LabeledDataset(features.reshape(n, spec.dim), labels, spec.num_classes)


def fit_class_gaussians(train: LabeledDataset):
    """
    Per-class maximum-likelihood diagonal Gaussians.

    Returns:
        ``(means, stds)`` of shape ``(num_classes, num_features)``
    """
    counts = train.class_counts()
    too_small = [c for c, count in enumerate(counts) if count < 2]
    if too_small:
        raise ValueError(f"Fitting needs at least 2 samples per class; classes {too_small} have fewer")
    means = np.vstack([train.features[train.labels == c].mean(axis=0) for c in range(train.num_classes)])
    stds = np.vstack([train.features[train.labels == c].std(axis=0) for c in range(train.num_classes)])
    return means, np.maximum(stds, 1e-8)


def make_fake(train: LabeledDataset, n: int, seed: int) -> LabeledDataset:
    """
    Fresh samples from per-class diagonal Gaussians fitted to ``train``.

    Classes are balanced: ``n // d`` samples each, the remainder going to the
    lowest class indices.
    """
    if n < 0:
        raise ValueError(f"Sample count must be non-negative, got {n}")
    means, stds = fit_class_gaussians(train)
    d = train.num_classes
    per_class = np.full(d, n // d)
    per_class[:n % d] += 1
    labels = np.repeat(np.arange(d), per_class)

    rng = np.random.default_rng(int(seed))
    features = means[labels] + stds[labels] * rng.standard_normal((n, train.num_features))
    return LabeledDataset(features.reshape(n, train.num_features), labels, d)
