from data.dataset import LabeledDataset, MixtureSpec, NormStats, TransformSpec, TransformKind
from data.generators import generate_mixture, make_fake, fit_class_gaussians
from data.transforms import (
    DisjointSplit,
    SPLIT_NAMES,
    split_disjoint,
    compute_stats,
    normalize,
    denormalize,
    make_permuted,
    make_scaled,
    make_shifted,
    make_uniform_noise,
    bounding_box,
    apply_transform,
)
from data.csv_io import load_csv, save_csv

__all__ = [
    'LabeledDataset',
    'MixtureSpec',
    'NormStats',
    'TransformSpec',
    'TransformKind',
    'generate_mixture',
    'make_fake',
    'fit_class_gaussians',
    'DisjointSplit',
    'SPLIT_NAMES',
    'split_disjoint',
    'compute_stats',
    'normalize',
    'denormalize',
    'make_permuted',
    'make_scaled',
    'make_shifted',
    'make_uniform_noise',
    'bounding_box',
    'apply_transform',
    'load_csv',
    'save_csv',
]
