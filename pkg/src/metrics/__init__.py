from metrics.confusion import ConfusionCounts, confusion, precision, recall, fpr, is_degenerate
from metrics.curves import RocCurve, roc_curve, auroc, auprc, fpr_at_tpr
from metrics.calibration import BinningKey, CalibrationBinning, calibration_bins, mmps, ece, oe, DEFAULT_BINS
from metrics.distribution import emd_1d, kde_gaussian, kde_grid, scott_bandwidth
from metrics.report import EvalReport, evaluate_attack

__all__ = [
    'ConfusionCounts',
    'confusion',
    'precision',
    'recall',
    'fpr',
    'is_degenerate',
    'RocCurve',
    'roc_curve',
    'auroc',
    'auprc',
    'fpr_at_tpr',
    'BinningKey',
    'CalibrationBinning',
    'calibration_bins',
    'mmps',
    'ece',
    'oe',
    'DEFAULT_BINS',
    'emd_1d',
    'kde_gaussian',
    'kde_grid',
    'scott_bandwidth',
    'EvalReport',
    'evaluate_attack',
]
