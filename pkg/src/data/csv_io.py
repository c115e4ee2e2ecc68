"""
CSV persistence of labeled datasets.

Layout: header ``f0,...,f{m-1},label``, one sample per line, floats written
with 17 significant digits, integer labels, UTF-8, ``\\n`` line endings.
Row numbers in errors are 1-based file lines (the header is line 1).
"""

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from data.dataset import LabeledDataset
from utils.errors import DatasetFormatError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def feature_columns(m: int):
    return [f"f{i}" for i in range(m)]


def save_csv(ds: LabeledDataset, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(ds.features, columns=feature_columns(ds.num_features))
    frame["label"] = ds.labels
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", encoding="utf-8")
    logger.debug(f"Dataset saved to: {path} ({len(ds)} rows)")
    return path


def load_csv(path: Path, num_classes: int) -> LabeledDataset:
    """
    Load a dataset written by ``save_csv``.

    Args:
        path: CSV file
        num_classes: Class count ``d``; labels must lie in ``[0, d)``

    Raises:
        ValueError: ``num_classes`` below 1
        DatasetFormatError: Malformed header, non-numeric cell or label out of range
    """
    if num_classes < 1:
        raise ValueError(f"num_classes must be positive, got {num_classes}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise DatasetFormatError(f"{path}: missing header", row=1)
    except pd.errors.ParserError as e:
        raise DatasetFormatError(f"{path}: malformed CSV: {e}")

    columns = list(frame.columns)
    if not columns or columns[-1] != "label" or columns[:-1] != feature_columns(len(columns) - 1) or len(columns) < 2:
        raise DatasetFormatError(f"{path}: header must be f0,...,f{{m-1}},label, got {','.join(columns)}", row=1)

    m = len(columns) - 1
    features = np.empty((len(frame), m), dtype=np.float64)
    labels = np.empty(len(frame), dtype=np.int64)
    for i, row in enumerate(frame.itertuples(index=False, name=None)):
        line = i + 2
        try:
            features[i] = [float(v) for v in row[:-1]]
        except ValueError:
            raise DatasetFormatError(f"{path}: non-numeric feature value", row=line)
        if not np.all(np.isfinite(features[i])):
            raise DatasetFormatError(f"{path}: non-finite feature value", row=line)
        try:
            labels[i] = int(row[-1])
        except ValueError:
            raise DatasetFormatError(f"{path}: label '{row[-1]}' is not an integer", row=line)
        if labels[i] < 0 or labels[i] >= num_classes:
            raise DatasetFormatError(f"{path}: label {labels[i]} outside [0, {num_classes})", row=line)

    return LabeledDataset(features, labels, num_classes)
