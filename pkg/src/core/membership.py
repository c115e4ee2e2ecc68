"""
Membership records: one prediction-score vector with its membership ground truth.

Record CSV layout: ``s0,...,s{d-1},is_member,tag,label``. ``is_member`` is
0 or 1, ``tag`` names the dataset the sample came from, and ``label`` is the
sample's true class (empty when unknown).
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from attacks.base_attack import check_score_vectors
from data.dataset import LabeledDataset
from network import Network, TemperatureConfig, predict_scores
from utils.errors import DatasetFormatError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True, eq=False)
class MembershipRecord:
    """Prediction scores of one sample plus whether it was a training member."""
    scores: NDArray[np.float64]
    is_member: bool
    source_tag: str
    true_label: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "scores", check_score_vectors(self.scores)[0])
        object.__setattr__(self, "is_member", bool(self.is_member))
        if self.true_label is not None:
            object.__setattr__(self, "true_label", int(self.true_label))


def collect_records(model: Network, dataset: LabeledDataset, is_member: bool,
                    temp: Union[TemperatureConfig, float, None], tag: str) -> List[MembershipRecord]:
    """
    Query ``model`` on every sample and wrap the scores as records (order preserved).

    Args:
        model: Softmax classifier to query
        dataset: Samples (already normalized)
        is_member: Ground truth shared by all samples
        temp: Softmax temperature
        tag: Provenance tag stored on every record

    Returns:
        One record per sample
    """
    if len(dataset) == 0:
        return []
    scores = predict_scores(model, dataset.features, temp)
    return [MembershipRecord(scores=row, is_member=is_member, source_tag=tag, true_label=label)
            for row, label in zip(scores, dataset.labels.tolist())]


def balance(records: Sequence[MembershipRecord], seed: int) -> List[MembershipRecord]:
    """
    Subsample the larger membership class down to the size of the smaller one.

    The relative order of the kept records is preserved.

    Raises:
        ValueError: If either class is absent
    """
    flags = np.array([r.is_member for r in records], dtype=bool)
    n_members, n_nonmembers = int(flags.sum()), int((~flags).sum())
    if n_members == 0 or n_nonmembers == 0:
        raise ValueError("Balancing needs both member and nonmember records")

    keep = np.ones(len(records), dtype=bool)
    if n_members != n_nonmembers:
        larger = np.flatnonzero(flags if n_members > n_nonmembers else ~flags)
        rng = np.random.default_rng(int(seed))
        dropped = rng.choice(larger, size=larger.size - min(n_members, n_nonmembers), replace=False)
        keep[dropped] = False
        logger.debug(f"Balanced records: {n_members} members / {n_nonmembers} nonmembers -> "
                     f"{min(n_members, n_nonmembers)} each")
    return [r for r, k in zip(records, keep) if k]


def records_frame(records: Sequence[MembershipRecord]) -> pd.DataFrame:
    if not records:
        raise ValueError("Cannot tabulate an empty record set")
    d = records[0].scores.shape[0]
    frame = pd.DataFrame(np.vstack([r.scores for r in records]), columns=[f"s{i}" for i in range(d)])
    frame["is_member"] = [int(r.is_member) for r in records]
    frame["tag"] = [r.source_tag for r in records]
    frame["label"] = pd.array([r.true_label for r in records], dtype="Int64")
    return frame


def save_records(records: Sequence[MembershipRecord], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records_frame(records).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n",
                                  encoding="utf-8")
    logger.debug(f"Records saved to: {path} ({len(records)} rows)")
    return path


def load_records(path: Path) -> List[MembershipRecord]:
    """
    Load records written by ``save_records``.

    Raises:
        DatasetFormatError: Malformed header or cell, with the file line
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise DatasetFormatError(f"{path}: unreadable record file: {e}", row=1)

    columns = list(frame.columns)
    d = len(columns) - 3
    if d < 2 or columns[:d] != [f"s{i}" for i in range(d)] or columns[d:] != ["is_member", "tag", "label"]:
        raise DatasetFormatError(f"{path}: header must be s0,...,s{{d-1}},is_member,tag,label", row=1)

    records = []
    for i, row in enumerate(frame.itertuples(index=False, name=None)):
        line = i + 2
        try:
            scores = np.array([float(v) for v in row[:d]])
            flag = int(row[d])
            label = int(row[d + 2]) if row[d + 2] != "" else None
        except ValueError:
            raise DatasetFormatError(f"{path}: non-numeric value", row=line)
        if flag not in (0, 1):
            raise DatasetFormatError(f"{path}: is_member must be 0 or 1", row=line)
        if label is not None and not 0 <= label < d:
            raise DatasetFormatError(f"{path}: label {label} outside [0, {d})", row=line)
        try:
            records.append(MembershipRecord(scores=scores, is_member=bool(flag), source_tag=row[d + 1],
                                            true_label=label))
        except ValueError as e:
            raise DatasetFormatError(f"{path}: {e}", row=line)
    return records
