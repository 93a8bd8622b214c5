"""CSV ingestion with a declared schema: minmax numerics, one-hot categoricals.

Scaling and category levels are always fitted on training rows only and
replayed on later splits or deployment data; unknown categorical levels map
to an all-zeros one-hot group and are counted, not fatal.
"""

from __future__ import annotations

import csv
import enum
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from actalarm.data.dataset import Dataset
from actalarm.util import NotTrainedError

logger = logging.getLogger(__name__)


class ColumnKind(enum.Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"
    LABEL = "label"
    IGNORE = "ignore"


@dataclass
class CsvSchema:
    """Per-column kinds, in file order. Exactly one label column."""

    columns: list[tuple[str, ColumnKind]]
    has_header: bool = False

    def __post_init__(self):
        labels = [i for i, (_, kind) in enumerate(self.columns) if kind is ColumnKind.LABEL]
        if len(labels) != 1:
            raise ValueError(f"schema needs exactly one label column, found {len(labels)}")
        self.label_index = labels[0]
        self.feature_columns = [(i, name, kind) for i, (name, kind) in enumerate(self.columns)
                                if kind in (ColumnKind.NUMERIC, ColumnKind.CATEGORICAL)]

    def to_dict(self) -> dict:
        return {"columns": [[name, kind.value] for name, kind in self.columns],
                "has_header": self.has_header}

    @classmethod
    def from_dict(cls, doc: dict) -> "CsvSchema":
        return cls(columns=[(name, ColumnKind(kind)) for name, kind in doc["columns"]],
                   has_header=doc["has_header"])


def read_csv_rows(path: str | Path, schema: CsvSchema) -> tuple[list[list[str]], list[str], int]:
    """Raw feature rows (schema order) and label strings.

    Rows with the wrong column count or unparseable numerics are dropped;
    the dropped count is returned and logged.
    """
    rows: list[list[str]] = []
    labels: list[str] = []
    dropped = 0
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        if schema.has_header:
            next(reader, None)
        for record in reader:
            if len(record) != len(schema.columns):
                dropped += 1
                continue
            ok = True
            for i, _, kind in schema.feature_columns:
                if kind is ColumnKind.NUMERIC:
                    try:
                        float(record[i])
                    except ValueError:
                        ok = False
                        break
            if not ok:
                dropped += 1
                continue
            rows.append([record[i] for i, _, _ in schema.feature_columns])
            labels.append(record[schema.label_index].strip())
    if dropped:
        logger.warning("%s: dropped %d unparseable rows", path, dropped)
    return rows, labels, dropped


class Preprocessor:
    """Fitted minmax ranges and categorical levels; replayable on new rows."""

    def __init__(self, schema: CsvSchema):
        self.schema = schema
        self.numeric_ranges: list[tuple[float, float] | None] = []
        self.category_levels: list[list[str] | None] = []
        self.feature_names: list[str] = []
        self.unknown_level_count = 0
        self._fitted = False

    def fit(self, rows: list[list[str]]) -> "Preprocessor":
        if not rows:
            raise ValueError("cannot fit a preprocessor on zero rows")
        self.numeric_ranges = []
        self.category_levels = []
        self.feature_names = []
        for j, (_, name, kind) in enumerate(self.schema.feature_columns):
            column = [row[j] for row in rows]
            if kind is ColumnKind.NUMERIC:
                values = np.array([float(v) for v in column])
                self.numeric_ranges.append((float(values.min()), float(values.max())))
                self.category_levels.append(None)
                self.feature_names.append(name)
            else:
                levels = sorted(set(column))
                self.numeric_ranges.append(None)
                self.category_levels.append(levels)
                self.feature_names.extend(f"{name}={level}" for level in levels)
        self._fitted = True
        return self

    @property
    def width(self) -> int:
        if not self._fitted:
            raise NotTrainedError("preprocessor not fitted")
        return sum(1 if levels is None else len(levels) for levels in self.category_levels)

    def transform(self, rows: list[list[str]]) -> np.ndarray:
        """Rows -> float64 matrix. Constant numeric columns map to 0.0;
        unknown categorical levels map to an all-zeros group (counted)."""
        if not self._fitted:
            raise NotTrainedError("preprocessor not fitted")
        out = np.zeros((len(rows), self.width))
        for r, row in enumerate(rows):
            c = 0
            for j, (_, _, kind) in enumerate(self.schema.feature_columns):
                if kind is ColumnKind.NUMERIC:
                    lo, hi = self.numeric_ranges[j]
                    if hi > lo:
                        out[r, c] = (float(row[j]) - lo) / (hi - lo)
                    c += 1
                else:
                    levels = self.category_levels[j]
                    try:
                        out[r, c + levels.index(row[j])] = 1.0
                    except ValueError:
                        self.unknown_level_count += 1
                    c += len(levels)
        return out

    def to_dict(self) -> dict:
        return {
            "schema": self.schema.to_dict(),
            "numeric_ranges": [list(r) if r else None for r in self.numeric_ranges],
            "category_levels": self.category_levels,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Preprocessor":
        pre = cls(CsvSchema.from_dict(doc["schema"]))
        pre.numeric_ranges = [tuple(r) if r else None for r in doc["numeric_ranges"]]
        pre.category_levels = [list(l) if l is not None else None
                               for l in doc["category_levels"]]
        pre.feature_names = []
        for j, (_, name, kind) in enumerate(pre.schema.feature_columns):
            if kind is ColumnKind.NUMERIC:
                pre.feature_names.append(name)
            else:
                pre.feature_names.extend(f"{name}={lv}" for lv in pre.category_levels[j])
        pre._fitted = True
        return pre


def load_csv(path: str | Path, schema: CsvSchema,
             preprocessor: Preprocessor | None = None,
             label_map: dict[str, str] | None = None,
             classes: list[str] | None = None) -> tuple[Dataset, Preprocessor]:
    """Read, (optionally fit) and transform one CSV file.

    With ``preprocessor=None`` the file is treated as training data and the
    scaler/levels are fitted on it; pass the fitted preprocessor for any
    later file so no information leaks out of the training split.
    ``label_map`` renames raw labels (e.g. attack name -> family) before
    class codes are assigned.
    """
    rows, raw_labels, dropped = read_csv_rows(path, schema)
    if not rows:
        raise ValueError(f"{path}: no usable rows")
    if label_map is not None:
        missing = sorted({l for l in raw_labels if l not in label_map})
        if missing:
            raise KeyError(f"{path}: labels without a mapping: {missing}")
        raw_labels = [label_map[l] for l in raw_labels]
    if preprocessor is None:
        preprocessor = Preprocessor(schema).fit(rows)
    x = preprocessor.transform(rows)
    if classes is None:
        classes = sorted(set(raw_labels))
    lookup = {name: code for code, name in enumerate(classes)}
    unknown = sorted({l for l in raw_labels if l not in lookup})
    if unknown:
        raise KeyError(f"{path}: labels {unknown} not in class list {classes}")
    y = np.array([lookup[l] for l in raw_labels], dtype=np.int64)
    ds = Dataset(x=x, y=y, classes=list(classes),
                 meta={"kind": "tabular", "dropped_rows": dropped,
                       "preprocessing": preprocessor.to_dict()})
    return ds, preprocessor
