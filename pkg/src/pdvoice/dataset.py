"""Feature tables with speaker/label metadata, fold-local standardization and CSV I/O."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

GROUP_COLUMN = "speaker_id"
LABEL_COLUMN = "label"
POSITIVE = 1  # PD
LABEL_CODES = {"PD": 1, "HC": 0, "1": 1, "0": 0}


class SchemaError(ValueError):
    """A table or CSV violates the expected layout."""


@dataclass(frozen=True)
class FeatureTable:
    matrix: np.ndarray
    column_names: tuple[str, ...]
    groups: np.ndarray
    labels: np.ndarray
    flags: tuple[tuple[str, ...], ...] = field(default=(), compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2:
            raise SchemaError("matrix must be 2-D")
        names = tuple(str(c) for c in self.column_names)
        groups = np.asarray(self.groups).astype(str)
        labels = np.asarray(self.labels).astype(int)
        if len(names) != m.shape[1]:
            raise SchemaError(f"{len(names)} column names for {m.shape[1]} columns")
        if len(set(names)) != len(names):
            raise SchemaError("column names must be unique")
        if not (groups.shape == labels.shape == (m.shape[0],)):
            raise SchemaError("groups and labels must have one entry per row")
        if not np.all(np.isfinite(m)):
            raise SchemaError("matrix contains NaN or infinite values")
        if not np.all(np.isin(labels, (0, 1))):
            raise SchemaError("labels must be 0 (HC) or 1 (PD)")
        for g in np.unique(groups):
            if np.unique(labels[groups == g]).size > 1:
                raise SchemaError(f"speaker {g!r} carries both labels")
        for arr in (m, groups, labels):
            arr.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "column_names", names)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "labels", labels)

    @property
    def shape(self):
        return self.matrix.shape

    def subset_columns(self, mask) -> "FeatureTable":
        mask = np.asarray(mask, dtype=bool)
        names = tuple(n for n, keep in zip(self.column_names, mask) if keep)
        return FeatureTable(self.matrix[:, mask], names, self.groups, self.labels, self.flags)

    def subset_rows(self, rows) -> "FeatureTable":
        rows = np.asarray(rows)
        flags = tuple(self.flags[i] for i in np.arange(len(self.labels))[rows]) if self.flags else ()
        return FeatureTable(self.matrix[rows], self.column_names, self.groups[rows], self.labels[rows], flags)


def encode_label(label) -> int:
    key = str(label).strip()
    if key.endswith(".0"):
        key = key[:-2]
    try:
        return LABEL_CODES[key]
    except KeyError:
        raise SchemaError(f"unrecognised label {label!r}; use PD/HC or 1/0") from None


def build_table(vectors: Sequence) -> FeatureTable:
    """Stack :class:`~pdvoice.features.FeatureVector` rows in input order."""
    if len(vectors) == 0:
        raise SchemaError("no feature vectors")
    names = vectors[0].names
    for v in vectors:
        if tuple(v.names) != tuple(names):
            raise SchemaError("feature vectors disagree on column layout")
    return FeatureTable(
        np.vstack([v.values for v in vectors]),
        names,
        [v.speaker_id for v in vectors],
        [encode_label(v.label) for v in vectors],
        tuple(tuple(v.flags) for v in vectors),
    )


class Standardizer(BaseEstimator, TransformerMixin):
    """Per-column z-scoring; zero-variance columns pass through unscaled.

    Attributes
    ----------
    mean_, scale_ : ndarray
        Fitted column means and standard deviations (scale 1 for constant columns).
    constant_ : ndarray of bool
        Columns detected as constant on the fit rows.
    """

    def fit(self, X, y=None):
        X = check_array(X)
        if X.shape[0] < 2:
            raise ValueError("standardizer needs at least 2 rows")
        self.mean_ = X.mean(axis=0)
        std = X.std(axis=0)
        self.constant_ = std <= 1e-12 * np.maximum(np.abs(self.mean_), 1.0)
        self.scale_ = np.where(self.constant_, 1.0, std)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "mean_")
        X = check_array(X)
        out = (X - self.mean_) / self.scale_
        out[:, self.constant_] = X[:, self.constant_]
        return out


def fit_standardizer(table: FeatureTable, row_mask=None) -> Standardizer:
    rows = slice(None) if row_mask is None else np.asarray(row_mask)
    return Standardizer().fit(table.matrix[rows])


def apply_standardizer(std: Standardizer, table: FeatureTable) -> FeatureTable:
    return FeatureTable(std.transform(table.matrix), table.column_names, table.groups, table.labels, table.flags)


@dataclass(frozen=True)
class GroupStats:
    feature: tuple[str, ...]
    pd_mean: np.ndarray
    pd_std: np.ndarray
    hc_mean: np.ndarray
    hc_std: np.ndarray
    p_value: np.ndarray

    def rows(self):
        for i, name in enumerate(self.feature):
            yield name, self.pd_mean[i], self.pd_std[i], self.hc_mean[i], self.hc_std[i], self.p_value[i]

    def write_csv(self, path, extra: dict | None = None) -> None:
        """One row per feature; ``extra`` adds constant trailing columns."""
        extra = extra or {}
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["feature", "pd_mean", "pd_std", "hc_mean", "hc_std", "p_value", *extra])
            for name, *vals in self.rows():
                w.writerow([name, *(repr(float(v)) for v in vals), *extra.values()])


def group_stats(table: FeatureTable) -> GroupStats:
    """Per-class mean/std (sample std, ddof=1) and two-sided Mann-Whitney p per feature."""
    from .select.stats import mann_whitney_u

    pd_rows = table.labels == POSITIVE
    if pd_rows.all() or not pd_rows.any():
        raise SchemaError("group statistics need both PD and HC rows")
    a, b = table.matrix[pd_rows], table.matrix[~pd_rows]
    ddof = lambda m: 1 if m.shape[0] > 1 else 0  # noqa: E731
    p = np.array([mann_whitney_u(a[:, j], b[:, j]).p for j in range(table.shape[1])])
    return GroupStats(
        table.column_names,
        a.mean(axis=0),
        a.std(axis=0, ddof=ddof(a)),
        b.mean(axis=0),
        b.std(axis=0, ddof=ddof(b)),
        p,
    )


def write_csv(table: FeatureTable, path) -> None:
    """Write ``speaker_id,label,<features...>`` using shortest round-trip float text."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([GROUP_COLUMN, LABEL_COLUMN, *table.column_names])
        for g, y, row in zip(table.groups, table.labels, table.matrix):
            w.writerow([g, int(y), *(repr(float(v)) for v in row)])


def read_csv(path, group_column: str = GROUP_COLUMN, label_column: str = LABEL_COLUMN) -> FeatureTable:
    """Load a feature table; every non-reserved column must be numeric.

    ``group_column``/``label_column`` let external tables (e.g. the UCI
    ``id``/``class`` layout) map onto the reserved columns.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        for col in (group_column, label_column):
            if col not in header:
                raise SchemaError(f"{path}: missing reserved column {col!r}")
        gi, li = header.index(group_column), header.index(label_column)
        feat_idx = [i for i in range(len(header)) if i not in (gi, li)]
        groups, labels, rows = [], [], []
        for line_no, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(header):
                raise SchemaError(f"{path}:{line_no}: expected {len(header)} cells, got {len(rec)}")
            groups.append(rec[gi])
            labels.append(encode_label(rec[li]))
            try:
                rows.append([float(rec[i]) for i in feat_idx])
            except ValueError as exc:
                raise SchemaError(f"{path}:{line_no}: non-numeric cell ({exc})") from None
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return FeatureTable(np.array(rows), [header[i] for i in feat_idx], groups, labels)
