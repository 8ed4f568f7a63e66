"""Tabular dataset container with per-dimension min-max normalization.

Distance computations throughout the package run on the normalized values so
that dimensions with large units do not dominate; the raw values are kept for
display and for dimension-level queries.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

_MISSING = {"", "?", "na", "nan", "null", "none"}


@dataclass(frozen=True)
class Dataset:
    """An n x d numeric table with named dimensions and optional labels.

    Attributes
    ----------
    values : (n, d) float64 array of finite values.
    dim_names : d unique dimension names.
    labels : optional n categorical tags.
    norm_values : (n, d) array, each dimension min-max scaled to [0, 1].
        Constant dimensions map to 0.
    """

    values: np.ndarray
    dim_names: tuple[str, ...]
    labels: tuple[str, ...] | None = None
    norm_values: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValidationError("values must be a 2-D matrix")
        if not np.isfinite(values).all():
            raise ValidationError("values must all be finite")
        n, d = values.shape
        if len(self.dim_names) != d:
            raise ValidationError(f"expected {d} dimension names, got {len(self.dim_names)}")
        if len(set(self.dim_names)) != d:
            raise ValidationError("dimension names must be unique")
        if self.labels is not None and len(self.labels) != n:
            raise ValidationError(f"expected {n} labels, got {len(self.labels)}")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dim_names", tuple(str(s) for s in self.dim_names))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(v) for v in self.labels))
        norm = _minmax_normalize(values)
        norm.setflags(write=False)
        object.__setattr__(self, "norm_values", norm)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


def _minmax_normalize(values: np.ndarray) -> np.ndarray:
    lo = values.min(axis=0)
    span = values.max(axis=0) - lo
    norm = np.zeros_like(values)
    nonconst = span > 0
    norm[:, nonconst] = (values[:, nonconst] - lo[nonconst]) / span[nonconst]
    return norm


def ingest_csv(raw: bytes | str, label_column: str | None = None) -> Dataset:
    """Parse a CSV with a header row into a Dataset.

    Fully numeric columns become dimensions. Labels come from ``label_column``
    when given, else from a column literally named "label" (case-insensitive),
    else from the single non-numeric column if there is exactly one. Missing
    values are rejected with their row index; there is no imputation. A
    non-numeric cell inside an otherwise numeric column is an error naming the
    row and column.
    """
    if isinstance(raw, bytes):
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ValidationError(f"CSV is not valid UTF-8: {exc}") from exc
    else:
        text = raw
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    if not rows:
        raise ValidationError("empty CSV")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise ValidationError("duplicate column names in header")
    data = rows[1:]
    if not data:
        raise ValidationError("no data rows")
    if len(data) < 2:
        raise ValidationError("need at least 2 data rows")
    ncols = len(header)
    for ri, row in enumerate(data):
        if len(row) != ncols:
            raise ValidationError(f"row {ri + 1} has {len(row)} cells, expected {ncols}")
        for ci, cell in enumerate(row):
            if cell.strip().lower() in _MISSING:
                raise ValidationError(
                    f"missing value in row {ri + 1}, column '{header[ci]}' (no imputation)"
                )

    label_idx: int | None = None
    if label_column is not None:
        if label_column not in header:
            raise ValidationError(f"label column '{label_column}' not found")
        label_idx = header.index(label_column)
    else:
        named = [ci for ci, h in enumerate(header) if h.lower() == "label"]
        if named:
            label_idx = named[0]

    # Classify remaining columns: all-numeric -> dimension, all-non-numeric ->
    # label fallback candidate, mixed -> error.
    numeric_cols: list[int] = []
    text_cols: list[int] = []
    columns: dict[int, np.ndarray] = {}
    for ci in range(ncols):
        if ci == label_idx:
            continue
        cells = [row[ci].strip() for row in data]
        vals = np.empty(len(cells))
        ok = True
        for ri, cell in enumerate(cells):
            try:
                vals[ri] = float(cell)
            except ValueError:
                ok = False
                first_bad = ri
                break
        if ok:
            if not np.isfinite(vals).all():
                bad = int(np.flatnonzero(~np.isfinite(vals))[0])
                raise ValidationError(f"non-finite value in row {bad + 1}, column '{header[ci]}'")
            numeric_cols.append(ci)
            columns[ci] = vals
        else:
            # Distinguish a stray bad cell from a wholly textual column.
            if any(_is_number(c) for c in cells):
                raise ValidationError(
                    f"non-numeric cell in row {first_bad + 1}, column '{header[ci]}'"
                )
            text_cols.append(ci)

    if label_idx is None and len(text_cols) == 1:
        label_idx = text_cols.pop()
    if text_cols:
        names = ", ".join(header[ci] for ci in text_cols)
        raise ValidationError(f"non-numeric column(s) with no label role: {names}")
    if not numeric_cols:
        raise ValidationError("no numeric columns")

    values = np.column_stack([columns[ci] for ci in numeric_cols])
    labels = None
    if label_idx is not None:
        labels = tuple(row[label_idx].strip() for row in data)
    return Dataset(values=values,
                   dim_names=tuple(header[ci] for ci in numeric_cols),
                   labels=labels)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False
