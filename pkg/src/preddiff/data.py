"""Tabular data model: datasets, samples and feature-set algebra.

A feature set is an ordered, duplicate-free group of column indices that is
treated as a single attribution unit. Interaction measures require the sets
involved to be pairwise disjoint, which is enforced here rather than in every
caller.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaError

__all__ = ["FeatureSet", "Dataset", "as_sample", "load_csv"]


@dataclass(frozen=True)
class FeatureSet:
    """Sorted, unique, non-empty group of column indices."""

    indices: tuple[int, ...]

    def __init__(self, indices) -> None:
        idx = tuple(int(i) for i in (indices if hasattr(indices, "__iter__") else [indices]))
        if len(idx) == 0:
            raise SchemaError("a feature set must contain at least one column index")
        if any(i < 0 for i in idx):
            raise SchemaError(f"negative column index in feature set: {idx}")
        if len(set(idx)) != len(idx):
            raise SchemaError(f"duplicate column indices in feature set: {idx}")
        object.__setattr__(self, "indices", tuple(sorted(idx)))

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, i) -> bool:
        return int(i) in self.indices

    def intersects(self, other: "FeatureSet") -> bool:
        return bool(set(self.indices) & set(other.indices))

    def union(self, *others: "FeatureSet") -> "FeatureSet":
        merged: set[int] = set(self.indices)
        for o in others:
            merged.update(o.indices)
        return FeatureSet(sorted(merged))

    def complement(self, n_cols: int) -> tuple[int, ...]:
        """Indices of the columns NOT in this set, for a width-``n_cols`` schema."""
        self.validate_width(n_cols)
        member = set(self.indices)
        return tuple(i for i in range(n_cols) if i not in member)

    def validate_width(self, n_cols: int) -> None:
        if self.indices[-1] >= n_cols:
            raise SchemaError(
                f"feature set {self.indices} exceeds schema width {n_cols}"
            )

    @staticmethod
    def assert_disjoint(*sets: "FeatureSet") -> None:
        seen: set[int] = set()
        for s in sets:
            overlap = seen & set(s.indices)
            if overlap:
                raise SchemaError(f"feature sets overlap on columns {sorted(overlap)}")
            seen.update(s.indices)


@dataclass(frozen=True)
class Dataset:
    """Rectangular table of finite real feature values with named columns."""

    values: np.ndarray
    column_names: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise SchemaError(f"dataset values must be 2-D, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise SchemaError(f"non-finite value at row {bad[0]}, column {bad[1]}")
        names = self.column_names
        if not names:
            names = tuple(f"x{i}" for i in range(values.shape[1]))
        else:
            names = tuple(str(n) for n in names)
            if len(names) != values.shape[1]:
                raise SchemaError(
                    f"{len(names)} column names for {values.shape[1]} columns"
                )
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "column_names", names)
        self.values.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def column_index(self, name: str) -> int:
        try:
            return self.column_names.index(name)
        except ValueError:
            raise SchemaError(f"unknown column name: {name!r}") from None

    def row(self, i: int) -> np.ndarray:
        return np.array(self.values[i], dtype=float)


def as_sample(values, n_cols: int | None = None) -> np.ndarray:
    """Validate and copy a single feature vector.

    Raises:
        SchemaError: if the vector is not 1-D, not finite, or has the wrong width.
    """
    x = np.asarray(values, dtype=float)
    if x.ndim != 1:
        raise SchemaError(f"sample must be a 1-D vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise SchemaError("sample contains non-finite entries")
    if n_cols is not None and x.shape[0] != n_cols:
        raise SchemaError(f"sample has width {x.shape[0]}, schema expects {n_cols}")
    return x.copy()


def load_csv(path) -> Dataset:
    """Load a dataset from CSV.

    A header row is required, quoting follows RFC 4180 (handled by the stdlib
    reader), decimals use '.'. Any empty or non-numeric cell is a load error,
    missing values are not supported.
    """
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, header row required") from None
        if not header or all(not c.strip() for c in header):
            raise SchemaError(f"{path}: header row required")
        width = len(header)
        rows: list[list[float]] = []
        for lineno, record in enumerate(reader, start=2):
            if len(record) != width:
                raise SchemaError(
                    f"{path}: line {lineno} has {len(record)} fields, expected {width}"
                )
            parsed = []
            for col, cell in zip(header, record):
                text = cell.strip()
                if not text:
                    raise SchemaError(
                        f"{path}: missing value at line {lineno}, column {col!r}"
                    )
                try:
                    parsed.append(float(text))
                except ValueError:
                    raise SchemaError(
                        f"{path}: non-numeric value {cell!r} at line {lineno}, column {col!r}"
                    ) from None
            rows.append(parsed)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return Dataset(np.array(rows, dtype=float), tuple(h.strip() for h in header))
