"""Ingestion, encoding and partitioning of the adult autism-screening table.

Records are split into training / selection / testing blocks *before* rows with
missing cells are dropped, so the partition sizes are a function of the full
row count alone. Dropped rows are kept in the encoded matrix but marked
``Subset.UNUSED``.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

log = logging.getLogger(__name__)

BINARY_SCORE = "binary-score"
NUMERIC = "numeric"
CATEGORICAL = "categorical"
BINARY_FLAG = "binary-flag"
TARGET = "target"
KINDS = (BINARY_SCORE, NUMERIC, CATEGORICAL, BINARY_FLAG, TARGET)

BINARY_TOKENS = {
    "no": 0, "0": 0, "f": 0, "NO": 0,
    "yes": 1, "1": 1, "m": 1, "YES": 1,
}
TARGET_TOKENS = {"NO": 0, "YES": 1}

# The UCI distribution misspells this column.
HEADER_ALIASES = {"contry_of_res": "country_of_res"}


class DataError(ValueError):
    """Malformed or unusable input data."""


class Subset(str, Enum):
    TRAINING = "training"
    SELECTION = "selection"
    TESTING = "testing"
    UNUSED = "unused"


USED_SUBSETS = (Subset.TRAINING, Subset.SELECTION, Subset.TESTING)


@dataclass(frozen=True)
class Schema:
    columns: tuple[tuple[str, str], ...]
    missing_token: str = "?"
    # Columns accepted in the header but not fed to the model.
    ignored: tuple[str, ...] = ()

    def __post_init__(self):
        names = [name for name, _ in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("schema column names must be unique")
        for name, kind in self.columns:
            if kind not in KINDS:
                raise ValueError(f"column {name!r}: unknown kind {kind!r}")
        if sum(kind == TARGET for _, kind in self.columns) != 1:
            raise ValueError("schema needs exactly one target column")
        if set(self.ignored) & set(names):
            raise ValueError("ignored columns overlap schema columns")

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.columns]

    @property
    def target(self) -> str:
        return next(name for name, kind in self.columns if kind == TARGET)

    @property
    def predictors(self) -> list[tuple[str, str]]:
        return [(n, k) for n, k in self.columns if k != TARGET]

    def without(self, *names: str) -> "Schema":
        """Schema with ``names`` moved to the ignored list."""
        cols = tuple((n, k) for n, k in self.columns if n not in names)
        return Schema(cols, self.missing_token, self.ignored + tuple(names))

    def to_dict(self) -> dict:
        return {
            "columns": [[n, k] for n, k in self.columns],
            "missing_token": self.missing_token,
            "ignored": list(self.ignored),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Schema":
        return cls(
            tuple((n, k) for n, k in d["columns"]),
            d.get("missing_token", "?"),
            tuple(d.get("ignored", ())),
        )


DEFAULT_SCHEMA = Schema(
    tuple((f"A{i}_Score", BINARY_SCORE) for i in range(1, 11))
    + (
        ("age", NUMERIC),
        ("gender", CATEGORICAL),
        ("ethnicity", CATEGORICAL),
        ("jundice", BINARY_FLAG),
        ("austim", BINARY_FLAG),
        ("country_of_res", CATEGORICAL),
        ("used_app_before", BINARY_FLAG),
        ("result", NUMERIC),
        ("age_desc", CATEGORICAL),
        ("relation", CATEGORICAL),
        ("Class/ASD", TARGET),
    )
)


@dataclass
class RawTable:
    header: list[str]
    rows: list[list[Optional[str]]]
    n_missing_rows: int = 0

    def has_missing(self, i: int) -> bool:
        return any(cell is None for cell in self.rows[i])


def parse_csv(path, schema: Schema = DEFAULT_SCHEMA) -> RawTable:
    """Read a comma-separated file into a RawTable ordered like ``schema``.

    Header order may differ from the schema; columns listed in
    ``schema.ignored`` are read and discarded. Cells equal to the missing
    token or empty become ``None``.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            lines = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise DataError(f"{path}: no header line")

    header = [HEADER_ALIASES.get(h.strip(), h.strip()) for h in lines[0]]
    wanted = set(schema.names)
    allowed = wanted | set(schema.ignored)
    unexpected = [h for h in header if h not in allowed]
    absent = [n for n in schema.names if n not in header]
    if unexpected or absent or len(set(header)) != len(header):
        raise DataError(
            f"{path}: header does not match schema "
            f"(unexpected: {unexpected}, missing: {absent})"
        )
    index = [header.index(n) for n in schema.names]

    rows = []
    n_missing = 0
    for lineno, cells in enumerate(lines[1:], start=2):
        if not cells:
            continue
        if len(cells) != len(header):
            raise DataError(
                f"{path}:{lineno}: expected {len(header)} cells, got {len(cells)}"
            )
        row = []
        for j in index:
            cell = cells[j].strip()
            row.append(None if cell in ("", schema.missing_token) else cell)
        n_missing += any(c is None for c in row)
        rows.append(row)
    return RawTable(list(schema.names), rows, n_missing)


def split(n: int, seed: int) -> np.ndarray:
    """Assign ``n`` rows to training / selection / testing.

    Selection and testing each get ``floor(0.2 n)`` rows, training the rest.
    Rows are shuffled with ``seed`` and cut into contiguous blocks.
    """
    if n < 3:
        raise DataError(f"need at least 3 instances to split, got {n}")
    k = int(math.floor(0.2 * n))
    n_train = n - 2 * k
    order = np.random.default_rng(seed).permutation(n)
    out = np.empty(n, dtype=object)
    out[order[:n_train]] = Subset.TRAINING
    out[order[n_train:n_train + k]] = Subset.SELECTION
    out[order[n_train + k:]] = Subset.TESTING
    return out


@dataclass
class ScalingParams:
    mean: dict[str, float] = field(default_factory=dict)
    std_dev: dict[str, float] = field(default_factory=dict)

    def apply(self, name: str, x):
        x = np.asarray(x, dtype=float)
        sd = self.std_dev[name]
        if sd == 0:
            return np.where(np.isnan(x), np.nan, 0.0)
        return (x - self.mean[name]) / sd


@dataclass
class Encoder:
    """Fitted column transforms; everything needed to encode a raw row."""

    schema: Schema
    categories: dict[str, list[str]]
    scaling: ScalingParams
    token_maps: dict[str, dict[str, int]] = field(default_factory=dict)

    @property
    def feature_names(self) -> list[str]:
        names = []
        for col, kind in self.schema.predictors:
            if kind == CATEGORICAL:
                cats = self.categories[col]
                if len(cats) <= 2:
                    names.append(col if len(cats) < 2 else f"{col}={cats[1]}")
                else:
                    names.extend(f"{col}={c}" for c in cats)
            else:
                names.append(col)
        return names

    def _column(self, col, kind, values, rows_for_errors):
        """Encode one column; returns an (n, k) block (NaN where missing)."""
        n = len(values)
        if kind in (BINARY_SCORE, BINARY_FLAG):
            tokens = self.token_maps.get(col, BINARY_TOKENS)
            out = np.full((n, 1), np.nan)
            for i, v in enumerate(values):
                if v is None:
                    continue
                if v not in tokens:
                    raise DataError(
                        f"column {col!r}, row {rows_for_errors[i]}: "
                        f"unknown token {v!r}"
                    )
                out[i, 0] = tokens[v]
            return out
        if kind == NUMERIC:
            raw = np.full(n, np.nan)
            for i, v in enumerate(values):
                if v is None:
                    continue
                try:
                    raw[i] = float(v)
                except ValueError:
                    raise DataError(
                        f"column {col!r}, row {rows_for_errors[i]}: "
                        f"not a number {v!r}"
                    ) from None
            return self.scaling.apply(col, raw).reshape(n, 1) if n else raw.reshape(0, 1)
        # categorical
        cats = self.categories[col]
        lookup = {c: j for j, c in enumerate(cats)}
        width = len(cats) if len(cats) > 2 else 1
        out = np.full((n, width), np.nan)
        for i, v in enumerate(values):
            if v is None:
                continue
            if v not in lookup:
                raise DataError(
                    f"column {col!r}, row {rows_for_errors[i]}: "
                    f"unseen category {v!r}"
                )
            if len(cats) == 1:
                out[i, 0] = 0.0
            elif len(cats) == 2:
                out[i, 0] = float(lookup[v])
            else:
                out[i] = 0.0
                out[i, lookup[v]] = 1.0
        return out

    def transform(self, rows: Sequence[Sequence[Optional[str]]], first_row: int = 1) -> np.ndarray:
        """Encode predictor cells of ``rows`` (schema order, target included)."""
        names = self.schema.names
        blocks = []
        row_ids = list(range(first_row, first_row + len(rows)))
        for col, kind in self.schema.predictors:
            j = names.index(col)
            blocks.append(self._column(col, kind, [r[j] for r in rows], row_ids))
        if not blocks:
            return np.empty((len(rows), 0))
        return np.hstack(blocks)

    def to_dict(self) -> dict:
        return {
            "schema": self.schema.to_dict(),
            "categories": self.categories,
            "token_maps": self.token_maps,
            "scaling": {
                name: [format(self.scaling.mean[name], ".17g"),
                       format(self.scaling.std_dev[name], ".17g")]
                for name in self.scaling.mean
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Encoder":
        scaling = ScalingParams(
            {k: float(v[0]) for k, v in d["scaling"].items()},
            {k: float(v[1]) for k, v in d["scaling"].items()},
        )
        return cls(
            Schema.from_dict(d["schema"]),
            {k: list(v) for k, v in d["categories"].items()},
            scaling,
            {k: dict(v) for k, v in d.get("token_maps", {}).items()},
        )


def fit_encoder(raw: RawTable, schema: Schema, assignment) -> Encoder:
    """Learn category orders (full table) and scaling (complete training rows)."""
    names = schema.names
    complete_train = [
        i for i in range(len(raw.rows))
        if assignment[i] == Subset.TRAINING and not raw.has_missing(i)
    ]
    categories = {}
    scaling = ScalingParams()
    token_maps = {}
    for col, kind in schema.predictors:
        j = names.index(col)
        if kind == CATEGORICAL:
            cats = sorted({r[j] for r in raw.rows if r[j] is not None})
            if len(cats) == 1:
                log.warning("column %r has a single category %r; encoded as constant 0",
                            col, cats[0])
            categories[col] = cats
        elif kind == NUMERIC:
            vals = []
            for i in complete_train:
                try:
                    vals.append(float(raw.rows[i][j]))
                except ValueError:
                    raise DataError(
                        f"column {col!r}, row {i + 1}: not a number {raw.rows[i][j]!r}"
                    ) from None
            arr = np.asarray(vals, dtype=float)
            scaling.mean[col] = float(arr.mean()) if arr.size else 0.0
            scaling.std_dev[col] = float(arr.std()) if arr.size else 0.0
        else:
            token_maps[col] = dict(BINARY_TOKENS)
    return Encoder(schema, categories, scaling, token_maps)


@dataclass(frozen=True)
class EncodedDataset:
    X: np.ndarray
    y: np.ndarray
    subset: np.ndarray
    feature_names: list[str]
    encoder: Optional[Encoder] = None
    # Split assignment before rows with missing cells were marked unused.
    original_subset: Optional[np.ndarray] = None

    @property
    def scaling(self) -> Optional[ScalingParams]:
        return self.encoder.scaling if self.encoder else None

    @classmethod
    def from_arrays(cls, X, y, subset, feature_names=None) -> "EncodedDataset":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        subset = np.asarray([Subset(s) for s in subset], dtype=object)
        if feature_names is None:
            feature_names = [f"x{j}" for j in range(X.shape[1])]
        return cls(X, y, subset, list(feature_names), None, subset.copy())

    def mask(self, subset: Subset) -> np.ndarray:
        return np.array([s == subset for s in self.subset], dtype=bool)

    def rows(self, subset: Subset) -> tuple[np.ndarray, np.ndarray]:
        m = self.mask(subset)
        return self.X[m], self.y[m]

    def class_counts(self, subset: Subset) -> tuple[int, int]:
        """(n_negative, n_positive) among the used rows of ``subset``."""
        _, y = self.rows(subset)
        return int((y == 0).sum()), int((y == 1).sum())

    def n_missing_dropped(self, subset: Subset) -> int:
        if self.original_subset is None:
            return 0
        return int(sum(
            1 for o, s in zip(self.original_subset, self.subset)
            if o == subset and s == Subset.UNUSED
        ))

    def summary(self) -> list[dict]:
        rows = []
        for s in USED_SUBSETS:
            neg, pos = self.class_counts(s)
            rows.append({
                "subset": s.value,
                "n": neg + pos,
                "n_positive": pos,
                "n_negative": neg,
                "n_missing_dropped": self.n_missing_dropped(s),
            })
        return rows


def encode(raw: RawTable, schema: Schema, assignment, encoder: Optional[Encoder] = None) -> EncodedDataset:
    """Encode ``raw`` into a numeric design matrix.

    Binary columns use ``BINARY_TOKENS``. Categorical columns with three or
    more categories are one-hot encoded in lexicographic category order; two
    categories collapse to one 0/1 feature and a single category to a
    constant 0 feature. Numeric columns are standardized with statistics from
    complete training rows. Rows with a missing cell become ``Subset.UNUSED``.
    Pass ``encoder`` to reuse fitted transforms instead of fitting new ones.
    """
    if len(assignment) != len(raw.rows):
        raise ValueError(
            f"assignment has {len(assignment)} entries for {len(raw.rows)} rows"
        )
    assignment = np.asarray([Subset(s) for s in assignment], dtype=object)
    if encoder is None:
        encoder = fit_encoder(raw, schema, assignment)
    X = encoder.transform(raw.rows, first_row=2)

    tj = schema.names.index(schema.target)
    y = np.full(len(raw.rows), np.nan)
    for i, row in enumerate(raw.rows):
        v = row[tj]
        if v is None:
            continue
        if v not in TARGET_TOKENS:
            raise DataError(f"column {schema.target!r}, row {i + 2}: unknown token {v!r}")
        y[i] = TARGET_TOKENS[v]

    subset = assignment.copy()
    for i in range(len(raw.rows)):
        if raw.has_missing(i):
            log.debug("row %d (%s) has missing cells; marked unused", i + 2, assignment[i].value)
            subset[i] = Subset.UNUSED
    return EncodedDataset(X, y, subset, encoder.feature_names, encoder, assignment)


def load(path, seed: int, schema: Schema = DEFAULT_SCHEMA) -> EncodedDataset:
    """parse_csv -> split -> encode in one call."""
    raw = parse_csv(path, schema)
    return encode(raw, schema, split(len(raw.rows), seed))
