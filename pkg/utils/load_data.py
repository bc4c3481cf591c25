"""Throughput-trace ingestion: CSV -> windows of T timesteps with class labels.

Expected layout (one row per timestep, rows time-ordered inside each run)::

    run_num,seq_num,latitude,longitude,movingSpeed,...,nr_ssRsrq,Throughput
    0,0,44.97,-93.25,1.2,...,-11.0,512.3

Feature columns are taken from the schema, or inferred from the header as
every column other than the run, step and target columns.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import pandas as pd

from utils.errors import ArtifactError, ConfigError, ContractError, SchemaError, ShapeError

logger = logging.getLogger(__name__)

STD_FLOOR = 1e-8


@dataclass
class DatasetSchema:
    feature_columns: tuple[str, ...] = ()
    target_column: str = "Throughput"
    run_column: str = "run_num"
    step_column: str | None = "seq_num"
    timesteps: int = 20
    stride: int = 1
    n_classes: int = 8
    # fitted on the training split only
    mean: tuple[float, ...] | None = None
    std: tuple[float, ...] | None = None
    edges: tuple[float, ...] | None = None

    def __post_init__(self):
        self.feature_columns = tuple(self.feature_columns)
        if self.timesteps < 1 or self.stride < 1:
            raise ConfigError("timesteps and stride must be >= 1")
        if self.n_classes < 2:
            raise ConfigError("n_classes must be >= 2")
        for name in ("mean", "std", "edges"):
            value = getattr(self, name)
            if value is not None:
                setattr(self, name, tuple(float(v) for v in value))

    @property
    def n_features(self) -> int:
        return len(self.feature_columns)

    @property
    def fitted(self) -> bool:
        return self.mean is not None and self.std is not None and self.edges is not None

    def to_dict(self) -> dict:
        return {
            "feature_columns": list(self.feature_columns),
            "target_column": self.target_column,
            "run_column": self.run_column,
            "step_column": self.step_column,
            "timesteps": self.timesteps,
            "stride": self.stride,
            "n_classes": self.n_classes,
            "mean": list(self.mean) if self.mean is not None else None,
            "std": list(self.std) if self.std is not None else None,
            "edges": list(self.edges) if self.edges is not None else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetSchema":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown schema keys: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class SequenceWindow:
    inputs: np.ndarray    # (T, D)
    targets: np.ndarray   # (T,) class labels
    run: str
    start: int            # first source row


@dataclass
class WindowDataset:
    """Windows stored as stacked arrays; indexing yields SequenceWindow views."""

    inputs: np.ndarray                 # (N, T, D)
    throughput: np.ndarray             # (N, T) raw target values
    runs: np.ndarray                   # (N,) run identifiers
    starts: np.ndarray                 # (N,) first source row of each window
    schema: DatasetSchema
    labels: np.ndarray | None = None   # (N, T), set once quantized

    def __len__(self) -> int:
        return self.inputs.shape[0]

    def __getitem__(self, i: int) -> SequenceWindow:
        if self.labels is None:
            raise ContractError("dataset has no labels yet; quantize it first")
        return SequenceWindow(self.inputs[i], self.labels[i], str(self.runs[i]), int(self.starts[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def timesteps(self) -> int:
        return self.inputs.shape[1]

    def rows(self) -> np.ndarray:
        """(N, T) source row index covered by each window timestep."""
        return self.starts[:, None] + np.arange(self.timesteps)

    def subset(self, index) -> "WindowDataset":
        index = np.asarray(index, dtype=np.int64)
        return replace(
            self,
            inputs=self.inputs[index],
            throughput=self.throughput[index],
            runs=self.runs[index],
            starts=self.starts[index],
            labels=None if self.labels is None else self.labels[index],
        )


# ---- CSV reading ----

def read_frame(path, schema: DatasetSchema) -> tuple[pd.DataFrame, DatasetSchema]:
    """Read and validate the CSV; rows are regrouped so every run is contiguous."""
    path = Path(path)
    try:
        df = pd.read_csv(path)
    except FileNotFoundError as exc:
        raise ArtifactError("dataset not found", path) from exc
    df.columns = df.columns.str.strip()

    for col in (schema.run_column, schema.target_column, *schema.feature_columns):
        if col not in df.columns:
            raise SchemaError(f"missing column {col!r} in {path}", column=col)
    if not schema.feature_columns:
        reserved = {schema.run_column, schema.target_column, schema.step_column}
        schema = replace(schema, feature_columns=tuple(c for c in df.columns if c not in reserved))
        if not schema.feature_columns:
            raise SchemaError(f"no feature columns in {path}")

    for col in (*schema.feature_columns, schema.target_column):
        numeric = pd.to_numeric(df[col], errors="coerce")
        bad = numeric.isna() | ~np.isfinite(numeric.fillna(0.0))
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise SchemaError(f"non-numeric value in column {col!r} at row {row}", column=col, row=row)
        df[col] = numeric.astype(np.float64)

    df[schema.run_column] = df[schema.run_column].astype(str)
    codes, _ = pd.factorize(df[schema.run_column])
    df = df.iloc[np.argsort(codes, kind="stable")].reset_index(drop=True)
    return df, schema


def window_frame(df: pd.DataFrame, schema: DatasetSchema) -> WindowDataset:
    """Sliding windows of ``schema.timesteps`` rows inside each run, stride ``schema.stride``."""
    T = schema.timesteps
    features = df[list(schema.feature_columns)].to_numpy(dtype=np.float64)
    target = df[schema.target_column].to_numpy(dtype=np.float64)
    starts, runs = [], []
    for run, rows in df.groupby(schema.run_column, sort=False).indices.items():
        first, length = int(rows[0]), len(rows)
        if length < T:
            logger.debug("run %s has %d rows (< %d), no window", run, length, T)
            continue
        for offset in range(0, length - T + 1, schema.stride):
            starts.append(first + offset)
            runs.append(run)
    order = np.argsort(starts, kind="stable")
    starts = np.asarray(starts, dtype=np.int64)[order]
    runs = [runs[i] for i in order]
    idx = starts[:, None] + np.arange(T) if starts.size else np.zeros((0, T), dtype=np.int64)
    return WindowDataset(
        inputs=features[idx].reshape(len(starts), T, features.shape[1]),
        throughput=target[idx].reshape(len(starts), T),
        runs=np.asarray(runs, dtype=object),
        starts=starts,
        schema=schema,
    )


# ---- normalization and labels ----

def fit_edges(values, n_classes: int) -> np.ndarray:
    if n_classes < 2:
        raise ConfigError("n_classes must be >= 2")
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    return np.quantile(values, np.arange(1, n_classes) / n_classes)


def quantize_throughput(values, n_classes: int, edges=None) -> np.ndarray:
    """Quantile bins; edges default to the quantiles of ``values`` themselves.

    A value equal to an edge goes to the lower bin.
    """
    values = np.asarray(values, dtype=np.float64)
    edges = fit_edges(values, n_classes) if edges is None else np.asarray(edges, dtype=np.float64)
    if edges.size != n_classes - 1:
        raise ShapeError("quantization edges", (n_classes - 1,), edges.shape)
    return np.searchsorted(edges, values, side="left").astype(np.int64)


def fit_schema(df: pd.DataFrame, train: WindowDataset) -> DatasetSchema:
    """Normalization statistics and label edges from the rows of the training windows."""
    schema = train.schema
    rows = np.unique(train.rows())
    if rows.size == 0:
        raise ContractError("cannot fit normalization statistics on an empty training split")
    part = df.iloc[rows]
    mean = part[list(schema.feature_columns)].mean(axis=0).to_numpy()
    std = part[list(schema.feature_columns)].std(axis=0, ddof=0).to_numpy()
    edges = fit_edges(part[schema.target_column].to_numpy(), schema.n_classes)
    return replace(schema, mean=tuple(mean), std=tuple(std), edges=tuple(edges))


def apply_schema(data: WindowDataset, schema: DatasetSchema) -> WindowDataset:
    """z-score the inputs and quantize the throughput with fitted statistics."""
    if not schema.fitted:
        raise ContractError("schema has no fitted statistics; fit it on the training split first")
    mean = np.asarray(schema.mean)
    std = np.asarray(schema.std)
    scale = np.where(std > STD_FLOOR, std, 1.0)
    inputs = np.where(std > STD_FLOOR, (data.inputs - mean) / scale, 0.0)
    labels = quantize_throughput(data.throughput, schema.n_classes, edges=schema.edges)
    return replace(data, inputs=inputs, labels=labels, schema=schema)


def load_csv(path, schema: DatasetSchema) -> WindowDataset:
    """Windows of a CSV normalized and labelled with an already fitted schema."""
    df, schema = read_frame(path, schema)
    return apply_schema(window_frame(df, schema), schema)


# ---- train/test split ----

def split(data: WindowDataset, test_fraction: float = 0.1, seed: int = 0) -> tuple[WindowDataset, WindowDataset]:
    """Leakage-free split.

    When every run holds a single window, a seeded random choice of runs goes
    to the test split. Otherwise each run's final segment is the test split
    and training windows sharing rows with it are dropped.
    """
    if not 0 < test_fraction < 1:
        raise ConfigError("test_fraction must be in (0, 1)")
    n = len(data)
    if n < 2:
        raise ContractError(f"need at least 2 windows to split, got {n}")
    _, per_run = np.unique(data.runs.astype(str), return_counts=True)
    if per_run.max() == 1:
        n_test = min(n - 1, max(1, int(round(test_fraction * n))))
        rng = np.random.default_rng(seed)
        test_idx = np.sort(rng.choice(n, size=n_test, replace=False))
        train_idx = np.setdiff1d(np.arange(n), test_idx)
    else:
        test_parts, train_parts = [], []
        for run in pd.unique(data.runs):
            members = np.flatnonzero(data.runs == run)
            if members.size == 1:
                train_parts.append(members)
                continue
            members = members[np.argsort(data.starts[members], kind="stable")]
            n_tail = max(1, int(round(test_fraction * members.size)))
            tail = members[-n_tail:]
            first_test_row = data.starts[tail].min()
            head = members[:-n_tail]
            train_parts.append(head[data.starts[head] + data.timesteps <= first_test_row])
            test_parts.append(tail)
        train_idx = np.sort(np.concatenate(train_parts)) if train_parts else np.zeros(0, dtype=np.int64)
        test_idx = np.sort(np.concatenate(test_parts))
    logger.info("split %d windows into %d train / %d test", n, train_idx.size, test_idx.size)
    return data.subset(train_idx), data.subset(test_idx)


def prepare_dataset(path, schema: DatasetSchema, test_fraction: float = 0.1, seed: int = 0):
    """Read, window, split, then fit statistics on the training split and apply them to both."""
    df, schema = read_frame(path, schema)
    windows = window_frame(df, schema)
    if len(windows) == 0:
        raise ContractError(f"no run in {path} has {schema.timesteps} rows")
    train, test = split(windows, test_fraction, seed)
    fitted = fit_schema(df, train)
    return apply_schema(train, fitted), apply_schema(test, fitted), fitted
