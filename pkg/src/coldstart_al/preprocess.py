"""Day-one unsupervised preprocessing: encoding, standardization, PCA.

The pipeline is fitted once on the waiting-period sample and then frozen
for the rest of the run.  Each categorical field contributes two numeric
columns (ordinal code by first appearance, relative frequency in the fit
sample); every column is standardized to zero mean / unit variance on the
sample before the PCA projection.

Sliding per-entity profile aggregates (event count and amount sum over
1 h / 24 h windows) stand in for schema-driven automatic feature
engineering.  They are plain numeric columns computed during ingestion
and passed alongside the raw events.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import Event, FeatureVector

HOUR_MS = 3_600_000
DAY_MS = 86_400_000

PROFILE_COLUMNS = (
    "prof_count_1h",
    "prof_amount_1h",
    "prof_count_24h",
    "prof_amount_24h",
)

UNSEEN_ORDINAL = -1.0


@dataclass(frozen=True)
class SchemaSpec:
    """Declares which raw fields exist and what role each plays."""

    categorical_fields: tuple[str, ...] = ()
    numerical_fields: tuple[str, ...] = ()
    entity_field: str = "entity_id"
    timestamp_field: str = "timestamp_ms"
    label_field: str = "label"
    amount_field: str = "amount"
    event_id_field: str = "event_id"

    def __post_init__(self) -> None:
        names = (
            list(self.categorical_fields)
            + list(self.numerical_fields)
            + [
                self.entity_field,
                self.timestamp_field,
                self.label_field,
                self.amount_field,
                self.event_id_field,
            ]
        )
        if len(set(names)) != len(names):
            raise ValueError("schema field names must be disjoint")
        if not self.label_field or not self.timestamp_field:
            raise ValueError("label and timestamp fields are mandatory")


class EntityProfiler:
    """Streaming per-entity aggregates over trailing 1 h and 24 h windows.

    ``update`` must be called in timestamp order; the window includes the
    current event, so counts are always >= 1.
    """

    def __init__(self) -> None:
        self._win1: dict[str, deque] = defaultdict(deque)
        self._win24: dict[str, deque] = defaultdict(deque)
        self._sum1: dict[str, float] = defaultdict(float)
        self._sum24: dict[str, float] = defaultdict(float)

    def update(self, event: Event) -> np.ndarray:
        key = event.entity_id
        ts = event.timestamp
        for win, total, horizon in (
            (self._win1, self._sum1, HOUR_MS),
            (self._win24, self._sum24, DAY_MS),
        ):
            dq = win[key]
            dq.append((ts, event.amount))
            total[key] += event.amount
            while dq and dq[0][0] <= ts - horizon:
                old_ts, old_amount = dq.popleft()
                total[key] -= old_amount
        return np.array(
            [
                len(self._win1[key]),
                self._sum1[key],
                len(self._win24[key]),
                self._sum24[key],
            ],
            dtype=np.float64,
        )


def profile_stream(events: Sequence[Event]) -> np.ndarray:
    """Profile rows for a timestamp-ordered event sequence, shape (n, 4)."""
    profiler = EntityProfiler()
    if not events:
        return np.empty((0, len(PROFILE_COLUMNS)))
    return np.stack([profiler.update(ev) for ev in events])


def _raw_row(
    event: Event,
    schema: SchemaSpec,
    ordinal_maps: Sequence[dict],
    freq_maps: Sequence[dict],
    profile: Optional[np.ndarray],
) -> np.ndarray:
    row = [event.amount]
    row.extend(event.numericals)
    if profile is not None:
        row.extend(profile)
    for i, value in enumerate(event.categoricals):
        row.append(ordinal_maps[i].get(value, UNSEEN_ORDINAL))
        row.append(freq_maps[i].get(value, 0.0))
    return np.asarray(row, dtype=np.float64)


@dataclass
class Pipeline:
    """Frozen encode -> standardize -> project transformer.

    All arrays are marked read-only after the fit; a fitted pipeline can be
    shared across parallel runs.
    """

    schema: SchemaSpec
    column_names: tuple[str, ...]
    ordinal_maps: tuple[dict, ...]
    freq_maps: tuple[dict, ...]
    scale_mean: np.ndarray
    scale_std: np.ndarray
    pca_mean: np.ndarray
    components: np.ndarray  # (k, d) orthonormal rows
    explained_variance_fraction: np.ndarray  # (k,) non-increasing, sums to <= 1
    output_dim: int
    includes_profiles: bool

    def __post_init__(self) -> None:
        for arr in (
            self.scale_mean,
            self.scale_std,
            self.pca_mean,
            self.components,
            self.explained_variance_fraction,
        ):
            arr.flags.writeable = False

    # -- matrix-level paths ------------------------------------------------

    def raw_matrix(
        self, events: Sequence[Event], profiles: Optional[np.ndarray] = None
    ) -> np.ndarray:
        self._check_profiles(events, profiles)
        rows = [
            _raw_row(
                ev,
                self.schema,
                self.ordinal_maps,
                self.freq_maps,
                profiles[i] if profiles is not None else None,
            )
            for i, ev in enumerate(events)
        ]
        return np.stack(rows) if rows else np.empty((0, len(self.column_names)))

    def standardize(self, raw: np.ndarray) -> np.ndarray:
        return (raw - self.scale_mean) / self.scale_std

    def project(self, standardized: np.ndarray) -> np.ndarray:
        return (standardized - self.pca_mean) @ self.components.T

    def transform_matrix(
        self, events: Sequence[Event], profiles: Optional[np.ndarray] = None
    ) -> np.ndarray:
        return self.project(self.standardize(self.raw_matrix(events, profiles)))

    def transform(
        self, event: Event, profile: Optional[np.ndarray] = None
    ) -> FeatureVector:
        mat = self.transform_matrix(
            [event], None if profile is None else np.atleast_2d(profile)
        )
        return FeatureVector(values=mat[0], event_id=event.event_id)

    def _check_profiles(self, events, profiles) -> None:
        if self.includes_profiles and profiles is None:
            raise ValueError("pipeline was fitted with profile columns; none given")
        if not self.includes_profiles and profiles is not None:
            raise ValueError("pipeline was fitted without profile columns")
        if profiles is not None and len(profiles) != len(events):
            raise ValueError("profiles not aligned with events")


def fit_pipeline(
    sample: Sequence[Event],
    schema: SchemaSpec,
    k: Optional[int] = None,
    variance_target: Optional[float] = None,
    profiles: Optional[np.ndarray] = None,
) -> Pipeline:
    """Fit encoders, scaler, and PCA basis on a waiting-period sample.

    Exactly one of ``k`` (explicit output dimension) or ``variance_target``
    (smallest dimension whose explained-variance fractions reach the
    target) must be given.
    """
    if not sample:
        raise ValueError("cannot fit preprocessing on an empty sample")
    if (k is None) == (variance_target is None):
        raise ValueError("specify exactly one of k or variance_target")
    if profiles is not None and len(profiles) != len(sample):
        raise ValueError("profiles not aligned with sample")

    n_cats = len(schema.categorical_fields)
    ordinal_maps: list[dict] = [dict() for _ in range(n_cats)]
    counts: list[dict] = [defaultdict(int) for _ in range(n_cats)]
    for ev in sample:
        if len(ev.categoricals) != n_cats:
            raise ValueError("event categoricals do not match schema")
        for i, value in enumerate(ev.categoricals):
            if value not in ordinal_maps[i]:
                ordinal_maps[i][value] = len(ordinal_maps[i])  # first-appearance order
            counts[i][value] += 1
    n = len(sample)
    freq_maps = tuple({v: c / n for v, c in counter.items()} for counter in counts)

    column_names = ["amount", *schema.numerical_fields]
    if profiles is not None:
        column_names.extend(PROFILE_COLUMNS)
    for name in schema.categorical_fields:
        column_names.extend((f"{name}_ordinal", f"{name}_freq"))

    raw = np.stack(
        [
            _raw_row(
                ev,
                schema,
                ordinal_maps,
                freq_maps,
                profiles[i] if profiles is not None else None,
            )
            for i, ev in enumerate(sample)
        ]
    )
    if raw.shape[1] != len(column_names):
        raise ValueError("event numericals do not match schema")

    mean = raw.mean(axis=0)
    std = raw.std(axis=0)
    std = np.where(std > 0.0, std, 1.0)  # zero-variance column becomes constant 0
    Z = (raw - mean) / std

    pca_mean = Z.mean(axis=0)
    Zc = Z - pca_mean
    cov = Zc.T @ Zc / n
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.maximum(eigvals[order], 0.0)
    basis = eigvecs[:, order].T  # rows are components
    # deterministic sign: largest-magnitude coordinate of each row is positive
    flip = np.sign(basis[np.arange(len(basis)), np.argmax(np.abs(basis), axis=1)])
    flip = np.where(flip == 0.0, 1.0, flip)
    basis = basis * flip[:, None]

    total_var = eigvals.sum()
    fractions = eigvals / total_var if total_var > 0 else np.zeros_like(eigvals)

    d = raw.shape[1]
    if k is not None:
        if not 1 <= k <= d:
            raise ValueError(f"k={k} exceeds available dimension {d}")
        out_dim = k
    else:
        if not 0.0 < variance_target <= 1.0:
            raise ValueError("variance_target must be in (0, 1]")
        reached = np.cumsum(fractions) >= variance_target - 1e-12
        out_dim = int(np.argmax(reached)) + 1 if reached.any() else d

    return Pipeline(
        schema=schema,
        column_names=tuple(column_names),
        ordinal_maps=tuple(ordinal_maps),
        freq_maps=freq_maps,
        scale_mean=mean,
        scale_std=std,
        pca_mean=pca_mean,
        components=np.ascontiguousarray(basis[:out_dim]),
        explained_variance_fraction=fractions[:out_dim].copy(),
        output_dim=out_dim,
        includes_profiles=profiles is not None,
    )
