"""Dataset ingestion, temporal folds, entity undersampling, synthetic streams.

The synthetic generator stands in for production transaction feeds: a
heavily imbalanced binary stream whose positive class is drawn from a
shifted Gaussian mixture (difficulty controlled by the separation knob),
with entity reuse so sliding-window profiles are non-trivial.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Event
from .preprocess import DAY_MS, SchemaSpec

WEEK_MS = 7 * DAY_MS


class DatasetFormatError(ValueError):
    """A dataset file does not match the declared schema."""


class ColdStartWarning(UserWarning):
    """The generated stream may contain folds without a single positive."""


@dataclass(frozen=True)
class FoldData:
    """One train/test pair with explicit time boundaries.

    ``train_events`` end strictly before ``boundary_ms``; ``test_events``
    start at it.  Event lists are timestamp-ordered.
    """

    train_events: tuple[Event, ...]
    test_events: tuple[Event, ...]
    fold_index: int
    train_start_ms: int
    boundary_ms: int
    end_ms: int

    def __post_init__(self) -> None:
        if self.train_events and self.test_events:
            if self.train_events[-1].timestamp >= self.test_events[0].timestamp:
                raise ValueError("train events must precede test events")

    @property
    def train_span_ms(self) -> int:
        return self.boundary_ms - self.train_start_ms


def _sorted_events(events: Sequence[Event]) -> list[Event]:
    return sorted(events, key=lambda e: e.timestamp)


def make_fold(
    events: Sequence[Event],
    train_start_ms: int,
    boundary_ms: int,
    end_ms: int,
    fold_index: int = 0,
) -> FoldData:
    """Slice one fold out of a stream at explicit millisecond boundaries."""
    ordered = _sorted_events(events)
    train = tuple(e for e in ordered if train_start_ms <= e.timestamp < boundary_ms)
    test = tuple(e for e in ordered if boundary_ms <= e.timestamp < end_ms)
    return FoldData(
        train_events=train,
        test_events=test,
        fold_index=fold_index,
        train_start_ms=train_start_ms,
        boundary_ms=boundary_ms,
        end_ms=end_ms,
    )


def slice_folds(
    events: Sequence[Event],
    n_folds: int,
    stride_weeks: int = 4,
    train_weeks: int = 4,
    test_weeks: int = 4,
) -> list[FoldData]:
    """Sliding train/test folds; the default shape is 4 weeks + 4 weeks.

    Fold i starts at ``data start + i * stride``; the data must span the
    last fold entirely.
    """
    if not events:
        raise ValueError("no events to slice")
    ordered = _sorted_events(events)
    # anchor at the first event's midnight so day jitter cannot shave a window
    origin = (ordered[0].timestamp // DAY_MS) * DAY_MS
    days_covered = ordered[-1].timestamp // DAY_MS - origin // DAY_MS + 1
    fold_days = (train_weeks + test_weeks) * 7
    needed_days = fold_days + (n_folds - 1) * stride_weeks * 7
    if days_covered < needed_days:
        raise ValueError(
            f"data covers {days_covered} days; "
            f"{n_folds} folds at stride {stride_weeks} weeks need {needed_days:g}"
        )
    folds = []
    for i in range(n_folds):
        s = origin + int(round(i * stride_weeks * WEEK_MS))
        folds.append(
            make_fold(
                ordered,
                train_start_ms=s,
                boundary_ms=s + int(round(train_weeks * WEEK_MS)),
                end_ms=s + int(round(fold_days * DAY_MS)),
                fold_index=i,
            )
        )
    return folds


def undersample_entities(
    events: Sequence[Event], rate: float, seed: int = 0
) -> list[Event]:
    """Keep a random fraction of entities, sampled per class partition.

    Entities with at least one positive event and purely negative entities
    are sampled independently at the same rate, which preserves the
    positive rate in expectation; all events of a kept entity are kept, so
    entity histories stay complete.
    """
    if not 0.0 < rate <= 1.0:
        raise ValueError("rate must be in (0, 1]")
    if rate == 1.0:
        return list(events)
    has_positive: dict[str, bool] = {}
    for ev in events:
        has_positive[ev.entity_id] = has_positive.get(ev.entity_id, False) or bool(
            ev._true_label
        )
    rng = np.random.Generator(np.random.PCG64(seed))
    kept: set[str] = set()
    # iterate partitions separately so the draw count per class is stable
    for positive_class in (True, False):
        for entity in (e for e, pos in has_positive.items() if pos is positive_class):
            if rng.random() < rate:
                kept.add(entity)
    return [ev for ev in events if ev.entity_id in kept]


# ---------------------------------------------------------------------------
# synthetic stream generator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a synthetic imbalanced transaction stream."""

    positive_rate: float
    events_per_day: int
    n_entities: int
    weeks: int
    seed: int
    n_numericals: int = 6
    n_categoricals: int = 2
    n_categories: int = 8
    separation: float = 4.0  # distance between class means, in noise-sd units
    mixture_spread: float = 1.5  # offset of the two components within each class
    drift_per_week: float = 0.0
    amount_shift: float = 0.5  # added to log-amount for positives

    def __post_init__(self) -> None:
        if not 0.0 < self.positive_rate < 1.0:
            raise ValueError("positive_rate must be in (0, 1)")
        if self.events_per_day < 1 or self.n_entities < 1 or self.weeks < 1:
            raise ValueError("events_per_day, n_entities, weeks must be positive")

    def schema(self) -> SchemaSpec:
        return SchemaSpec(
            categorical_fields=tuple(f"cat_{i}" for i in range(self.n_categoricals)),
            numerical_fields=tuple(f"num_{i}" for i in range(self.n_numericals)),
        )


def synth_generate(spec: SynthSpec) -> list[Event]:
    """Deterministic synthetic stream; positives are mixture outliers."""
    n_days = 7 * spec.weeks
    total = spec.events_per_day * n_days
    expected_pos = spec.positive_rate * total
    if spec.positive_rate * spec.events_per_day * 7 < 1:
        warnings.warn(
            f"expected positives per week ({expected_pos / spec.weeks:.3f}) below 1; "
            "folds may contain no positive at all",
            ColdStartWarning,
            stacklevel=2,
        )
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    d = spec.n_numericals

    # fixed class geometry for this spec
    direction = rng.normal(size=d)
    direction /= np.linalg.norm(direction)
    spread_dir = rng.normal(size=d)
    spread_dir -= spread_dir @ direction * direction
    spread_dir /= np.linalg.norm(spread_dir)
    drift_dir = rng.normal(size=d)
    drift_dir /= np.linalg.norm(drift_dir)

    # per-class category distributions, skewed differently per class
    cat_probs = []
    for _ in range(spec.n_categoricals):
        base = rng.dirichlet(np.ones(spec.n_categories) * 2.0)
        skew = rng.dirichlet(np.ones(spec.n_categories) * 0.7)
        cat_probs.append((base, 0.5 * base + 0.5 * skew))

    timestamps = np.empty(total, dtype=np.int64)
    for day in range(n_days):
        lo = day * DAY_MS
        within = np.sort(rng.integers(0, DAY_MS, size=spec.events_per_day))
        timestamps[day * spec.events_per_day : (day + 1) * spec.events_per_day] = (
            lo + within
        )

    labels = (rng.random(total) < spec.positive_rate).astype(np.int64)
    entities = rng.integers(0, spec.n_entities, size=total)
    component = rng.integers(0, 2, size=total) * 2 - 1  # -1 or +1
    noise = rng.normal(size=(total, d))
    week_idx = timestamps // WEEK_MS

    means = (
        labels[:, None] * spec.separation * direction[None, :]
        + component[:, None] * spec.mixture_spread * spread_dir[None, :]
        + (spec.drift_per_week * week_idx)[:, None] * drift_dir[None, :]
    )
    numericals = means + noise

    log_amount = rng.normal(loc=3.0, scale=1.0, size=total) + spec.amount_shift * labels
    amounts = np.exp(log_amount)

    cat_draws = np.empty((total, spec.n_categoricals), dtype=np.int64)
    for j, (p_neg, p_pos) in enumerate(cat_probs):
        u = rng.random(total)
        neg_cdf = np.cumsum(p_neg)
        pos_cdf = np.cumsum(p_pos)
        cat_draws[:, j] = np.where(
            labels == 1,
            np.searchsorted(pos_cdf, u, side="right"),
            np.searchsorted(neg_cdf, u, side="right"),
        ).clip(0, spec.n_categories - 1)

    width = len(str(total))
    events = []
    for i in range(total):
        events.append(
            Event(
                event_id=f"ev{i:0{width}d}",
                timestamp=int(timestamps[i]),
                entity_id=f"ent{entities[i]:06d}",
                amount=float(amounts[i]),
                categoricals=tuple(f"c{v}" for v in cat_draws[i]),
                numericals=tuple(float(v) for v in numericals[i]),
                _true_label=int(labels[i]),
            )
        )
    return events


#: Order-of-magnitude positive-rate presets mirroring common fraud feeds.
SYNTH_PRESETS: dict[str, SynthSpec] = {
    "bank1-like": SynthSpec(
        positive_rate=1e-4, events_per_day=4000, n_entities=800, weeks=2, seed=101
    ),
    "bank2-like": SynthSpec(
        positive_rate=1e-3, events_per_day=2000, n_entities=600, weeks=2, seed=102
    ),
    "processor-like": SynthSpec(
        positive_rate=1e-2, events_per_day=1500, n_entities=500, weeks=2, seed=103
    ),
    "merchant-like": SynthSpec(
        positive_rate=1e-2, events_per_day=1000, n_entities=300, weeks=2, seed=104
    ),
}


# ---------------------------------------------------------------------------
# CSV interface
# ---------------------------------------------------------------------------


def load_csv(path, schema: SchemaSpec) -> list[Event]:
    """Parse the canonical CSV layout into timestamp-sorted events.

    Required columns: the schema's id/timestamp/entity/amount/label fields
    plus its categorical and numerical fields.  Labels must be 0 or 1.
    """
    events = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        required = [
            schema.event_id_field,
            schema.timestamp_field,
            schema.entity_field,
            schema.amount_field,
            schema.label_field,
            *schema.categorical_fields,
            *schema.numerical_fields,
        ]
        missing = [c for c in required if c not in header]
        if missing:
            raise DatasetFormatError(f"missing columns: {', '.join(missing)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                label_raw = row[schema.label_field].strip()
                if label_raw not in ("0", "1"):
                    raise ValueError(f"label must be 0 or 1, got {label_raw!r}")
                events.append(
                    Event(
                        event_id=row[schema.event_id_field],
                        timestamp=int(row[schema.timestamp_field]),
                        entity_id=row[schema.entity_field],
                        amount=float(row[schema.amount_field]),
                        categoricals=tuple(
                            row[c] for c in schema.categorical_fields
                        ),
                        numericals=tuple(
                            float(row[c]) for c in schema.numerical_fields
                        ),
                        _true_label=int(label_raw),
                    )
                )
            except (ValueError, KeyError) as exc:
                raise DatasetFormatError(f"line {lineno}: {exc}") from exc
    events.sort(key=lambda e: e.timestamp)  # stable for equal timestamps
    return events


def write_csv(events: Sequence[Event], path, schema: SchemaSpec) -> None:
    """Write events in the canonical CSV layout (UTF-8, comma-delimited)."""
    header = [
        schema.event_id_field,
        schema.timestamp_field,
        schema.entity_field,
        schema.amount_field,
        *schema.categorical_fields,
        *schema.numerical_fields,
        schema.label_field,
    ]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for ev in events:
            writer.writerow(
                [
                    ev.event_id,
                    ev.timestamp,
                    ev.entity_id,
                    repr(ev.amount),
                    *ev.categoricals,
                    *[repr(v) for v in ev.numericals],
                    ev._true_label,
                ]
            )
