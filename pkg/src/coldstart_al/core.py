"""Domain types and pool mechanics shared by every other module.

The two pools (unlabeled / labeled) are the central mutable state of a
streaming annotation run.  They are mutated only by the single-threaded
simulation loop of one run; everything handed to query policies (feature
matrices, fitted models) is read-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np


class DuplicateEventError(ValueError):
    """An event id was ingested into a pool that already holds it."""


class StaleQueryError(KeyError):
    """A query referenced an id that is no longer in the unlabeled pool."""


@dataclass(frozen=True)
class Event:
    """One raw stream record.

    ``_true_label`` is deliberately underscored: it is read exclusively by
    the labeling oracle in the simulation module.  Query policies receive
    events (or their feature vectors) but must never touch the label; the
    test suite audits this boundary.
    """

    event_id: str
    timestamp: int  # epoch milliseconds, non-decreasing within a stream
    entity_id: str
    amount: float
    categoricals: tuple[str, ...] = ()
    numericals: tuple[float, ...] = ()
    _true_label: int = field(default=0, repr=False)


@dataclass(frozen=True)
class FeatureVector:
    """Dense numeric representation of one event after preprocessing."""

    values: np.ndarray
    event_id: str

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"non-finite feature values for {self.event_id}")


@dataclass(frozen=True)
class QuerySet:
    """Ordered batch of unlabeled event ids chosen by a policy.

    ``scores`` carries the per-event policy score used for ranking; it is
    ``None`` for policies without a meaningful score (random, query-all).
    """

    event_ids: tuple[str, ...]
    scores: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if len(set(self.event_ids)) != len(self.event_ids):
            raise ValueError("query contains duplicate event ids")
        if self.scores is not None and len(self.scores) != len(self.event_ids):
            raise ValueError("scores not aligned with event ids")

    def __len__(self) -> int:
        return len(self.event_ids)


class PoolPair:
    """Growing unlabeled pool plus labeled pool with revealed labels.

    Events are indexed by id for O(1) membership checks and kept in
    insertion order so that ranking ties break deterministically by
    arrival.  An id lives in exactly one pool at any time.
    """

    def __init__(self) -> None:
        self._unlabeled: dict[str, tuple[Event, FeatureVector]] = {}
        self._labeled: dict[str, tuple[Event, FeatureVector, int]] = {}
        self._n_pos = 0
        self._n_neg = 0
        self._n_ingested = 0

    # -- ingestion and labeling ------------------------------------------

    def ingest(self, items: Iterable[tuple[Event, FeatureVector]]) -> None:
        """Append events to the unlabeled pool, preserving arrival order."""
        for event, fv in items:
            eid = event.event_id
            if eid in self._unlabeled or eid in self._labeled:
                raise DuplicateEventError(f"event id already ingested: {eid}")
            self._unlabeled[eid] = (event, fv)
            self._n_ingested += 1

    def move_to_labeled(self, query: QuerySet, labels: Sequence[int]) -> None:
        """Move queried events to the labeled pool with their labels attached."""
        if len(labels) != len(query.event_ids):
            raise ValueError("labels not aligned with query")
        for eid in query.event_ids:
            if eid not in self._unlabeled:
                raise StaleQueryError(f"id not in unlabeled pool: {eid}")
        for eid, label in zip(query.event_ids, labels):
            if label not in (0, 1):
                raise ValueError(f"label must be binary, got {label!r}")
            event, fv = self._unlabeled.pop(eid)
            self._labeled[eid] = (event, fv, int(label))
            if label:
                self._n_pos += 1
            else:
                self._n_neg += 1

    def label_counts(self) -> tuple[int, int]:
        """Exact (n_negative, n_positive) class counts of the labeled pool."""
        return self._n_neg, self._n_pos

    # -- sizes -----------------------------------------------------------

    @property
    def n_unlabeled(self) -> int:
        return len(self._unlabeled)

    @property
    def n_labeled(self) -> int:
        return len(self._labeled)

    @property
    def n_ingested(self) -> int:
        return self._n_ingested

    def __contains__(self, event_id: str) -> bool:
        return event_id in self._unlabeled or event_id in self._labeled

    # -- read-only views used by policies and training --------------------

    def unlabeled_ids(self) -> list[str]:
        return list(self._unlabeled.keys())

    def unlabeled_events(self) -> list[Event]:
        return [ev for ev, _ in self._unlabeled.values()]

    def unlabeled_matrix(self) -> np.ndarray:
        """Feature matrix of the unlabeled pool, rows in insertion order."""
        if not self._unlabeled:
            return np.empty((0, 0))
        return np.stack([fv.values for _, fv in self._unlabeled.values()])

    def labeled_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, y) of the labeled pool, rows in labeling order."""
        if not self._labeled:
            return np.empty((0, 0)), np.empty(0, dtype=np.int64)
        X = np.stack([fv.values for _, fv, _ in self._labeled.values()])
        y = np.array([lab for _, _, lab in self._labeled.values()], dtype=np.int64)
        return X, y

    def labeled_events(self) -> list[tuple[Event, int]]:
        return [(ev, lab) for ev, _, lab in self._labeled.values()]

    def events_for(self, event_ids: Sequence[str]) -> list[Event]:
        """Unlabeled events for the given ids (used to hand a query to the oracle)."""
        out = []
        for eid in event_ids:
            if eid not in self._unlabeled:
                raise StaleQueryError(f"id not in unlabeled pool: {eid}")
            out.append(self._unlabeled[eid][0])
        return out
