"""Streaming annotation loop: clock, ingestion, oracle, training, evaluation.

One run replays the tail of a fold's train period as a stream.  After a
one-day waiting period (used to fit the frozen preprocessing pipeline)
the loop iterates: the active policy selects a batch, the oracle reveals
its labels, the clock advances by ``batch_size / review_rate`` days, the
events that arrived in that interval join the unlabeled pool, and a fresh
iteration model is trained and evaluated on the held-out test period.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .core import Event, FeatureVector, PoolPair
from .data import FoldData
from .evaluation import recall_at_fpr
from .models import RandomForest
from .policies import SEQUENCES, SequenceSpec, SequenceState
from .preprocess import DAY_MS, Pipeline, SchemaSpec, fit_pipeline, profile_stream


def derive_seed(*parts) -> int:
    """Stable child seed from a tuple of integers / strings."""
    ints = []
    for p in parts:
        if isinstance(p, str):
            ints.extend(p.encode("utf-8"))
        else:
            ints.append(int(p) & 0xFFFFFFFF)
    return int(np.random.SeedSequence(ints).generate_state(1)[0])


class Oracle:
    """The single reader of hidden labels; keeps the labeling cost ledger."""

    def __init__(self) -> None:
        self.revealed_ids: list[str] = []

    def reveal(self, events: Sequence[Event]) -> list[int]:
        labels = [int(ev._true_label) for ev in events]
        self.revealed_ids.extend(ev.event_id for ev in events)
        return labels

    @property
    def count(self) -> int:
        return len(self.revealed_ids)


@dataclass
class BudgetClock:
    """Review-rate clock: labeling a batch consumes batch/rate days."""

    review_rate_per_day: float
    batch_size: int
    current_time_ms: int

    @property
    def interval_ms(self) -> int:
        return int(round(self.batch_size / self.review_rate_per_day * DAY_MS))

    def advance(self, limit_ms: int) -> int:
        self.current_time_ms = min(self.current_time_ms + self.interval_ms, limit_ms)
        return self.current_time_ms


@dataclass(frozen=True)
class ModelSpec:
    n_trees: int = 200
    max_depth: int = 3


@dataclass(frozen=True)
class MetricSpec:
    name: str = "recall_at_fpr"
    alpha: float = 0.01

    @property
    def label(self) -> str:
        return f"{self.name}:{self.alpha:g}"


@dataclass(frozen=True)
class RunConfig:
    """All knobs of one streaming run."""

    sequence_id: str = "random_odal_entropy"
    batch_size: int = 100
    review_rate_per_day: float = 1000.0
    waiting_days: float = 1.0
    al_window_days: float = 7.0
    pca_k: Optional[int] = 90
    pca_variance_target: Optional[float] = None
    iteration_model: ModelSpec = ModelSpec()
    metric: MetricSpec = MetricSpec()
    seed: int = 0
    eval_stride: Optional[int] = 1  # None disables test-set evaluation
    emc_include_bias: bool = True

    @classmethod
    def extreme_imbalance(cls, **overrides) -> "RunConfig":
        """Preset for extreme class imbalance: doubled budget, two-week window."""
        base = cls(review_rate_per_day=2000.0, al_window_days=14.0)
        return replace(base, **overrides)


@dataclass(frozen=True)
class CurvePoint:
    iteration: int
    sim_time_ms: int
    n_labeled: int
    n_positives: int
    metric_value: Optional[float]
    stage: str


@dataclass
class LearningCurve:
    """Per-iteration trace of one run."""

    points: list[CurvePoint] = field(default_factory=list)
    truncated: bool = False
    sequence_id: str = ""
    seed: int = 0
    fold_index: int = 0
    metric_name: str = ""

    def __len__(self) -> int:
        return len(self.points)

    def defined_points(self) -> tuple[np.ndarray, np.ndarray]:
        its = [p.iteration for p in self.points if p.metric_value is not None]
        vals = [p.metric_value for p in self.points if p.metric_value is not None]
        return np.asarray(its, dtype=np.float64), np.asarray(vals, dtype=np.float64)

    def recorded_span(self) -> tuple[float, float]:
        if not self.points:
            return np.nan, np.nan
        return float(self.points[0].iteration), float(self.points[-1].iteration)

    def positives_at(self, iteration: int) -> Optional[int]:
        for p in self.points:
            if p.iteration == iteration:
                return p.n_positives
        return None

    def final_labeled(self) -> int:
        return self.points[-1].n_labeled if self.points else 0


@dataclass
class RunState:
    """Internals of a finished run, exposed for audits and diagnostics."""

    pool: PoolPair
    oracle: Oracle
    pipeline: Pipeline
    sequence: SequenceState
    model: Optional[RandomForest]


def oracle_label(oracle: Oracle, events: Sequence[Event]) -> list[int]:
    """Reveal true labels for exactly the given events (cost ledger grows)."""
    return oracle.reveal(events)


def fit_iteration_model(
    pool: PoolPair, spec: ModelSpec, seed: int
) -> RandomForest:
    """Train the per-iteration classifier on the labeled pool."""
    X, y = pool.labeled_matrix()
    return RandomForest.fit(
        X, y, n_trees=spec.n_trees, max_depth=spec.max_depth, seed=seed
    )


def evaluate_model(
    model, test_X: np.ndarray, test_y: np.ndarray, metric: MetricSpec
) -> float:
    if metric.name != "recall_at_fpr":
        raise ValueError(f"unknown metric: {metric.name}")
    return recall_at_fpr(model.predict_proba(test_X), test_y, metric.alpha)


def _resolve_sequence(sequence_id: str) -> SequenceSpec:
    if sequence_id not in SEQUENCES:
        raise ValueError(
            f"unknown policy sequence: {sequence_id!r}; "
            f"known: {', '.join(sorted(SEQUENCES))}"
        )
    return SEQUENCES[sequence_id]


def run_experiment(
    fold: FoldData, schema: SchemaSpec, config: RunConfig
) -> LearningCurve:
    curve, _ = run_experiment_detailed(fold, schema, config)
    return curve


def run_experiment_detailed(
    fold: FoldData, schema: SchemaSpec, config: RunConfig
) -> tuple[LearningCurve, RunState]:
    """Run the annotation loop on one fold and return the trace plus internals."""
    seq_spec = _resolve_sequence(config.sequence_id)
    waiting_ms = int(round(config.waiting_days * DAY_MS))
    window_ms = int(round(config.al_window_days * DAY_MS))
    if waiting_ms + window_ms > fold.train_span_ms:
        raise ValueError(
            f"waiting + AL window ({(waiting_ms + window_ms) / DAY_MS:.2f} d) "
            f"exceeds the train period ({fold.train_span_ms / DAY_MS:.2f} d)"
        )
    train_end = fold.boundary_ms
    seg_start = train_end - waiting_ms - window_ms

    # the run sees the stream only from its deployment instant onward
    stream = [e for e in fold.train_events if e.timestamp >= seg_start]
    visible = list(stream) + list(fold.test_events)
    profiles = profile_stream(visible)
    stream_profiles = profiles[: len(stream)]
    test_profiles = profiles[len(stream) :]

    waiting_end = seg_start + waiting_ms
    n_waiting = sum(1 for e in stream if e.timestamp < waiting_end)
    if n_waiting == 0:
        raise ValueError("waiting period contains no events; cannot fit the pipeline")
    pipeline = fit_pipeline(
        stream[:n_waiting],
        schema,
        k=config.pca_k,
        variance_target=config.pca_variance_target,
        profiles=stream_profiles[:n_waiting],
    )

    test_y = np.array([e._true_label for e in fold.test_events], dtype=np.int64)
    test_X = pipeline.transform_matrix(list(fold.test_events), test_profiles)

    # the pipeline is frozen after the fit, so the whole stream can be
    # transformed in one vectorized pass; events still join the pool only
    # when the clock reaches their timestamp
    stream_X = pipeline.transform_matrix(stream, stream_profiles)

    pool = PoolPair()
    oracle = Oracle()
    seq = SequenceState(
        seq_spec,
        seed=derive_seed(config.seed, "policy"),
        emc_include_bias=config.emc_include_bias,
    )
    clock = BudgetClock(
        review_rate_per_day=config.review_rate_per_day,
        batch_size=config.batch_size,
        current_time_ms=waiting_end,
    )

    cursor = 0

    def ingest_until(hi: int) -> None:
        nonlocal cursor
        batch = []
        while cursor < len(stream) and stream[cursor].timestamp < hi:
            ev = stream[cursor]
            batch.append(
                (ev, FeatureVector(values=stream_X[cursor], event_id=ev.event_id))
            )
            cursor += 1
        pool.ingest(batch)

    ingest_until(waiting_end)

    curve = LearningCurve(
        sequence_id=config.sequence_id,
        seed=config.seed,
        fold_index=fold.fold_index,
        metric_name=config.metric.label,
    )
    model: Optional[RandomForest] = None
    iteration = 0
    while clock.current_time_ms < train_end:
        if pool.n_unlabeled == 0:
            curve.truncated = True
            break
        iteration += 1
        query = seq.step(pool, config.batch_size, model=model)
        if len(query) == 0:
            curve.truncated = True
            break
        labels = oracle_label(oracle, pool.events_for(query.event_ids))
        pool.move_to_labeled(query, labels)

        t_now = clock.advance(train_end)
        ingest_until(t_now)

        n_neg, n_pos = pool.label_counts()
        if n_neg > 0 and n_pos > 0:
            model = fit_iteration_model(
                pool, config.iteration_model, derive_seed(config.seed, "model", iteration)
            )
        metric_value = None
        if model is not None and config.eval_stride is not None:
            final = t_now >= train_end
            if final or iteration % config.eval_stride == 0:
                metric_value = evaluate_model(model, test_X, test_y, config.metric)
        curve.points.append(
            CurvePoint(
                iteration=iteration,
                sim_time_ms=t_now,
                n_labeled=pool.n_labeled,
                n_positives=n_pos,
                metric_value=metric_value,
                stage=seq.stage_history[-1],
            )
        )
    return curve, RunState(
        pool=pool, oracle=oracle, pipeline=pipeline, sequence=seq, model=model
    )


# ---------------------------------------------------------------------------
# optimistic baseline
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BaselineSpec:
    n_trees: int = 300
    max_depth: int = 20
    n_candidates: int = 5
    probe_trees: int = 100
    probe_depth: int = 10


#: Hyper-parameter grid sampled by the baseline search.
BASELINE_GRID = {
    "feature_fraction": (0.4, 0.6, 0.8, 1.0),
    "min_samples_leaf": (1, 5, 20, 50),
    "class_weight": (None, "balanced"),
    "min_impurity_decrease": (0.0, 1e-5, 1e-4, 1e-3),
}


@dataclass
class BaselineResult:
    metric_value: float
    n_train_labels: int
    chosen: dict
    selected_features: np.ndarray
    validation_scores: list[float]


def _sample_candidates(rng: np.random.Generator, n: int) -> list[dict]:
    out = []
    for _ in range(n):
        out.append(
            {
                key: values[rng.integers(len(values))]
                for key, values in BASELINE_GRID.items()
            }
        )
    return out


def train_optimistic_baseline(
    fold: FoldData,
    schema: SchemaSpec,
    config: RunConfig,
    spec: BaselineSpec = BaselineSpec(),
    candidates: Optional[list[dict]] = None,
) -> BaselineResult:
    """Upper-bound model with access to the fully labeled train period.

    Candidate configurations (feature fraction kept after an
    importance-probe ranking, leaf size, class weighting, pruning
    strength) are fitted on the first three quarters of the train period,
    validated on the last quarter, and the winner is refitted on the full
    period and evaluated on the test set.
    """
    train = list(fold.train_events)
    if not train:
        raise ValueError("fold has no train events")
    visible = train + list(fold.test_events)
    profiles = profile_stream(visible)
    train_profiles = profiles[: len(train)]
    test_profiles = profiles[len(train) :]

    waiting_ms = int(round(config.waiting_days * DAY_MS))
    waiting_end = fold.train_start_ms + waiting_ms
    n_waiting = sum(1 for e in train if e.timestamp < waiting_end)
    if n_waiting == 0:
        raise ValueError("waiting period contains no events; cannot fit the pipeline")
    pipeline = fit_pipeline(
        train[:n_waiting],
        schema,
        k=config.pca_k,
        variance_target=config.pca_variance_target,
        profiles=train_profiles[:n_waiting],
    )

    X = pipeline.transform_matrix(train, train_profiles)
    y = np.array([e._true_label for e in train], dtype=np.int64)
    if y.min() == y.max():
        raise ValueError("train period labels contain a single class")
    test_X = pipeline.transform_matrix(list(fold.test_events), test_profiles)
    test_y = np.array([e._true_label for e in fold.test_events], dtype=np.int64)

    val_start = fold.train_start_ms + 3 * fold.train_span_ms // 4
    ts = np.array([e.timestamp for e in train])
    fit_mask = ts < val_start
    X_fit, y_fit = X[fit_mask], y[fit_mask]
    X_val, y_val = X[~fit_mask], y[~fit_mask]

    rng = np.random.Generator(np.random.PCG64(derive_seed(config.seed, "baseline")))
    if candidates is None:
        candidates = _sample_candidates(rng, spec.n_candidates)

    probe = RandomForest.fit(
        X_fit,
        y_fit,
        n_trees=spec.probe_trees,
        max_depth=spec.probe_depth,
        seed=derive_seed(config.seed, "baseline-probe"),
    )
    importance_order = np.lexsort(
        (np.arange(X.shape[1]), -probe.feature_importances_)
    )

    def feature_subset(fraction: float) -> np.ndarray:
        keep = max(1, int(round(fraction * X.shape[1])))
        return np.sort(importance_order[:keep])

    best_idx = 0
    best_score = -np.inf
    val_scores = []
    for i, cand in enumerate(candidates):
        sel = feature_subset(cand["feature_fraction"])
        model = RandomForest.fit(
            X_fit[:, sel],
            y_fit,
            n_trees=spec.n_trees,
            max_depth=spec.max_depth,
            seed=derive_seed(config.seed, "baseline-cand", i),
            min_samples_leaf=cand["min_samples_leaf"],
            class_weight=cand["class_weight"],
            min_impurity_decrease=cand["min_impurity_decrease"],
        )
        score = evaluate_model(model, X_val[:, sel], y_val, config.metric)
        val_scores.append(score)
        if score > best_score:
            best_score = score
            best_idx = i

    chosen = candidates[best_idx]
    sel = feature_subset(chosen["feature_fraction"])
    final_model = RandomForest.fit(
        X[:, sel],
        y,
        n_trees=spec.n_trees,
        max_depth=spec.max_depth,
        seed=derive_seed(config.seed, "baseline-final"),
        min_samples_leaf=chosen["min_samples_leaf"],
        class_weight=chosen["class_weight"],
        min_impurity_decrease=chosen["min_impurity_decrease"],
    )
    metric_value = evaluate_model(final_model, test_X[:, sel], test_y, config.metric)
    return BaselineResult(
        metric_value=metric_value,
        n_train_labels=len(train),
        chosen=dict(chosen),
        selected_features=sel,
        validation_scores=val_scores,
    )
