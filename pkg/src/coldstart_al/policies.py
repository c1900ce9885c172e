"""Query policies and the cold/warm-up/hot sequence state machine.

Policy families:

* cold (unsupervised): random sampling, and outlier ranking by an
  isolation forest fitted on the unlabeled pool;
* warm-up: ODAL, which fits an isolation forest on the *labeled* pool
  features only and queries the unlabeled instances that look least like
  what has been labeled so far (a computationally light discriminative
  strategy, valuable while one class has not been observed yet);
* hot (supervised): entropy / epistemic / percentile uncertainty
  sampling, rank-disagreement query-by-committee, and expected model
  change.

All selections are deterministic for fixed seeds and pools; score ties
break by pool insertion order (earlier-ingested event wins).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import PoolPair, QuerySet
from .models import (
    BoostedTreesModel,
    IsolationForest,
    LogisticModel,
    NaiveBayesModel,
    RandomForest,
)

COLD_KINDS = ("random", "outlier_detect")
WARMUP_KINDS = ("odal", "dal")
HOT_KINDS = ("unc_entropy", "unc_epistemic", "unc_percentile", "qbc", "emc")


# ---------------------------------------------------------------------------
# score helpers (pure functions; the policy ops wrap them)
# ---------------------------------------------------------------------------


def binary_entropy_bits(p: np.ndarray) -> np.ndarray:
    """H(p) in bits with the 0*log(0) = 0 convention."""
    p = np.asarray(p, dtype=np.float64)
    out = np.zeros_like(p)
    interior = (p > 0.0) & (p < 1.0)
    q = p[interior]
    out[interior] = -(q * np.log2(q) + (1.0 - q) * np.log2(1.0 - q))
    return out


def _shifted_row_mean(values: np.ndarray) -> np.ndarray:
    """Row mean as first + mean(deltas); exact when a row is constant."""
    first = values[:, :1]
    return (first + (values - first).mean(axis=1, keepdims=True))[:, 0]


def uncertainty_decomposition(
    tree_probs: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(total, aleatoric, epistemic) uncertainty in bits from per-tree outputs.

    total is the entropy of the mean prediction, aleatoric the mean of the
    per-tree entropies, epistemic their difference (non-negative by
    Jensen's inequality, and exactly zero when all trees agree thanks to
    the shifted-mean evaluation).
    """
    tree_probs = np.atleast_2d(np.asarray(tree_probs, dtype=np.float64))
    total = binary_entropy_bits(_shifted_row_mean(tree_probs))
    aleatoric = _shifted_row_mean(binary_entropy_bits(tree_probs))
    return total, aleatoric, total - aleatoric


def expected_gradient_norm(p: np.ndarray, x_norm: np.ndarray) -> np.ndarray:
    """Closed form of E_y ||(sigmoid(z) - y) * x|| for y ~ Bernoulli(p)."""
    return 2.0 * p * (1.0 - p) * x_norm


@dataclass(frozen=True)
class DalScore:
    """Pool-discrimination score p(0|x) and the densities it factors into.

    The posterior follows from Bayes' theorem for a probabilistic
    discriminator between the unlabeled pool (class 0) and the labeled
    pool (class 1):  p(0|x) = (1 + [p(x|1) p(1)] / [p(x|0) p(0)])^-1.
    """

    p0_given_x: float
    p_x_given_0: float = np.nan
    p_x_given_1: float = np.nan
    p1: float = np.nan

    @classmethod
    def from_densities(
        cls, p_x_given_0: float, p_x_given_1: float, p1: float
    ) -> "DalScore":
        num = p_x_given_1 * p1
        den = p_x_given_0 * (1.0 - p1)
        if den == 0.0:
            posterior = 0.0 if num > 0.0 else 0.5
        else:
            posterior = 1.0 / (1.0 + num / den)
        return cls(
            p0_given_x=posterior, p_x_given_0=p_x_given_0, p_x_given_1=p_x_given_1, p1=p1
        )


def rank_descending(scores: np.ndarray, batch_size: int) -> np.ndarray:
    """Indices of the top scores, ties broken by lower index."""
    scores = np.asarray(scores, dtype=np.float64)
    n = len(scores)
    order = np.lexsort((np.arange(n), -scores))
    return order[: min(batch_size, n)]


def ordinal_ranks_descending(scores: np.ndarray) -> np.ndarray:
    """Rank 1 = highest score; tied scores get consecutive ranks by index."""
    n = len(scores)
    order = np.lexsort((np.arange(n), -np.asarray(scores, dtype=np.float64)))
    ranks = np.empty(n, dtype=np.int64)
    ranks[order] = np.arange(1, n + 1)
    return ranks


def empirical_percentiles(scores: np.ndarray) -> np.ndarray:
    """Percentile of each score: rank within the ascending order, over n.

    The r-th smallest of n scores (1-based, ties broken by index) maps to
    r / n, so percentiles lie in (0, 1] and depend only on the ordering.
    """
    n = len(scores)
    order = np.lexsort((np.arange(n), np.asarray(scores, dtype=np.float64)))
    pct = np.empty(n, dtype=np.float64)
    pct[order] = np.arange(1, n + 1) / n
    return pct


def percentile_distance_select(
    scores: np.ndarray, boundary_percentile: float, batch_size: int
) -> np.ndarray:
    """Indices of the instances whose score percentile is closest to the boundary."""
    pct = empirical_percentiles(scores)
    dist = np.abs(pct - boundary_percentile)
    n = len(scores)
    order = np.lexsort((np.arange(n), dist))
    return order[: min(batch_size, n)]


def qbc_rank_disagreement(score_columns: Sequence[np.ndarray]) -> np.ndarray:
    """Mean pairwise absolute rank difference across committee members."""
    if len(score_columns) < 2:
        raise ValueError("committee needs at least 2 members")
    ranks = np.stack([ordinal_ranks_descending(s) for s in score_columns], axis=1)
    n, m = ranks.shape
    acc = np.zeros(n, dtype=np.float64)
    pairs = 0
    for a in range(m):
        for b in range(a + 1, m):
            acc += np.abs(ranks[:, a] - ranks[:, b])
            pairs += 1
    return acc / pairs


# ---------------------------------------------------------------------------
# policy operations
# ---------------------------------------------------------------------------


def _query_from_indices(pool: PoolPair, idx: np.ndarray, scores=None) -> QuerySet:
    ids = pool.unlabeled_ids()
    chosen = tuple(ids[i] for i in idx)
    return QuerySet(
        event_ids=chosen,
        scores=None if scores is None else np.asarray(scores)[idx],
    )


def select_random(pool: PoolPair, batch_size: int, rng: np.random.Generator) -> QuerySet:
    """Uniform sample without replacement from the unlabeled pool."""
    n = pool.n_unlabeled
    if n == 0:
        raise ValueError("unlabeled pool is empty")
    take = min(batch_size, n)
    idx = rng.choice(n, size=take, replace=False)
    return _query_from_indices(pool, idx)


def select_outlier_detect(pool: PoolPair, batch_size: int, seed: int) -> QuerySet:
    """Most outlier-like unlabeled instances under a forest fit on the pool itself."""
    X = pool.unlabeled_matrix()
    if len(X) == 0:
        raise ValueError("unlabeled pool is empty")
    forest = IsolationForest.fit(X, seed=seed)
    scores = forest.score(X)
    return _query_from_indices(pool, rank_descending(scores, batch_size), scores)


def select_odal(pool: PoolPair, batch_size: int, seed: int) -> QuerySet:
    """Unlabeled instances least represented in the labeled pool.

    The isolation forest is fitted on labeled-pool features only (labels
    unused), so the ranking favours regions the annotators have not seen,
    independently of how dense those regions are in the unlabeled pool.
    """
    X_lab, _ = pool.labeled_matrix()
    if len(X_lab) == 0:
        raise ValueError("ODAL requires a non-empty labeled pool")
    X = pool.unlabeled_matrix()
    if len(X) == 0:
        raise ValueError("unlabeled pool is empty")
    forest = IsolationForest.fit(X_lab, seed=seed)
    scores = forest.score(X)
    return _query_from_indices(pool, rank_descending(scores, batch_size), scores)


def select_dal(pool: PoolPair, batch_size: int, seed: int) -> QuerySet:
    """Reference pool-discrimination baseline (trains on both pools).

    Kept at test scale only: its cost grows with the whole stream, which
    is exactly what ODAL avoids.
    """
    X_lab, _ = pool.labeled_matrix()
    X_unl = pool.unlabeled_matrix()
    if len(X_lab) == 0 or len(X_unl) == 0:
        raise ValueError("DAL requires both pools to be non-empty")
    X = np.vstack([X_unl, X_lab])
    y = np.concatenate([np.zeros(len(X_unl)), np.ones(len(X_lab))])
    disc = LogisticModel.fit(X, y, seed=seed)
    p0 = 1.0 - disc.predict_proba(X_unl)
    return _query_from_indices(pool, rank_descending(p0, batch_size), p0)


def select_unc_entropy(pool: PoolPair, model: RandomForest, batch_size: int) -> QuerySet:
    """Highest predictive entropy; for binary scores this is closest to 0.5."""
    X = pool.unlabeled_matrix()
    scores = binary_entropy_bits(model.predict_proba(X))
    return _query_from_indices(pool, rank_descending(scores, batch_size), scores)


def select_unc_epistemic(
    pool: PoolPair, model: RandomForest, batch_size: int
) -> QuerySet:
    """Highest epistemic uncertainty from the per-tree output decomposition."""
    X = pool.unlabeled_matrix()
    _, _, epistemic = uncertainty_decomposition(model.tree_probas(X))
    return _query_from_indices(pool, rank_descending(epistemic, batch_size), epistemic)


def select_unc_percentile(
    pool: PoolPair,
    model: RandomForest,
    labeled_counts: tuple[int, int],
    batch_size: int,
) -> QuerySet:
    """Instances closest to the estimated negative-class-rate score percentile.

    Calibration-free: for a good ranker the class boundary sits at the
    percentile equal to the negative rate, so only score order matters.
    """
    n_neg, n_pos = labeled_counts
    total = n_neg + n_pos
    if total == 0 or n_pos == 0:
        raise ValueError("percentile policy requires at least one positive label")
    boundary = 1.0 - n_pos / total
    X = pool.unlabeled_matrix()
    scores = model.predict_proba(X)
    idx = percentile_distance_select(scores, boundary, batch_size)
    return _query_from_indices(pool, idx, scores)


def select_qbc(pool: PoolPair, committee: Sequence, batch_size: int) -> QuerySet:
    """Largest mean pairwise rank disagreement across committee scores."""
    X = pool.unlabeled_matrix()
    columns = [member.predict_proba(X) for member in committee]
    disagreement = qbc_rank_disagreement(columns)
    return _query_from_indices(
        pool, rank_descending(disagreement, batch_size), disagreement
    )


def select_emc(
    pool: PoolPair,
    model: LogisticModel,
    batch_size: int,
    include_bias: bool = True,
) -> QuerySet:
    """Largest expected log-loss gradient norm under the current model."""
    X = pool.unlabeled_matrix()
    p = model.predict_proba(X)
    sq = (X**2).sum(axis=1)
    if include_bias:
        sq = sq + 1.0
    scores = expected_gradient_norm(p, np.sqrt(sq))
    return _query_from_indices(pool, rank_descending(scores, batch_size), scores)


def select_query_all(pool: PoolPair) -> QuerySet:
    """Unbounded-budget baseline: take the entire unlabeled pool."""
    return QuerySet(event_ids=tuple(pool.unlabeled_ids()))


# ---------------------------------------------------------------------------
# policy sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SequenceSpec:
    """Cold/warm-up/hot composition of one experiment arm."""

    sequence_id: str
    cold: str
    warmup: Optional[str] = None
    hot: Optional[str] = None

    def __post_init__(self) -> None:
        if self.cold not in COLD_KINDS + ("query_all",):
            raise ValueError(f"unknown cold policy: {self.cold}")
        if self.warmup is not None and self.warmup not in WARMUP_KINDS:
            raise ValueError(f"unknown warm-up policy: {self.warmup}")
        if self.hot is not None and self.hot not in HOT_KINDS + WARMUP_KINDS:
            raise ValueError(f"unknown hot policy: {self.hot}")
        if self.warmup is not None and self.hot is None:
            raise ValueError("a warm-up stage requires a hot stage")


def _seq(sid: str, cold: str, warmup=None, hot=None) -> SequenceSpec:
    return SequenceSpec(sequence_id=sid, cold=cold, warmup=warmup, hot=hot)


#: The twelve registered experiment arms: the unbounded baseline, two
#: single-stage baselines, four 2-stage and five 3-stage sequences.
SEQUENCES: dict[str, SequenceSpec] = {
    s.sequence_id: s
    for s in (
        _seq("queryall", "query_all"),
        _seq("outlierdetect", "outlier_detect"),
        _seq("random", "random"),
        _seq("random_entropy", "random", hot="unc_entropy"),
        _seq("random_odal", "random", hot="odal"),
        _seq("random_emc", "random", hot="emc"),
        _seq("random_qbc", "random", hot="qbc"),
        _seq("random_odal_entropy", "random", warmup="odal", hot="unc_entropy"),
        _seq("random_odal_epistemic", "random", warmup="odal", hot="unc_epistemic"),
        _seq("random_odal_percentile", "random", warmup="odal", hot="unc_percentile"),
        _seq("random_odal_qbc", "random", warmup="odal", hot="qbc"),
        _seq("random_odal_emc", "random", warmup="odal", hot="emc"),
    )
}

#: Canonical experiment arms, frozen so later ad-hoc registrations cannot
#: change the default experiment composition.
DEFAULT_SEQUENCE_IDS: tuple[str, ...] = tuple(SEQUENCES)


def sequence_from_stages(
    cold: str, warmup: Optional[str] = None, hot: Optional[str] = None
) -> SequenceSpec:
    """Ad-hoc sequence from an explicit stage triple, with a canonical id."""
    parts = [f"cold={cold}"]
    if warmup is not None:
        parts.append(f"warmup={warmup}")
    if hot is not None:
        parts.append(f"hot={hot}")
    return SequenceSpec(sequence_id=",".join(parts), cold=cold, warmup=warmup, hot=hot)


def register_sequence(spec: SequenceSpec) -> SequenceSpec:
    """Make a sequence resolvable by id; idempotent, collisions rejected."""
    existing = SEQUENCES.get(spec.sequence_id)
    if existing is not None and existing != spec:
        raise ValueError(f"sequence id already registered: {spec.sequence_id}")
    SEQUENCES[spec.sequence_id] = spec
    return spec


@dataclass
class CommitteeSpec:
    """Composition of the QBC committee."""

    rf_trees: int = 100
    rf_depth: int = 3
    logistic_l2: float = 1e-3
    gbt_estimators: int = 100


class SequenceState:
    """Stage bookkeeping for one run of a policy sequence.

    Transitions are monotone:  cold -> warm-up after the first cold batch
    (3-stage only), and (cold | warm-up) -> hot once the labeled pool
    contains at least one label from each class.
    """

    def __init__(
        self,
        spec: SequenceSpec,
        seed: int,
        committee: Optional[CommitteeSpec] = None,
        emc_include_bias: bool = True,
        emc_l2: float = 1e-3,
    ):
        self.spec = spec
        self.stage = "cold"
        self.first_batch_done = False
        self.both_classes_seen = False
        self.stage_history: list[str] = []
        self.committee = committee or CommitteeSpec()
        self.emc_include_bias = emc_include_bias
        self.emc_l2 = emc_l2
        children = np.random.SeedSequence(seed).spawn(2)
        self._rng = np.random.Generator(np.random.PCG64(children[0]))
        self._forest_seeds = np.random.Generator(np.random.PCG64(children[1]))

    def _advance(self, pool: PoolPair) -> None:
        n_neg, n_pos = pool.label_counts()
        if n_neg > 0 and n_pos > 0:
            self.both_classes_seen = True
        if self.stage == "cold" and self.spec.warmup is not None and self.first_batch_done:
            self.stage = "warmup"
        if self.stage in ("cold", "warmup") and self.spec.hot is not None:
            if self.both_classes_seen and (
                self.spec.warmup is None or self.first_batch_done
            ):
                self.stage = "hot"

    def active_policy(self, pool: PoolPair) -> str:
        self._advance(pool)
        if self.stage == "cold":
            return self.spec.cold
        if self.stage == "warmup":
            return self.spec.warmup
        return self.spec.hot

    def _next_seed(self) -> int:
        return int(self._forest_seeds.integers(0, 2**31 - 1))

    def step(
        self,
        pool: PoolPair,
        batch_size: int,
        model: Optional[RandomForest] = None,
    ) -> QuerySet:
        """Dispatch the active stage's policy and record the stage used."""
        kind = self.active_policy(pool)
        self.stage_history.append(self.stage)
        query = self._dispatch(kind, pool, batch_size, model)
        if self.stage == "cold":
            self.first_batch_done = True
        return query

    def _dispatch(
        self, kind: str, pool: PoolPair, batch_size: int, model
    ) -> QuerySet:
        if kind == "query_all":
            return select_query_all(pool)
        if kind == "random":
            return select_random(pool, batch_size, self._rng)
        if kind == "outlier_detect":
            return select_outlier_detect(pool, batch_size, self._next_seed())
        if kind == "odal":
            return select_odal(pool, batch_size, self._next_seed())
        if kind == "dal":
            return select_dal(pool, batch_size, self._next_seed())
        if kind in ("unc_entropy", "unc_epistemic", "unc_percentile"):
            if model is None:
                raise ValueError(f"{kind} needs the current iteration model")
            if kind == "unc_entropy":
                return select_unc_entropy(pool, model, batch_size)
            if kind == "unc_epistemic":
                return select_unc_epistemic(pool, model, batch_size)
            return select_unc_percentile(pool, model, pool.label_counts(), batch_size)
        if kind == "qbc":
            return select_qbc(pool, self._fit_committee(pool), batch_size)
        if kind == "emc":
            X, y = pool.labeled_matrix()
            logit = LogisticModel.fit(X, y, l2_lambda=self.emc_l2)
            return select_emc(pool, logit, batch_size, self.emc_include_bias)
        raise ValueError(f"unknown policy kind: {kind}")

    def _fit_committee(self, pool: PoolPair) -> list:
        X, y = pool.labeled_matrix()
        c = self.committee
        return [
            RandomForest.fit(
                X, y, n_trees=c.rf_trees, max_depth=c.rf_depth, seed=self._next_seed()
            ),
            LogisticModel.fit(X, y, l2_lambda=c.logistic_l2),
            NaiveBayesModel.fit(X, y),
            BoostedTreesModel.fit(X, y, n_estimators=c.gbt_estimators),
        ]
