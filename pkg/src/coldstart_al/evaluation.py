"""Metrics and learning-curve aggregations.

The scalar model metric is recall at a fixed false-positive-rate budget.
Curve-level summaries compress a distribution of learning curves (one per
seed) into three numbers, each normalized by the optimistic baseline:
area under the median curve, area of the P10-P90 band, and the final
median value.  Percentiles interpolate linearly between order statistics;
areas use trapezoidal quadrature on the iteration axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


class SingleClassMetricError(ValueError):
    """Metric is undefined because only one class is present."""


def recall_at_fpr(scores, labels, alpha: float) -> float:
    """Recall of the threshold rule meeting a false-positive-rate budget.

    An instance is predicted positive when its score is strictly above the
    threshold; ties at the threshold score are excluded.  The threshold is
    the smallest observed score whose strictly-above false-positive count
    stays under the ``alpha`` budget, which maximizes recall subject to
    the budget.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    if scores.shape != labels.shape:
        raise ValueError("scores and labels must be aligned")
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassMetricError("both classes are required")
    neg_scores = np.sort(scores[labels == 0])
    candidates = np.unique(scores)
    # negatives strictly above each candidate threshold
    fp = n_neg - np.searchsorted(neg_scores, candidates, side="right")
    feasible = fp < alpha * n_neg
    threshold = candidates[feasible][0]  # smallest feasible; recall is maximal there
    pos_scores = scores[labels == 1]
    return float((pos_scores > threshold).sum() / n_pos)


# ---------------------------------------------------------------------------
# curve aggregation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurveBands:
    """Per-iteration percentile bands over a set of learning curves.

    ``grid`` holds the iterations where every retained curve has a defined
    value; ``axis_start``/``axis_end`` span the full common recorded
    window, so a curve that becomes defined late contributes no area over
    its undefined prefix instead of having values invented for it.
    """

    grid: np.ndarray
    p10: np.ndarray
    p50: np.ndarray
    p90: np.ndarray
    n_curves: int
    n_dropped_empty: int
    n_truncated: int
    axis_start: float
    axis_end: float

    def __post_init__(self) -> None:
        if not (np.all(self.p10 <= self.p50 + 1e-12) and np.all(self.p50 <= self.p90 + 1e-12)):
            raise ValueError("percentile bands must be ordered")


def _curve_points(curve) -> tuple[np.ndarray, np.ndarray, float, float]:
    """(iterations, values) of the defined points plus the recorded span."""
    if hasattr(curve, "defined_points"):
        its, vals = curve.defined_points()
        first, last = curve.recorded_span()
    else:  # bare (iterations, values) pair, for hand-built inputs
        its, vals = curve
        its = np.asarray(its, dtype=np.float64)
        vals = np.asarray(vals, dtype=np.float64)
        first, last = (its[0], its[-1]) if len(its) else (np.nan, np.nan)
    return np.asarray(its, dtype=np.float64), np.asarray(vals, dtype=np.float64), first, last


def aggregate_bands(
    curves: Sequence, percentiles: tuple[int, int, int] = (10, 50, 90)
) -> CurveBands:
    """Empirical percentile bands on the common defined iteration grid.

    Curves with no defined values are dropped (counted); curves that end
    early truncate the grid (counted).  Percentiles use linear
    interpolation between the closest order statistics.
    """
    if not curves:
        raise ValueError("no curves given")
    parsed = []
    n_empty = 0
    for curve in curves:
        its, vals, first, last = _curve_points(curve)
        if len(its) == 0:
            n_empty += 1
            continue
        parsed.append((its, vals, first, last))
    if not parsed:
        raise ValueError("every curve is empty")
    onset = max(its[0] for its, _, _, _ in parsed)
    end = min(its[-1] for its, _, _, _ in parsed)
    if onset > end:
        raise ValueError("curves share no common defined iterations")
    n_truncated = sum(1 for its, _, _, _ in parsed if its[-1] > end)
    grid = None
    for its, _, _, _ in parsed:
        sel = its[(its >= onset) & (its <= end)]
        grid = sel if grid is None else np.intersect1d(grid, sel)
    if grid is None or len(grid) == 0:
        raise ValueError("curves share no common defined iterations")
    rows = []
    for its, vals, _, _ in parsed:
        pos = np.searchsorted(its, grid)
        rows.append(vals[pos])
    stack = np.stack(rows)
    p10, p50, p90 = (
        np.percentile(stack, q, axis=0, method="linear") for q in percentiles
    )
    axis_start = min(first for _, _, first, _ in parsed)
    axis_end = end
    return CurveBands(
        grid=grid,
        p10=p10,
        p50=p50,
        p90=p90,
        n_curves=len(parsed),
        n_dropped_empty=n_empty,
        n_truncated=n_truncated,
        axis_start=float(axis_start),
        axis_end=float(axis_end),
    )


def _axis_length(bands: CurveBands) -> float:
    length = bands.axis_end - bands.axis_start
    if length <= 0:
        raise ValueError("curve window has zero length; need at least two iterations")
    return length


def norm_area_p50(bands: CurveBands, baseline_median: float) -> float:
    """Area under the median curve over the full window, relative to baseline.

    A flat median equal to the baseline gives exactly 1.0; iterations
    before the curve is defined contribute no area, so a slow start is
    penalized.
    """
    if baseline_median <= 0:
        raise ValueError("baseline median must be positive")
    area = float(np.trapezoid(bands.p50, x=bands.grid))
    return area / (baseline_median * _axis_length(bands))


def var_area(bands: CurveBands, baseline_median: float) -> float:
    """Area of the P10-P90 band, normalized like the median area."""
    if baseline_median <= 0:
        raise ValueError("baseline median must be positive")
    area = float(np.trapezoid(bands.p90 - bands.p10, x=bands.grid))
    return area / (baseline_median * _axis_length(bands))


def norm_final_p50(curves: Sequence, baseline_median: float) -> float:
    """Median final curve value over seeds, relative to baseline (no clamping)."""
    if baseline_median <= 0:
        raise ValueError("baseline median must be positive")
    finals = []
    for curve in curves:
        _, vals, _, _ = _curve_points(curve)
        if len(vals):
            finals.append(vals[-1])
    if not finals:
        raise ValueError("no curve has a defined final value")
    return float(np.percentile(finals, 50, method="linear")) / baseline_median


# ---------------------------------------------------------------------------
# rankings
# ---------------------------------------------------------------------------


@dataclass
class PolicySummary:
    """Per-policy aggregation across folds of one dataset."""

    policy: str
    per_fold_area: dict[int, float]
    per_fold_final: dict[int, float]
    per_fold_var: dict[int, float]
    per_fold_rank: dict[int, float]
    avg_rank: float
    avg_var: float


def rank_values(values: Sequence[float]) -> np.ndarray:
    """Rank 1 = highest value; tied values share the mean of their ranks."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(-values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    ranks[order] = np.arange(1, len(values) + 1)
    for v in np.unique(values):
        tied = values == v
        if tied.sum() > 1:
            ranks[tied] = ranks[tied].mean()
    return ranks


def rank_policies(
    per_fold_areas: dict[int, dict[str, float]],
    per_fold_finals: Optional[dict[int, dict[str, float]]] = None,
    per_fold_vars: Optional[dict[int, dict[str, float]]] = None,
) -> list[PolicySummary]:
    """Rank policies by median-curve area within each fold and average the ranks.

    Every fold must cover the same policy set; ranks within a fold are a
    (possibly tied-mean) permutation of 1..n.
    """
    folds = sorted(per_fold_areas)
    if not folds:
        raise ValueError("no folds given")
    policies = sorted(per_fold_areas[folds[0]])
    for f in folds:
        if sorted(per_fold_areas[f]) != policies:
            raise ValueError(f"fold {f} is missing policy data")
    fold_ranks: dict[int, dict[str, float]] = {}
    for f in folds:
        areas = [per_fold_areas[f][p] for p in policies]
        fold_ranks[f] = dict(zip(policies, rank_values(areas)))
    summaries = []
    for p in policies:
        ranks = {f: fold_ranks[f][p] for f in folds}
        variances = {
            f: (per_fold_vars[f][p] if per_fold_vars else np.nan) for f in folds
        }
        summaries.append(
            PolicySummary(
                policy=p,
                per_fold_area={f: per_fold_areas[f][p] for f in folds},
                per_fold_final={
                    f: (per_fold_finals[f][p] if per_fold_finals else np.nan)
                    for f in folds
                },
                per_fold_var=variances,
                per_fold_rank=ranks,
                avg_rank=float(np.mean(list(ranks.values()))),
                avg_var=float(np.mean(list(variances.values()))),
            )
        )
    summaries.sort(key=lambda s: (s.avg_rank, s.policy))
    return summaries


def average_ranks_over_datasets(
    per_dataset_avg_ranks: dict[str, dict[str, float]]
) -> dict[str, float]:
    """Overall policy ranking: arithmetic mean of per-dataset average ranks."""
    datasets = sorted(per_dataset_avg_ranks)
    if not datasets:
        raise ValueError("no datasets given")
    policies = sorted(per_dataset_avg_ranks[datasets[0]])
    out = {}
    for p in policies:
        out[p] = float(np.mean([per_dataset_avg_ranks[d][p] for d in datasets]))
    return out


# ---------------------------------------------------------------------------
# warm-up diagnostic
# ---------------------------------------------------------------------------


def positives_boost(
    positives_3stage: Sequence[float],
    positives_2stage: Sequence[float],
) -> Optional[float]:
    """Normalized 10th-percentile gain in collected positives at one iteration.

    [P10(pos3) - P10(pos2)] / mean(pos2), given the per-seed positive
    counts of the two sequences at the same iteration.  Undefined (None)
    when the 2-stage mean is zero.
    """
    pos3 = np.asarray(positives_3stage, dtype=np.float64)
    pos2 = np.asarray(positives_2stage, dtype=np.float64)
    mean2 = pos2.mean()
    if mean2 == 0.0:
        return None
    p10_3 = np.percentile(pos3, 10, method="linear")
    p10_2 = np.percentile(pos2, 10, method="linear")
    return float((p10_3 - p10_2) / mean2)
