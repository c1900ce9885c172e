"""Streaming active learning for highly imbalanced data under cold start.

A desk-scale experimentation framework: pool management, cold/warm-up/hot
policy sequences (with outlier-based discriminative warm-up), from-scratch
model kernels, a budgeted streaming simulation loop, and learning-curve
evaluation with baseline-normalized summaries.
"""

from .core import (
    DuplicateEventError,
    Event,
    FeatureVector,
    PoolPair,
    QuerySet,
    StaleQueryError,
)
from .data import FoldData, SynthSpec, load_csv, slice_folds, synth_generate
from .evaluation import (
    CurveBands,
    aggregate_bands,
    norm_area_p50,
    norm_final_p50,
    positives_boost,
    rank_policies,
    recall_at_fpr,
    var_area,
)
from .policies import (
    DEFAULT_SEQUENCE_IDS,
    SEQUENCES,
    SequenceSpec,
    SequenceState,
    register_sequence,
    sequence_from_stages,
)
from .preprocess import Pipeline, SchemaSpec, fit_pipeline
from .simulation import (
    BaselineSpec,
    LearningCurve,
    MetricSpec,
    ModelSpec,
    Oracle,
    RunConfig,
    run_experiment,
    train_optimistic_baseline,
)

__version__ = "0.1.0"

__all__ = [
    "CurveBands",
    "DuplicateEventError",
    "Event",
    "FeatureVector",
    "FoldData",
    "LearningCurve",
    "MetricSpec",
    "ModelSpec",
    "Oracle",
    "Pipeline",
    "PoolPair",
    "QuerySet",
    "DEFAULT_SEQUENCE_IDS",
    "RunConfig",
    "SEQUENCES",
    "SchemaSpec",
    "SequenceSpec",
    "SequenceState",
    "StaleQueryError",
    "SynthSpec",
    "BaselineSpec",
    "register_sequence",
    "sequence_from_stages",
    "aggregate_bands",
    "fit_pipeline",
    "load_csv",
    "norm_area_p50",
    "norm_final_p50",
    "positives_boost",
    "rank_policies",
    "recall_at_fpr",
    "run_experiment",
    "slice_folds",
    "synth_generate",
    "train_optimistic_baseline",
    "var_area",
]
