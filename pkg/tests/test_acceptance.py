"""Acceptance suite: one test per criterion, each printing a PASS line.

Criteria 1-8 are oracle/property checks; 9-11 are scaled-down directional
reproductions on synthetic imbalanced streams.  Every scenario is fully
seeded, so results are reproducible run to run.  Run with ``pytest -s``
to see the per-criterion lines.
"""

import dataclasses
import time

import numpy as np

from coldstart_al.core import Event, PoolPair, QuerySet
from coldstart_al.data import SynthSpec, make_fold, synth_generate
from coldstart_al.evaluation import (
    aggregate_bands,
    norm_area_p50,
    positives_boost,
    recall_at_fpr,
    var_area,
)
from coldstart_al.models import IsolationForest, RandomForest
from coldstart_al.policies import (
    SEQUENCES,
    SequenceState,
    expected_gradient_norm,
    percentile_distance_select,
    qbc_rank_disagreement,
    rank_descending,
    select_odal,
    uncertainty_decomposition,
)
from coldstart_al.preprocess import DAY_MS, SchemaSpec, fit_pipeline
from coldstart_al.simulation import (
    BaselineSpec,
    ModelSpec,
    RunConfig,
    run_experiment,
    run_experiment_detailed,
    train_optimistic_baseline,
)

from conftest import make_event, make_fv


def report(criterion, elapsed, budget, detail):
    assert elapsed < budget, f"criterion {criterion} took {elapsed:.1f}s (budget {budget}s)"
    print(f"\n[acceptance] criterion {criterion:>2}: PASS in {elapsed:5.1f}s  {detail}")


# -------------------------------------------------------------------------
# criterion 1: formula oracles
# -------------------------------------------------------------------------


def test_criterion_1_formula_oracles():
    start = time.monotonic()
    rng = np.random.default_rng(10)

    # EMC closed form vs brute-force expectation over the label assignment
    worst_emc = 0.0
    for _ in range(1000):
        p = float(rng.random())
        x_aug = np.append(rng.normal(size=int(rng.integers(1, 8))), 1.0)
        brute = (1 - p) * np.linalg.norm(p * x_aug) + p * np.linalg.norm((p - 1) * x_aug)
        closed = expected_gradient_norm(p, float(np.linalg.norm(x_aug)))
        worst_emc = max(worst_emc, abs(closed - brute))
    assert worst_emc < 1e-12

    # recall@FPR vs exhaustive threshold sweep
    def sweep(scores, labels, alpha):
        neg, pos = scores[labels == 0], scores[labels == 1]
        best = 0.0
        for t in np.unique(scores):
            if (neg > t).sum() < alpha * len(neg):
                best = max(best, (pos > t).sum() / len(pos))
        return best

    checked = 0
    while checked < 1000:
        n = int(rng.integers(5, 50))
        labels = (rng.random(n) < rng.uniform(0.2, 0.8)).astype(int)
        if labels.all() or not labels.any():
            continue
        scores = np.round(rng.random(n), 2)
        alpha = float(rng.uniform(0.05, 0.6))
        assert recall_at_fpr(scores, labels, alpha) == sweep(scores, labels, alpha)
        checked += 1

    # PCA explained variance vs a brute-force spectrum via SVD
    rows = rng.normal(size=(50, 6)) @ rng.normal(size=(6, 6))
    schema = SchemaSpec(numerical_fields=tuple(f"n{i}" for i in range(5)))
    events = [
        make_event(i, amount=float(r[0]), cats=(), nums=tuple(r[1:])) for i, r in enumerate(rows)
    ]
    pipe = fit_pipeline(events, schema, k=6)
    Z = (rows - rows.mean(0)) / rows.std(0)
    s = np.linalg.svd(Z - Z.mean(0), compute_uv=False)
    eig = s**2 / len(Z)
    np.testing.assert_allclose(
        pipe.explained_variance_fraction, eig / eig.sum(), atol=1e-8
    )

    report(1, time.monotonic() - start, 10, f"max EMC error {worst_emc:.2e}")


# -------------------------------------------------------------------------
# criterion 2: epistemic decomposition
# -------------------------------------------------------------------------


def test_criterion_2_epistemic_decomposition():
    start = time.monotonic()
    rng = np.random.default_rng(20)
    probs = rng.random((10_000, 9))
    total, aleatoric, epistemic = uncertainty_decomposition(probs)
    assert np.all(epistemic >= -1e-12)
    np.testing.assert_allclose(epistemic, total - aleatoric, atol=1e-15)

    agree = np.repeat(rng.random((10_000, 1)), 9, axis=1)
    _, _, eps_agree = uncertainty_decomposition(agree)
    assert np.all(eps_agree == 0.0)
    report(2, time.monotonic() - start, 5, f"min epistemic {epistemic.min():.2e}")


# -------------------------------------------------------------------------
# criterion 3: rank invariance under monotone transforms
# -------------------------------------------------------------------------


def test_criterion_3_rank_invariance():
    start = time.monotonic()
    rng = np.random.default_rng(30)
    transforms = [np.exp, lambda s: 7.0 * s + 3.0, lambda s: np.exp(0.5 * s) + 1.0]
    for _ in range(100):
        n = int(rng.integers(20, 120))
        batch = int(rng.integers(1, 15))
        scores = rng.normal(size=n)
        q = float(rng.uniform(0.1, 0.95))
        base_pct = percentile_distance_select(scores, q, batch)
        members = [rng.normal(size=n) for _ in range(4)]
        base_qbc = rank_descending(qbc_rank_disagreement(members), batch)
        for tf in transforms:
            np.testing.assert_array_equal(
                base_pct, percentile_distance_select(tf(scores), q, batch)
            )
            warped = [tf(members[0]), *members[1:]]
            np.testing.assert_array_equal(
                base_qbc, rank_descending(qbc_rank_disagreement(warped), batch)
            )
    report(3, time.monotonic() - start, 10, "100 pools x 3 transforms")


# -------------------------------------------------------------------------
# criterion 4: ODAL cluster recovery
# -------------------------------------------------------------------------


def test_criterion_4_odal_cluster_recovery():
    start = time.monotonic()
    hits = 0
    for seed in range(10):
        rng = np.random.default_rng(400 + seed)
        lab = rng.normal(size=(200, 4))
        unl_a = rng.normal(size=(100, 4))
        # +5 per axis in 4-d puts cluster B at distance 10 = 10 sigma
        unl_b = rng.normal(loc=5.0, size=(100, 4))
        pool = PoolPair()
        items = []
        for i, row in enumerate(np.vstack([lab, unl_a, unl_b])):
            ev = make_event(i, label=1 if i == 199 else 0)
            items.append((ev, make_fv(ev, row)))
        pool.ingest(items)
        pool.move_to_labeled(
            QuerySet(tuple(f"ev{i}" for i in range(200))), [0] * 199 + [1]
        )
        query = select_odal(pool, 100, seed=seed)
        from_b = sum(1 for eid in query.event_ids if int(eid[2:]) >= 300)
        if from_b >= 90:
            hits += 1
    assert hits >= 9
    report(4, time.monotonic() - start, 30, f"{hits}/10 seeds recovered >= 90")


# -------------------------------------------------------------------------
# criterion 5: loop-step property suite
# -------------------------------------------------------------------------


def test_criterion_5_loop_properties():
    start = time.monotonic()
    rng = np.random.default_rng(50)

    # pool conservation and exactly-once labeling over ~1e5 event moves
    pool = PoolPair()
    next_id = 0
    seen_labeled: set = set()
    steps = 0
    while steps < 100_000:
        if pool.n_unlabeled == 0 or rng.random() < 0.5:
            k = int(rng.integers(1, 40))
            items = []
            for _ in range(k):
                ev = make_event(next_id, label=int(rng.random() < 0.1))
                items.append((ev, make_fv(ev, (float(next_id % 7), 0.0))))
                next_id += 1
            pool.ingest(items)
        else:
            ids = pool.unlabeled_ids()
            k = min(int(rng.integers(1, 30)), len(ids))
            chosen = [ids[j] for j in rng.choice(len(ids), k, replace=False)]
            events = pool.events_for(chosen)
            pool.move_to_labeled(
                QuerySet(tuple(chosen)), [e._true_label for e in events]
            )
            overlap = seen_labeled.intersection(chosen)
            assert not overlap, f"double-labeled ids: {overlap}"
            seen_labeled.update(chosen)
        steps += k
        assert pool.n_unlabeled + pool.n_labeled == pool.n_ingested == next_id

    # stage monotonicity across randomized label streams
    order = {"cold": 0, "warmup": 1, "hot": 2}
    for trial in range(60):
        seq_id = ["random_odal_entropy", "random_entropy", "random"][trial % 3]
        state = SequenceState(SEQUENCES[seq_id], seed=trial)
        p = PoolPair()
        items = []
        for i in range(300):
            ev = make_event(i, label=int(rng.random() < 0.1))
            items.append((ev, make_fv(ev, (rng.random(), rng.random()))))
        p.ingest(items)
        model = None
        for _ in range(8):
            qq = state.step(p, 25, model=model)
            evs = p.events_for(qq.event_ids)
            p.move_to_labeled(qq, [e._true_label for e in evs])
            n_neg, n_pos = p.label_counts()
            if n_neg and n_pos:
                X, y = p.labeled_matrix()
                model = RandomForest.fit(X, y, n_trees=5, max_depth=2, seed=0)
        ranks = [order[s] for s in state.stage_history]
        assert all(a <= b for a, b in zip(ranks, ranks[1:]))

    # no label peeking: the oracle is the only reader of stream labels
    reads = {"n": 0}

    class AuditedEvent(Event):
        def __getattribute__(self, name):
            if name == "_true_label":
                reads["n"] += 1
            return super().__getattribute__(name)

    spec = SynthSpec(
        positive_rate=0.05, events_per_day=300, n_entities=50, weeks=1, seed=51
    )
    events = synth_generate(spec)
    fold = make_fold(events, 0, 4 * DAY_MS, 7 * DAY_MS)
    audited = dataclasses.replace(
        fold,
        train_events=tuple(AuditedEvent(**dataclasses.asdict(e)) for e in fold.train_events),
    )
    cfg = RunConfig(
        sequence_id="random_odal_entropy",
        batch_size=20,
        review_rate_per_day=200.0,
        waiting_days=1.0,
        al_window_days=2.0,
        pca_k=10,
        iteration_model=ModelSpec(n_trees=40, max_depth=3),
        seed=5,
    )
    curve, state = run_experiment_detailed(audited, spec.schema(), cfg)
    assert reads["n"] == state.oracle.count == curve.final_labeled()

    report(5, time.monotonic() - start, 60, f"{steps} pool steps, oracle reads exact")


# -------------------------------------------------------------------------
# criterion 6: metric normalizations
# -------------------------------------------------------------------------


def test_criterion_6_metric_normalizations():
    start = time.monotonic()
    its = np.arange(1.0, 21.0)
    flat = aggregate_bands([(its, np.full(20, 0.7))])
    assert abs(norm_area_p50(flat, 0.7) - 1.0) < 1e-12

    ramp = aggregate_bands([(its, np.linspace(0.0, 0.7, 20))])
    assert abs(norm_area_p50(ramp, 0.7) - 0.5) < 1e-12

    rng = np.random.default_rng(60)
    same = [(its, rng.random(20))] * 10
    assert var_area(aggregate_bands(same), 0.5) == 0.0

    curves = [(its, rng.random(20) + 0.5) for _ in range(9)]
    for c in (0.1, 2.0, 1e3):
        scaled = [(i, v * c) for i, v in curves]
        assert abs(
            norm_area_p50(aggregate_bands(curves), 0.8)
            - norm_area_p50(aggregate_bands(scaled), 0.8 * c)
        ) < 1e-12
        assert abs(
            var_area(aggregate_bands(curves), 0.8)
            - var_area(aggregate_bands(scaled), 0.8 * c)
        ) < 1e-12
    report(6, time.monotonic() - start, 5, "flat=1, ramp=0.5, var=0, scale-free")


# -------------------------------------------------------------------------
# criterion 7: switching protocol
# -------------------------------------------------------------------------


def test_criterion_7_switching_protocol():
    start = time.monotonic()
    # stream with no positives at all for the first 2.5 days, then
    # outlier-like positives at a high rate
    rng = np.random.default_rng(70)
    events = []
    n_per_day = 300
    for i in range(6 * n_per_day):
        ts = int(i * DAY_MS / n_per_day)
        late = ts > int(2.5 * DAY_MS)
        label = int(late and rng.random() < 0.08)
        nums = rng.normal(size=4) + (6.0 if label else 0.0)
        events.append(
            Event(
                event_id=f"s{i:05d}",
                timestamp=ts,
                entity_id=f"e{i % 40}",
                amount=float(np.exp(rng.normal(3.0, 1.0))),
                categoricals=(),
                numericals=tuple(nums),
                _true_label=label,
            )
        )
    fold = make_fold(events, 0, 5 * DAY_MS, 6 * DAY_MS)
    schema = SchemaSpec(numerical_fields=tuple(f"num_{i}" for i in range(4)))
    cfg = RunConfig(
        sequence_id="random_odal_entropy",
        batch_size=25,
        review_rate_per_day=250.0,
        waiting_days=1.0,
        al_window_days=4.0,
        pca_k=8,
        iteration_model=ModelSpec(n_trees=40, max_depth=3),
        seed=7,
    )
    curve = run_experiment(fold, schema, cfg)
    stages = [p.stage for p in curve.points]
    first_pos = next(i for i, p in enumerate(curve.points) if p.n_positives > 0)
    assert stages[0] == "cold"
    assert all(s == "warmup" for s in stages[1 : first_pos + 1])
    assert first_pos >= 2, "stream must stay single-class for several batches"
    assert all(s == "hot" for s in stages[first_pos + 1 :])
    report(
        7,
        time.monotonic() - start,
        10,
        f"cold x1, warmup x{first_pos}, hot x{len(stages) - first_pos - 1}",
    )


# -------------------------------------------------------------------------
# criterion 8: isolation forest sanity
# -------------------------------------------------------------------------


def test_criterion_8_isolation_forest_sanity():
    start = time.monotonic()
    for seed in range(10):
        rng = np.random.default_rng(800 + seed)
        inliers = rng.normal(size=(1000, 4))
        outlier = np.full((1, 4), 100.0)
        model = IsolationForest.fit(np.vstack([inliers, outlier]), seed=seed)
        scores = model.score(np.vstack([inliers, outlier]))
        assert scores[-1] > scores[:-1].max()

    # all-duplicate training data truncates every tree at its root, so any
    # probe's expected path length is exactly c(n) and the score is 0.5
    degenerate = IsolationForest.fit(np.ones((128, 3)), seed=0)
    np.testing.assert_allclose(degenerate.score(np.zeros((1, 3))), 0.5, atol=1e-12)
    report(8, time.monotonic() - start, 10, "outlier outranked all inliers 10/10")


# -------------------------------------------------------------------------
# criterion 9: AL beats Random
# -------------------------------------------------------------------------


def test_criterion_9_al_beats_random():
    start = time.monotonic()
    spec = SynthSpec(
        positive_rate=5e-3,
        events_per_day=1000,
        n_entities=200,
        weeks=2,
        seed=424,
        separation=4.0,
    )
    events = synth_generate(spec)
    fold = make_fold(events, 0, 7 * DAY_MS, 14 * DAY_MS)
    cfg = RunConfig(
        batch_size=50,
        review_rate_per_day=500.0,
        waiting_days=1.0,
        al_window_days=5.0,
        pca_k=12,
        eval_stride=2,
    )
    areas = {}
    for seq in ("random_odal_entropy", "random"):
        areas[seq] = []
        for seed in range(10):
            curve = run_experiment(
                fold, spec.schema(), dataclasses.replace(cfg, sequence_id=seq, seed=seed)
            )
            areas[seq].append(norm_area_p50(aggregate_bands([curve]), 1.0))
    a3 = np.array(areas["random_odal_entropy"])
    ar = np.array(areas["random"])
    wins = int((a3 > ar).sum())
    median_gain = float(np.median((a3 - ar) / ar))
    assert wins >= 8, f"3-stage won only {wins}/10 paired seeds"
    assert median_gain >= 0.10, f"median relative gain {median_gain:.1%} < 10%"
    report(9, time.monotonic() - start, 600, f"wins {wins}/10, median gain {median_gain:.1%}")


# -------------------------------------------------------------------------
# criterion 10: warm-up positives boost
# -------------------------------------------------------------------------


def _boost_runs(positive_rate, fold_seed, events_per_day, n_seeds=10):
    spec = SynthSpec(
        positive_rate=positive_rate,
        events_per_day=events_per_day,
        n_entities=300,
        weeks=1,
        seed=fold_seed,
        separation=4.0,
    )
    events = synth_generate(spec)
    fold = make_fold(events, 0, 7 * DAY_MS, 7 * DAY_MS, fold_index=fold_seed)
    cfg = RunConfig(
        batch_size=100,
        review_rate_per_day=1000.0,
        waiting_days=1.0,
        al_window_days=1.5,
        pca_k=12,
        eval_stride=None,  # positives only; no test-set evaluation needed
    )
    out = {}
    for seq in ("random_odal_entropy", "random_entropy"):
        out[seq] = [
            run_experiment(
                fold, spec.schema(), dataclasses.replace(cfg, sequence_id=seq, seed=s)
            )
            for s in range(n_seeds)
        ]
    return out


def _earliest_diverged_boost(curves):
    """Boost at the earliest iteration where it is defined, after the shared
    cold batch (iteration 1 is identical for both arms by construction)."""
    c3 = curves["random_odal_entropy"]
    c2 = curves["random_entropy"]
    n_iters = min(len(c.points) for c in c3 + c2)
    for t in range(2, n_iters + 1):
        pos3 = [c.positives_at(t) for c in c3]
        pos2 = [c.positives_at(t) for c in c2]
        boost = positives_boost(pos3, pos2)
        if boost is not None:
            return t, boost, np.array(pos3) - np.array(pos2)
    raise AssertionError("boost undefined at every iteration")


def test_criterion_10_warmup_boost():
    start = time.monotonic()
    positive = 0
    for fold_seed in range(1000, 1005):
        curves = _boost_runs(1e-3, fold_seed, events_per_day=4000)
        _, boost, _ = _earliest_diverged_boost(curves)
        if boost > 0:
            positive += 1
    assert positive >= 4, f"boost positive in only {positive}/5 folds"

    # mild imbalance: both arms reach the hot stage immediately, so the
    # trajectories coincide and the boost sits inside the paired noise band
    for fold_seed in (2000, 2001):
        curves = _boost_runs(0.1, fold_seed, events_per_day=1000, n_seeds=8)
        _, boost, diffs = _earliest_diverged_boost(curves)
        band = 3.0 * diffs.std() / np.sqrt(len(diffs)) + 1e-9
        assert abs(boost) <= band, f"mild-imbalance boost {boost} outside noise band {band}"
    report(10, time.monotonic() - start, 900, f"boost>0 in {positive}/5 imbalanced folds")


# -------------------------------------------------------------------------
# criterion 11: label efficiency vs the optimistic baseline
# -------------------------------------------------------------------------


def test_criterion_11_label_efficiency():
    start = time.monotonic()
    spec = SynthSpec(
        positive_rate=5e-3,
        events_per_day=1200,
        n_entities=250,
        weeks=3,
        seed=777,
        separation=4.0,
    )
    events = synth_generate(spec)
    fold = make_fold(events, 0, 10 * DAY_MS, 17 * DAY_MS)
    cfg = RunConfig(
        sequence_id="random_odal_entropy",
        batch_size=40,
        review_rate_per_day=200.0,
        waiting_days=1.0,
        al_window_days=5.0,
        pca_k=12,
        eval_stride=10**6,  # final model evaluation only
    )
    baseline_vals = [
        train_optimistic_baseline(
            fold, spec.schema(), dataclasses.replace(cfg, seed=s), spec=BaselineSpec()
        ).metric_value
        for s in range(3)
    ]
    baseline_median = float(np.median(baseline_vals))

    finals = []
    labels_used = []
    for seed in range(10):
        curve = run_experiment(fold, spec.schema(), dataclasses.replace(cfg, seed=seed))
        _, vals = curve.defined_points()
        finals.append(vals[-1] if len(vals) else 0.0)
        labels_used.append(curve.final_labeled())

    ratio = float(np.median(finals)) / baseline_median
    label_fraction = max(labels_used) / len(fold.train_events)
    assert ratio >= 0.80, f"AL reached only {ratio:.2f} of the baseline"
    assert label_fraction <= 0.10, f"AL used {label_fraction:.1%} of the baseline labels"
    report(
        11,
        time.monotonic() - start,
        900,
        f"{ratio:.2f}x baseline at {label_fraction:.1%} of its labels",
    )
