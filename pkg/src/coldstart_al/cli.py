"""Config-driven command-line front end.

Three commands:

* ``run``     executes seeds x folds x sequences streaming runs and writes
              one line-delimited JSON record file per run plus baseline
              summaries;
* ``report``  aggregates a results directory into ranking tables and the
              warm-up positives-boost table;
* ``synth``   materializes a synthetic stream spec to the canonical CSV.

Exit codes: 0 success, 1 validation error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np
import yaml

from .data import (
    FoldData,
    SYNTH_PRESETS,
    SynthSpec,
    load_csv,
    slice_folds,
    synth_generate,
    write_csv,
)
from .evaluation import (
    aggregate_bands,
    norm_area_p50,
    norm_final_p50,
    positives_boost,
    rank_policies,
    var_area,
)
from .policies import (
    DEFAULT_SEQUENCE_IDS,
    SEQUENCES,
    SequenceSpec,
    register_sequence,
    sequence_from_stages,
)
from .preprocess import SchemaSpec
from .simulation import (
    BaselineSpec,
    LearningCurve,
    CurvePoint,
    MetricSpec,
    ModelSpec,
    RunConfig,
    run_experiment,
    train_optimistic_baseline,
)


class ConfigError(ValueError):
    """The experiment config file failed validation."""


CONFIG_SCHEMA = {
    "type": "object",
    "required": ["dataset", "output_dir"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "dataset": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["synth", "csv"]},
                "synth": {"type": "object"},
                "preset": {"type": "string"},
                "csv": {
                    "type": "object",
                    "required": ["path"],
                    "additionalProperties": False,
                    "properties": {
                        "path": {"type": "string"},
                        "schema": {"type": "object"},
                    },
                },
            },
        },
        "folds": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_folds": {"type": "integer", "minimum": 1},
                "stride_weeks": {"type": "number", "exclusiveMinimum": 0},
                "train_weeks": {"type": "number", "exclusiveMinimum": 0},
                "test_weeks": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "seeds": {"type": "integer", "minimum": 1},
        "sequences": {
            "type": "array",
            "items": {
                "oneOf": [
                    {"type": "string"},
                    {
                        "type": "object",
                        "required": ["cold"],
                        "additionalProperties": False,
                        "properties": {
                            "cold": {"type": "string"},
                            "warmup": {"type": "string"},
                            "hot": {"type": "string"},
                        },
                    },
                ]
            },
            "minItems": 1,
        },
        "run": {"type": "object"},
        "baseline": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "enabled": {"type": "boolean"},
                "n_trees": {"type": "integer", "minimum": 1},
                "max_depth": {"type": "integer", "minimum": 1},
                "n_candidates": {"type": "integer", "minimum": 1},
                "seeds": {"type": "integer", "minimum": 1},
            },
        },
        "jobs": {"type": "integer", "minimum": 1},
        "output_dir": {"type": "string"},
    },
}


@dataclass(frozen=True)
class FoldPlan:
    n_folds: int = 1
    stride_weeks: float = 4.0
    train_weeks: float = 4.0
    test_weeks: float = 4.0


@dataclass
class ExperimentConfig:
    """Parsed and validated experiment description."""

    name: str
    dataset_kind: str
    synth_spec: Optional[SynthSpec]
    csv_path: Optional[str]
    schema: Optional[SchemaSpec]  # None until the dataset is loaded (synth case)
    fold_plan: FoldPlan
    n_seeds: int
    sequences: tuple[SequenceSpec, ...]
    run: RunConfig
    baseline_enabled: bool
    baseline_spec: BaselineSpec
    baseline_seeds: int
    jobs: Optional[int]
    output_dir: str

    def to_dict(self) -> dict:
        doc: dict = {
            "name": self.name,
            "dataset": {"kind": self.dataset_kind},
            "folds": dataclasses.asdict(self.fold_plan),
            "seeds": self.n_seeds,
            "sequences": [_sequence_to_doc(s) for s in self.sequences],
            "run": _run_to_dict(self.run),
            "baseline": {
                "enabled": self.baseline_enabled,
                "n_trees": self.baseline_spec.n_trees,
                "max_depth": self.baseline_spec.max_depth,
                "n_candidates": self.baseline_spec.n_candidates,
                "seeds": self.baseline_seeds,
            },
            "output_dir": self.output_dir,
        }
        if self.jobs is not None:
            doc["jobs"] = self.jobs
        if self.dataset_kind == "synth":
            doc["dataset"]["synth"] = dataclasses.asdict(self.synth_spec)
        else:
            doc["dataset"]["csv"] = {"path": self.csv_path}
            if self.schema is not None:
                doc["dataset"]["csv"]["schema"] = {
                    "categorical_fields": list(self.schema.categorical_fields),
                    "numerical_fields": list(self.schema.numerical_fields),
                    "entity_field": self.schema.entity_field,
                    "timestamp_field": self.schema.timestamp_field,
                    "label_field": self.schema.label_field,
                    "amount_field": self.schema.amount_field,
                    "event_id_field": self.schema.event_id_field,
                }
        return doc


def _sequence_to_doc(spec: SequenceSpec):
    if SEQUENCES.get(spec.sequence_id) == spec and "=" not in spec.sequence_id:
        return spec.sequence_id
    doc = {"cold": spec.cold}
    if spec.warmup is not None:
        doc["warmup"] = spec.warmup
    if spec.hot is not None:
        doc["hot"] = spec.hot
    return doc


def _sequence_from_doc(item) -> SequenceSpec:
    if isinstance(item, str):
        if item not in SEQUENCES:
            raise ConfigError(
                f"sequences: unknown policy sequence {item!r}; "
                f"known: {', '.join(sorted(SEQUENCES))}"
            )
        return SEQUENCES[item]
    try:
        return register_sequence(
            sequence_from_stages(
                cold=item["cold"], warmup=item.get("warmup"), hot=item.get("hot")
            )
        )
    except ValueError as exc:
        raise ConfigError(f"sequences: {exc}") from exc


def _run_to_dict(run: RunConfig) -> dict:
    doc = dataclasses.asdict(run)
    doc["iteration_model"] = dataclasses.asdict(run.iteration_model)
    doc["metric"] = dataclasses.asdict(run.metric)
    return doc


def _run_from_dict(doc: dict) -> RunConfig:
    doc = dict(doc)
    model = doc.pop("iteration_model", {})
    metric = doc.pop("metric", {})
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"run: unknown fields: {', '.join(sorted(unknown))}")
    return RunConfig(
        **doc,
        iteration_model=ModelSpec(**model),
        metric=MetricSpec(**metric),
    )


def parse_config(doc: dict) -> ExperimentConfig:
    """Validate a config document and build the typed experiment config."""
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{path}: {exc.message}") from exc

    ds = doc["dataset"]
    synth_spec = None
    csv_path = None
    schema = None
    if ds["kind"] == "synth":
        if "preset" in ds:
            if ds["preset"] not in SYNTH_PRESETS:
                raise ConfigError(f"dataset/preset: unknown preset {ds['preset']!r}")
            synth_spec = SYNTH_PRESETS[ds["preset"]]
            if "synth" in ds:
                synth_spec = dataclasses.replace(synth_spec, **ds["synth"])
        else:
            if "synth" not in ds:
                raise ConfigError("dataset: synth kind requires a synth block or preset")
            try:
                synth_spec = SynthSpec(**ds["synth"])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"dataset/synth: {exc}") from exc
        schema = synth_spec.schema()
    else:
        csv_path = ds["csv"]["path"]
        schema_doc = ds["csv"].get("schema", {})
        try:
            schema = SchemaSpec(
                categorical_fields=tuple(schema_doc.get("categorical_fields", ())),
                numerical_fields=tuple(schema_doc.get("numerical_fields", ())),
                entity_field=schema_doc.get("entity_field", "entity_id"),
                timestamp_field=schema_doc.get("timestamp_field", "timestamp_ms"),
                label_field=schema_doc.get("label_field", "label"),
                amount_field=schema_doc.get("amount_field", "amount"),
                event_id_field=schema_doc.get("event_id_field", "event_id"),
            )
        except ValueError as exc:
            raise ConfigError(f"dataset/csv/schema: {exc}") from exc

    sequences = tuple(
        _sequence_from_doc(item)
        for item in doc.get("sequences", list(DEFAULT_SEQUENCE_IDS))
    )

    try:
        run = _run_from_dict(doc.get("run", {}))
    except TypeError as exc:
        raise ConfigError(f"run: {exc}") from exc
    if run.pca_k is None and run.pca_variance_target is None:
        raise ConfigError("run: one of pca_k or pca_variance_target is required")

    fold_plan = FoldPlan(**doc.get("folds", {}))
    base = doc.get("baseline", {})
    baseline_spec = BaselineSpec(
        n_trees=base.get("n_trees", 300),
        max_depth=base.get("max_depth", 20),
        n_candidates=base.get("n_candidates", 5),
    )
    return ExperimentConfig(
        name=doc.get("name", "experiment"),
        dataset_kind=ds["kind"],
        synth_spec=synth_spec,
        csv_path=csv_path,
        schema=schema,
        fold_plan=fold_plan,
        n_seeds=doc.get("seeds", 35),
        sequences=sequences,
        run=run,
        baseline_enabled=base.get("enabled", True),
        baseline_spec=baseline_spec,
        baseline_seeds=base.get("seeds", doc.get("seeds", 35)),
        jobs=doc.get("jobs"),
        output_dir=doc["output_dir"],
    )


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ConfigError("config file must contain a mapping")
    return parse_config(doc)


# ---------------------------------------------------------------------------
# run command
# ---------------------------------------------------------------------------


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _record_lines(dataset: str, curve: LearningCurve) -> str:
    lines = []
    for p in curve.points:
        lines.append(
            json.dumps(
                {
                    "dataset": dataset,
                    "sequence": curve.sequence_id,
                    "fold": curve.fold_index,
                    "seed": curve.seed,
                    "iteration": p.iteration,
                    "sim_time_ms": p.sim_time_ms,
                    "n_labeled": p.n_labeled,
                    "n_positives": p.n_positives,
                    "metric_name": curve.metric_name,
                    "metric_value": p.metric_value,
                }
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")


def _load_folds(config: ExperimentConfig) -> list[FoldData]:
    if config.dataset_kind == "synth":
        events = synth_generate(config.synth_spec)
    else:
        events = load_csv(config.csv_path, config.schema)
    plan = config.fold_plan
    return slice_folds(
        events,
        n_folds=plan.n_folds,
        stride_weeks=plan.stride_weeks,
        train_weeks=plan.train_weeks,
        test_weeks=plan.test_weeks,
    )


def _execute_run(args) -> tuple[str, int, int, LearningCurve]:
    fold, schema, run_config, sequence, seed = args
    register_sequence(sequence)  # workers import a fresh registry
    cfg = dataclasses.replace(run_config, sequence_id=sequence.sequence_id, seed=seed)
    curve = run_experiment(fold, schema, cfg)
    return sequence.sequence_id, fold.fold_index, seed, curve


def _execute_baseline(args):
    fold, schema, run_config, spec, seed = args
    cfg = dataclasses.replace(run_config, seed=seed)
    result = train_optimistic_baseline(fold, schema, cfg, spec=spec)
    return fold.fold_index, seed, result


def cmd_run(config: ExperimentConfig, jobs: Optional[int] = None) -> int:
    out = Path(config.output_dir)
    runs_dir = out / "runs"
    base_dir = out / "baseline"
    runs_dir.mkdir(parents=True, exist_ok=True)
    base_dir.mkdir(parents=True, exist_ok=True)

    folds = _load_folds(config)
    tasks = [
        (fold, config.schema, config.run, sequence, seed)
        for fold in folds
        for sequence in config.sequences
        for seed in range(config.n_seeds)
    ]
    base_tasks = (
        [
            (fold, config.schema, config.run, config.baseline_spec, seed)
            for fold in folds
            for seed in range(config.baseline_seeds)
        ]
        if config.baseline_enabled
        else []
    )

    jobs = jobs or config.jobs or os.cpu_count() or 1
    if jobs > 1 and len(tasks) + len(base_tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            run_results = list(pool.map(_execute_run, tasks))
            base_results = list(pool.map(_execute_baseline, base_tasks))
    else:
        run_results = [_execute_run(t) for t in tasks]
        base_results = [_execute_baseline(t) for t in base_tasks]

    for sequence, fold_idx, seed, curve in run_results:
        name = f"{config.name}__{sequence}__fold{fold_idx}__seed{seed}.ndjson"
        _atomic_write(runs_dir / name, _record_lines(config.name, curve))

    for fold_idx, seed, result in base_results:
        name = f"{config.name}__fold{fold_idx}__seed{seed}.json"
        doc = {
            "dataset": config.name,
            "fold": fold_idx,
            "seed": seed,
            "metric_name": config.run.metric.label,
            "metric_value": result.metric_value,
            "n_train_labels": result.n_train_labels,
            "chosen": {k: v for k, v in result.chosen.items()},
        }
        _atomic_write(base_dir / name, json.dumps(doc, sort_keys=True) + "\n")

    manifest = json.dumps(config.to_dict(), sort_keys=True, indent=2)
    _atomic_write(out / "manifest.json", manifest + "\n")
    return 0


# ---------------------------------------------------------------------------
# report command
# ---------------------------------------------------------------------------


def _read_runs(runs_dir: Path) -> dict:
    """records[(dataset, sequence, fold, seed)] -> list of record dicts."""
    records: dict = {}
    for path in sorted(runs_dir.glob("*.ndjson")):
        for line in path.read_text(encoding="utf-8").splitlines():
            rec = json.loads(line)
            key = (rec["dataset"], rec["sequence"], rec["fold"], rec["seed"])
            records.setdefault(key, []).append(rec)
    return records


def _curve_from_records(recs: list[dict]) -> LearningCurve:
    recs = sorted(recs, key=lambda r: r["iteration"])
    curve = LearningCurve(
        sequence_id=recs[0]["sequence"],
        seed=recs[0]["seed"],
        fold_index=recs[0]["fold"],
        metric_name=recs[0]["metric_name"],
    )
    for r in recs:
        curve.points.append(
            CurvePoint(
                iteration=r["iteration"],
                sim_time_ms=r["sim_time_ms"],
                n_labeled=r["n_labeled"],
                n_positives=r["n_positives"],
                metric_value=r["metric_value"],
                stage="",
            )
        )
    return curve


def _read_baselines(base_dir: Path) -> dict:
    """medians[(dataset, fold)] -> median metric over seeds."""
    values: dict = {}
    if not base_dir.is_dir():
        return {}
    for path in sorted(base_dir.glob("*.json")):
        doc = json.loads(path.read_text(encoding="utf-8"))
        values.setdefault((doc["dataset"], doc["fold"]), []).append(
            doc["metric_value"]
        )
    return {k: float(np.median(v)) for k, v in values.items()}


def _format_table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [
        max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
        for i, h in enumerate(headers)
    ]
    def fmt(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    sep = "  ".join("-" * w for w in widths)
    return "\n".join([fmt(headers), sep, *[fmt(r) for r in rows]])


def build_report(results_dir) -> str:
    """Ranking tables plus the 3-stage-vs-2-stage positives-boost table."""
    results_dir = Path(results_dir)
    records = _read_runs(results_dir / "runs")
    if not records:
        raise FileNotFoundError(f"no run records under {results_dir}/runs")
    baselines = _read_baselines(results_dir / "baseline")

    datasets = sorted({k[0] for k in records})
    chunks = []
    gaps = []
    per_dataset_avg_rank: dict = {}
    for dataset in datasets:
        keys = [k for k in records if k[0] == dataset]
        sequences = sorted({k[1] for k in keys})
        folds = sorted({k[2] for k in keys})
        areas: dict = {}
        finals: dict = {}
        variances: dict = {}
        for fold in folds:
            baseline = baselines.get((dataset, fold))
            if baseline is None or baseline <= 0:
                gaps.append(f"{dataset}: fold {fold} has no positive baseline median")
                continue
            a_row, f_row, v_row = {}, {}, {}
            for seq in sequences:
                curves = [
                    _curve_from_records(records[k])
                    for k in keys
                    if k[1] == seq and k[2] == fold
                ]
                if not curves:
                    gaps.append(f"{dataset}: missing runs for {seq} fold {fold}")
                    continue
                try:
                    bands = aggregate_bands(curves)
                except ValueError as exc:
                    gaps.append(f"{dataset}: {seq} fold {fold}: {exc}")
                    continue
                a_row[seq] = norm_area_p50(bands, baseline)
                v_row[seq] = var_area(bands, baseline)
                f_row[seq] = norm_final_p50(curves, baseline)
            if sorted(a_row) == sequences:
                areas[fold] = a_row
                finals[fold] = f_row
                variances[fold] = v_row
            else:
                missing = sorted(set(sequences) - set(a_row))
                if missing:
                    gaps.append(
                        f"{dataset}: fold {fold} dropped from ranking "
                        f"(missing {', '.join(missing)})"
                    )
        if not areas:
            continue
        summaries = rank_policies(areas, finals, variances)
        per_dataset_avg_rank[dataset] = {s.policy: s.avg_rank for s in summaries}
        fold_list = sorted(areas)
        headers = ["sequence"]
        for f in fold_list:
            headers += [f"area_f{f}", f"rank_f{f}", f"final_f{f}"]
        headers += ["avg_rank", "avg_var"]
        rows = []
        for s in summaries:
            row = [s.policy]
            for f in fold_list:
                row += [
                    f"{s.per_fold_area[f]:.4f}",
                    f"{s.per_fold_rank[f]:g}",
                    f"{s.per_fold_final[f]:.4f}",
                ]
            row += [f"{s.avg_rank:.2f}", f"{s.avg_var:.4f}"]
            rows.append(row)
        chunks.append(f"== dataset: {dataset} ==\n" + _format_table(headers, rows))

        boost_rows = _boost_rows(records, dataset, sequences, folds)
        if boost_rows:
            chunks.append(
                f"== dataset: {dataset} | positives boost (3-stage vs 2-stage) ==\n"
                + _format_table(
                    ["hot_policy", "fold", "iteration", "boost"], boost_rows
                )
            )

    if len(per_dataset_avg_rank) > 1:
        from .evaluation import average_ranks_over_datasets

        overall = average_ranks_over_datasets(per_dataset_avg_rank)
        rows = [
            [p, *[f"{per_dataset_avg_rank[d][p]:.2f}" for d in datasets], f"{v:.2f}"]
            for p, v in sorted(overall.items(), key=lambda kv: kv[1])
        ]
        chunks.append(
            "== overall ranking ==\n"
            + _format_table(["sequence", *datasets, "avg"], rows)
        )
    if gaps:
        chunks.append("== gaps ==\n" + "\n".join(gaps))
    return "\n\n".join(chunks) + "\n"


_BOOST_PAIRS = {
    "unc_entropy": ("random_odal_entropy", "random_entropy"),
    "emc": ("random_odal_emc", "random_emc"),
    "qbc": ("random_odal_qbc", "random_qbc"),
}


def _boost_rows(records, dataset, sequences, folds) -> list[list[str]]:
    rows = []
    for hot, (three, two) in sorted(_BOOST_PAIRS.items()):
        if three not in sequences or two not in sequences:
            continue
        per_iteration: dict = {}
        for fold in folds:
            c3 = [
                _curve_from_records(records[k])
                for k in records
                if k[0] == dataset and k[1] == three and k[2] == fold
            ]
            c2 = [
                _curve_from_records(records[k])
                for k in records
                if k[0] == dataset and k[1] == two and k[2] == fold
            ]
            if not c3 or not c2:
                continue
            common = min(len(c.points) for c in c3 + c2)
            for iteration in range(2, min(common, 6) + 1):
                p3 = [c.positives_at(iteration) for c in c3]
                p2 = [c.positives_at(iteration) for c in c2]
                boost = positives_boost(p3, p2)
                if boost is not None:
                    per_iteration.setdefault(iteration, []).append(boost)
                rows.append(
                    [
                        hot,
                        str(fold),
                        str(iteration),
                        "n/a" if boost is None else f"{boost:.3f}",
                    ]
                )
        for iteration, values in sorted(per_iteration.items()):
            rows.append(
                [hot, "avg", str(iteration), f"{float(np.mean(values)):.3f}"]
            )
    return rows


def cmd_report(results_dir, out_path=None) -> int:
    text = build_report(results_dir)
    if out_path is None:
        sys.stdout.write(text)
    else:
        _atomic_write(Path(out_path), text)
    return 0


# ---------------------------------------------------------------------------
# synth command
# ---------------------------------------------------------------------------


def cmd_synth(spec_file, out_path) -> int:
    with open(spec_file, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ConfigError("synth spec file must contain a mapping")
    if "preset" in doc:
        preset = doc.pop("preset")
        if preset not in SYNTH_PRESETS:
            raise ConfigError(f"unknown preset {preset!r}")
        spec = dataclasses.replace(SYNTH_PRESETS[preset], **doc)
    else:
        try:
            spec = SynthSpec(**doc)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
    events = synth_generate(spec)
    write_csv(events, out_path, spec.schema())
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coldstart-al",
        description="Streaming active-learning experiments on imbalanced data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("--config", required=True, help="YAML experiment config")
    p_run.add_argument("--out", help="override the config output_dir")
    p_run.add_argument("--jobs", type=int, help="parallel workers (default: cores)")
    p_run.add_argument("--seeds", type=int, help="override the seed count")
    p_run.add_argument(
        "--sequences", help="comma-separated policy-sequence ids to run"
    )

    p_rep = sub.add_parser("report", help="aggregate results into ranking tables")
    p_rep.add_argument("results_dir", help="output_dir of a previous run")
    p_rep.add_argument("--out", help="write the report to a file instead of stdout")

    p_syn = sub.add_parser("synth", help="materialize a synthetic dataset to CSV")
    p_syn.add_argument("--spec", required=True, help="YAML synth spec (or preset)")
    p_syn.add_argument("--out", required=True, help="CSV output path")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = load_config(args.config)
            if args.out:
                config = dataclasses.replace(config, output_dir=args.out)
            if args.seeds:
                config = dataclasses.replace(config, n_seeds=args.seeds)
            if args.sequences:
                wanted = tuple(
                    _sequence_from_doc(s.strip()) for s in args.sequences.split(",")
                )
                config = dataclasses.replace(config, sequences=wanted)
            return cmd_run(config, jobs=args.jobs)
        if args.command == "report":
            return cmd_report(args.results_dir, args.out)
        if args.command == "synth":
            return cmd_synth(args.spec, args.out)
        raise AssertionError("unreachable")
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
