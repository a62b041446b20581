"""Pipeline entrypoint: ingest, build-panel, explore, train, evaluate,
predict, serve, report.

Each stage consumes only on-disk outputs of prior stages and writes a
manifest (config, seeds, content hashes), so runs are restartable and two
runs with identical manifests produce identical outputs.

Exit codes: 0 success, 1 usage, 2 data error, 3 internal.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

from . import analysis, artifacts, ingest, panel, service
from .config import RunConfig, load_config, stage_seed
from .errors import DataError, UsageError
from .evaluation import (
    EvaluationReport,
    compare_models,
    cross_validate,
    evaluate_model,
    render_comparison,
)
from .panel import default_schema


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _file_hash(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()[:16]


def _write_manifest(config: RunConfig, stage: str, outputs: dict) -> str:
    os.makedirs(config.out_dir, exist_ok=True)
    manifest = {
        "stage": stage,
        "config": config.to_manifest(),
        "outputs": {name: {"path": path, "sha256_16": _file_hash(path)}
                    for name, path in sorted(outputs.items())},
    }
    path = os.path.join(config.out_dir, f"manifest_{stage}.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _load_panel_pair(config: RunConfig):
    split_dir = os.path.join(config.out_dir, "split")
    train = panel.read_panel(os.path.join(split_dir, "train.csv"))
    test = panel.read_panel(os.path.join(split_dir, "test.csv"))
    return train, test


# -- stages ------------------------------------------------------------------

def cmd_ingest(config: RunConfig) -> dict:
    missing = [k for k in ("rsvnet", "nwss", "meteo", "airquality")
               if k not in config.sources]
    if missing:
        raise UsageError(f"config.sources missing {', '.join(missing)}")
    result = ingest.ingest_snapshot(config.sources, config.roster,
                                    config.min_days, config.max_reject_rate)
    out = ingest.write_normalized(result,
                                  os.path.join(config.out_dir, "normalized"))
    print(f"ingested {len(result.rates)} rate rows, "
          f"{len(result.wastewater)} wastewater state-weeks, "
          f"{len(result.meteo_weekly)} meteo state-weeks, "
          f"{len(result.air_weekly)} air-quality state-weeks; "
          f"{len(result.rejects)} rejected rows")
    return out


def cmd_build_panel(config: RunConfig) -> dict:
    normalized = ingest.read_normalized(
        os.path.join(config.out_dir, "normalized"))
    rows, gaps = panel.build_panel(
        normalized.rates, normalized.wastewater, normalized.meteo_weekly,
        normalized.air_weekly, config.roster,
        exclude_states=config.exclude_states)
    panel_path = os.path.join(config.out_dir, "panel.csv")
    gaps_path = os.path.join(config.out_dir, "completeness.csv")
    panel.write_panel(rows, panel_path)
    panel.write_completeness(gaps, gaps_path)
    split = panel.stratified_split(rows, config.train_fraction,
                                   config.effective_split_seed())
    split_paths = panel.write_split(split,
                                    os.path.join(config.out_dir, "split"))
    if config.exclude_states:
        print(f"note: states excluded from the panel: "
              f"{', '.join(config.exclude_states)}")
    print(f"panel: {len(rows)} rows ({len(gaps)} state-weeks incomplete); "
          f"split {len(split.train)}/{len(split.test)} "
          f"at {config.train_fraction:.0%}, seed "
          f"{config.effective_split_seed()}")
    return {"panel": panel_path, "completeness": gaps_path, **split_paths}


def cmd_explore(config: RunConfig) -> dict:
    rows = panel.read_panel(os.path.join(config.out_dir, "panel.csv"))
    normalized = ingest.read_normalized(
        os.path.join(config.out_dir, "normalized"))
    out_dir = os.path.join(config.out_dir, "explore")
    os.makedirs(out_dir, exist_ok=True)
    outputs = {}

    schema = default_schema()
    numeric = [n for n in schema.names if n != "rsv_season"]
    matrix = analysis.correlation_matrix(rows, numeric)
    outputs["correlation"] = os.path.join(out_dir, "correlation.csv")
    analysis.write_correlation_csv(matrix, outputs["correlation"])

    summaries = [analysis.distribution_summary(rows, v)
                 for v in ("Rate",) + tuple(numeric)]
    outputs["distributions"] = os.path.join(out_dir, "distributions.csv")
    analysis.write_distributions_csv(summaries, outputs["distributions"])

    for dim in ("sex", "age", "race", "state"):
        series = analysis.time_trend_extract(normalized.rates, dim)
        outputs[f"trend_{dim}"] = os.path.join(out_dir, f"trend_{dim}.csv")
        analysis.write_trend_csv(series, outputs[f"trend_{dim}"])

    full_matrix, selected = analysis.select_model_predictors(
        rows, normalized.meteo_weekly)
    outputs["correlation_full"] = os.path.join(out_dir,
                                               "correlation_full.csv")
    analysis.write_correlation_csv(full_matrix, outputs["correlation_full"])
    outputs["selected_predictors"] = os.path.join(
        out_dir, "selected_predictors.json")
    with open(outputs["selected_predictors"], "w", encoding="utf-8") as fh:
        json.dump({"threshold": analysis.PRUNE_THRESHOLD,
                   "preferences": list(analysis.KEEP_PREFERENCES),
                   "selected": selected}, fh, indent=2)
        fh.write("\n")

    print(f"explore outputs in {out_dir}")
    return outputs


def _training_metadata(config: RunConfig, kind: str, cv_result,
                       train_path: str) -> dict:
    return {
        "panel_snapshot_id": _file_hash(train_path),
        "split_seed": config.effective_split_seed(),
        "train_fraction": config.train_fraction,
        "cv_folds": config.cv_folds,
        "best_params": cv_result.best_params,
        "cv_table": cv_result.table,
        "learner_seed": stage_seed(config.seed, kind),
    }


def cmd_train(config: RunConfig) -> dict:
    train_rows, _ = _load_panel_pair(config)
    train_path = os.path.join(config.out_dir, "split", "train.csv")
    X, y = panel.panel_to_xy(train_rows)
    schema = default_schema()
    outputs = {}
    for kind in ("cart", "forest", "boosting"):
        cv_result = cross_validate(kind, config.grids[kind], X, y,
                                   k=config.cv_folds,
                                   seed=stage_seed(config.seed, kind),
                                   schema=schema)
        path = os.path.join(config.out_dir, f"{kind}.json")
        artifact_id = artifacts.save_artifact(
            cv_result.model, kind, schema,
            _training_metadata(config, kind, cv_result, train_path), path)
        outputs[kind] = path
        print(f"{kind}: best {cv_result.best_params} -> {path} "
              f"({artifact_id[:16]})")
    return outputs


def _write_roc_csv(report, path) -> None:
    import csv

    from .panel import RiskClass

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("positive_class", "fpr", "tpr"))
        for k, points in enumerate(report.roc_points or []):
            label = RiskClass(k).label
            for fpr, tpr in points:
                writer.writerow((label, repr(fpr), repr(tpr)))


def cmd_evaluate(config: RunConfig) -> dict:
    _, test_rows = _load_panel_pair(config)
    X_test, y_test = panel.panel_to_xy(test_rows)
    outputs = {}
    reports = []
    for kind in ("cart", "forest", "boosting"):
        path = os.path.join(config.out_dir, f"{kind}.json")
        artifact = artifacts.load_artifact(path)
        report = evaluate_model(artifact.model, kind, artifact.artifact_id,
                                X_test, y_test)
        reports.append(report)
        report_path = os.path.join(config.out_dir, f"report_{kind}.json")
        with open(report_path, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        artifacts.attach_report(path, report.to_dict())
        outputs[f"report_{kind}"] = report_path
        roc_path = os.path.join(config.out_dir, f"roc_{kind}.csv")
        _write_roc_csv(report, roc_path)
        outputs[f"roc_{kind}"] = roc_path
        print(f"{kind}: accuracy {report.accuracy:.3f}, "
              f"macro F1 {report.macro_f1:.3f}, "
              f"AUC {['%.3f' % a for a in report.auc]}")

    comparison = compare_models(reports)
    comparison_json = os.path.join(config.out_dir, "comparison.json")
    with open(comparison_json, "w", encoding="utf-8") as fh:
        json.dump(comparison, fh, indent=2, sort_keys=True)
        fh.write("\n")
    comparison_txt = os.path.join(config.out_dir, "comparison.txt")
    with open(comparison_txt, "w", encoding="utf-8") as fh:
        fh.write(render_comparison(comparison) + "\n")
    outputs["comparison"] = comparison_json
    outputs["comparison_txt"] = comparison_txt
    if config.exclude_states:
        print(f"note: evaluation on a panel excluding "
              f"{', '.join(config.exclude_states)}")
    return outputs


def cmd_predict(config: RunConfig, artifact_path: str, features_path: str,
                state: str) -> dict:
    from .learners import predict_class, predict_proba
    from .panel import RiskClass

    artifact = artifacts.load_artifact(artifact_path)
    with open(features_path, encoding="utf-8") as fh:
        features = json.load(fh)
    schema = artifact.schema
    missing = [n for n in schema.names if n not in features]
    unknown = [n for n in features if n not in schema.names]
    if missing or unknown:
        raise DataError(
            f"feature file mismatch; missing: {missing}, unknown: {unknown}")
    vector = [float(features[n]) for n in schema.names]
    probs = predict_proba(artifact.model, vector)
    risk = predict_class(artifact.model, vector)
    response = {
        "state": state,
        "risk_class": risk.label,
        "probabilities": {RiskClass(k).label: float(probs[k])
                          for k in range(len(probs))},
        "model_id": artifact.artifact_id,
    }
    print(json.dumps(response, indent=2, sort_keys=True))
    return {}


def cmd_serve(config: RunConfig, artifact_path: str) -> dict:
    artifact = artifacts.load_artifact(artifact_path)
    rows = panel.read_panel(os.path.join(config.out_dir, "panel.csv"))
    service.serve(artifact, rows, config.bind_address,
                  roster=config.roster, cors_origins=config.cors_origins)
    return {}


def cmd_report(config: RunConfig) -> dict:
    reports = []
    for kind in ("cart", "forest", "boosting"):
        path = os.path.join(config.out_dir, f"report_{kind}.json")
        if not os.path.exists(path):
            raise DataError(f"missing {path}; run evaluate first")
        with open(path, encoding="utf-8") as fh:
            reports.append(EvaluationReport.from_dict(json.load(fh)))
    print(render_comparison(compare_models(reports)))
    return {}


# -- argument handling ----------------------------------------------------------

def _build_parser() -> _Parser:
    parser = _Parser(prog="rsv-sentinel",
                     description="weekly RSV hospitalization risk pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, extra=None):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="YAML run config")
        p.add_argument("--seed", type=int, default=None,
                       help="override the top-level seed")
        p.add_argument("--out", default=None, help="override output directory")
        p.add_argument("--exclude-states", default=None,
                       help="comma-separated states to drop, e.g. CO,NM,UT")
        if extra:
            extra(p)
        return p

    add("ingest", "parse the four snapshots into normalized weekly tables")
    add("build-panel", "join sources into the modeling panel and split it")
    add("explore", "correlation, distribution, and trend extracts")
    add("train", "cross-validated training of cart, forest, and boosting")
    add("evaluate", "score the three artifacts on the held-out test set")
    add("predict", "one-shot prediction from a feature file",
        lambda p: (p.add_argument("--artifact", required=True),
                   p.add_argument("--features", required=True,
                                  help="JSON file of 15 named values"),
                   p.add_argument("--state", default="CO")))
    add("serve", "start the HTTP prediction service",
        lambda p: p.add_argument("--artifact", required=True))
    add("report", "render the model comparison table")
    return parser


def _apply_overrides(config: RunConfig, args) -> RunConfig:
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.out_dir = args.out
    if args.exclude_states is not None:
        states = tuple(s.strip() for s in args.exclude_states.split(",")
                       if s.strip())
        config.exclude_states = states
    return config


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        config = _apply_overrides(load_config(args.config), args)
        config.validate()

        if args.command == "ingest":
            outputs = cmd_ingest(config)
        elif args.command == "build-panel":
            outputs = cmd_build_panel(config)
        elif args.command == "explore":
            outputs = cmd_explore(config)
        elif args.command == "train":
            outputs = cmd_train(config)
        elif args.command == "evaluate":
            outputs = cmd_evaluate(config)
        elif args.command == "predict":
            outputs = cmd_predict(config, args.artifact, args.features,
                                  args.state)
        elif args.command == "serve":
            outputs = cmd_serve(config, args.artifact)
        elif args.command == "report":
            outputs = cmd_report(config)
        else:  # pragma: no cover - argparse enforces the choices
            raise UsageError(f"unknown command {args.command!r}")

        if outputs:
            manifest = _write_manifest(config, args.command, outputs)
            print(f"manifest: {manifest}")
        return 0
    except UsageError as exc:
        print(json.dumps({"error": "usage", "detail": str(exc)}),
              file=sys.stderr)
        return 1
    except DataError as exc:
        print(json.dumps({"error": "data",
                          "type": type(exc).__name__,
                          "detail": str(exc)}), file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - boundary of the process
        print(json.dumps({"error": "internal",
                          "type": type(exc).__name__,
                          "detail": str(exc)}), file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
