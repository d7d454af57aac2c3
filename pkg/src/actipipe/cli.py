"""Command-line entry point wiring the pipeline end to end.

Subcommands: synth, ingest, segment, features, evaluate, select,
correlate, metrics, config.  Exit codes: 0 success, 2 input format,
3 empty data, 4 degenerate labels, 1 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import correlate as correlate_mod
from . import features as features_mod
from . import ingest, model, synth
from .config import RunConfig
from .errors import DegenerateLabelsError, EmptySeriesError, FormatError
from .ingest import SUBJECTIVE_FEATURES, sc_to_class
from .plots import render_segmentation_svg
from .segmentation import segment_pipeline

log = logging.getLogger("actipipe")

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_FORMAT = 2
EXIT_EMPTY = 3
EXIT_DEGENERATE = 4

GROUP_CHOICES = ("activity", "rest", "both", "subjective", "all")


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_json(args.config) if getattr(args, "config", None) else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg.synth.seed = args.seed
    return cfg


def _out_dir(args) -> Path:
    out = Path(getattr(args, "out", None) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, obj) -> None:
    with path.open("w") as handle:
        json.dump(obj, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _write_segments_csv(path: Path, segmentations) -> None:
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["participant_id", "kind", "start_minute", "end_minute"])
        for seg in segmentations:
            for segment in seg.segments:
                start, end = seg.source_span(segment)
                writer.writerow([seg.participant_id, segment.kind, start, end])


def cmd_config_init(args) -> int:
    out = Path(args.path)
    RunConfig().to_json(out)
    print(f"wrote default config to {out}")
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    dataset, truths = synth.generate_cohort(cfg.synth)
    ordered = sorted(dataset.series)
    ingest.write_actigram_csv(out / "actigrams.csv", [dataset.series[p] for p in ordered])
    ingest.write_subjects_csv(out / "subjects.csv", dataset.subjects)
    _write_segments_csv(out / "truth_segments.csv", [truths[p] for p in ordered])
    counts = dataset.class_counts()
    print(f"synthesized {len(ordered)} subjects; FA counts {counts['fa']}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    dataset = ingest.load_dataset(args.subjects, args.actigrams)
    out = _out_dir(args)
    summary = {
        "n_subjects": len(dataset.subjects),
        "class_counts": dataset.class_counts(),
        "gaps": {pid: series.gaps() for pid, series in sorted(dataset.series.items())},
    }
    _write_json(out / "dataset_summary.json", summary)
    print(f"loaded {summary['n_subjects']} subjects; "
          f"FA counts {summary['class_counts']['fa']}; "
          f"SC class counts {summary['class_counts']['sc_class']}")
    return EXIT_OK


def _segment_one(payload):
    pid, minutes, counts, seg_cfg = payload
    series = ingest.ActigramSeries(pid, None, minutes, counts)
    return segment_pipeline(series, seg_cfg)


def _segment_all(series_map, seg_cfg, jobs: int):
    ordered = sorted(series_map)
    payloads = [(pid, series_map[pid].minutes, series_map[pid].counts, seg_cfg)
                for pid in ordered]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_segment_one, payloads))
    return [_segment_one(p) for p in payloads]


def cmd_segment(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    series_map = ingest.parse_actigrams(args.actigrams)
    segmentations = _segment_all(series_map, cfg.segmentation, args.jobs)
    _write_segments_csv(out / "segments.csv", segmentations)
    if args.svg:
        for seg in segmentations:
            render_segmentation_svg(out / f"segmentation_{seg.participant_id}.svg",
                                    seg, cfg.segmentation)
    print(f"segmented {len(segmentations)} participants -> {out / 'segments.csv'}")
    return EXIT_OK


def _extract_one(payload):
    pid, minutes, counts, seg_cfg, grids = payload
    series = ingest.ActigramSeries(pid, None, minutes, counts)
    seg = segment_pipeline(series, seg_cfg)
    return features_mod.extract_all(seg, grids)


def extract_features(series_map, seg_cfg, grids, jobs: int = 1):
    ordered = sorted(series_map)
    payloads = [(pid, series_map[pid].minutes, series_map[pid].counts, seg_cfg, grids)
                for pid in ordered]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_extract_one, payloads))
    return [_extract_one(p) for p in payloads]


def cmd_features(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    series_map = ingest.parse_actigrams(args.actigrams)
    vectors = extract_features(series_map, cfg.segmentation, cfg.grids, args.jobs)
    features_mod.write_feature_csv(out / "features.csv", vectors, cfg.grids)
    features_mod.write_grid_sidecar(out / "feature_grids.json", cfg.grids)
    print(f"extracted {len(vectors)} feature vectors -> {out / 'features.csv'}")
    return EXIT_OK


def build_matrix(feature_path, subjects_path, group: str, target: str):
    """Assemble (X, names, y, ids) for the requested feature group and target."""
    subjects = {rec.participant_id: rec for rec in ingest.parse_subjects(subjects_path)}
    actimetric_names: list[str] = []
    if group != "subjective":
        if feature_path is None:
            raise FormatError("this feature group requires --features")
        ids, names, matrix = features_mod.read_feature_csv(feature_path)
        if group in ("activity", "rest"):
            keep = [i for i, n in enumerate(names) if n.startswith(group + ".")]
        else:
            keep = list(range(len(names)))
        actimetric_names = [names[i] for i in keep]
        matrix = matrix[:, keep]
    else:
        ids = sorted(subjects)
        matrix = np.empty((len(ids), 0))

    unknown = [pid for pid in ids if pid not in subjects]
    if unknown:
        raise FormatError(f"feature rows without subject records: {unknown}")

    columns = list(actimetric_names)
    blocks = [matrix]
    if group in ("subjective", "all"):
        subj_block = np.array([
            [_subject_value(subjects[pid], name) for name in SUBJECTIVE_FEATURES]
            for pid in ids
        ])
        columns += SUBJECTIVE_FEATURES
        blocks.append(subj_block)
    x = np.hstack(blocks)

    if target == "fa":
        y = np.array([subjects[pid].fa for pid in ids], dtype=np.int64)
    else:
        y = np.array([sc_to_class(subjects[pid].sc) for pid in ids], dtype=np.int64)
    if len(set(y.tolist())) < 2:
        raise DegenerateLabelsError(f"target {target!r} has a single class")
    return x, columns, y, ids


def _subject_value(rec, name: str) -> float:
    value = getattr(rec, name)
    return float("nan") if value is None else float(value)


def cmd_evaluate(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    target = args.target or cfg.model.target
    if args.confusion:
        with open(args.confusion) as handle:
            obj = json.load(handle)
        cm = model.ConfusionMatrix(obj["labels"], np.asarray(obj["confusion"]))
        report = model.evaluate_confusion(cm)
        _write_json(out / "metrics_report.json", report.to_dict())
        print(f"MCC {report.mcc:.4f} accuracy {report.accuracy:.4f}")
        return EXIT_OK
    x, columns, y, _ids = build_matrix(args.features, args.subjects, args.group, target)
    report = model.loocv(x, y, cfg.model)
    payload = {
        "target": target,
        "group": args.group,
        "n_features": len(columns),
        "model": {"k_neighbors": cfg.model.k_neighbors, "leakage_mode": cfg.model.leakage_mode},
        "report": report.to_dict(),
    }
    path = out / f"eval_{target}_{args.group}.json"
    _write_json(path, payload)
    print(f"target={target} group={args.group} MCC {report.mcc:.4f} "
          f"accuracy {report.accuracy:.4f} -> {path}")
    return EXIT_OK


def cmd_select(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    target = args.target or cfg.model.target
    x, columns, y, _ids = build_matrix(args.features, args.subjects, args.group, target)
    result = model.forward_select(x, y, columns, cfg.model)
    payload = {
        "target": target,
        "group": args.group,
        "selection": result.to_dict(),
    }
    path = out / f"selection_{target}_{args.group}.json"
    _write_json(path, payload)
    steps = " -> ".join(f"{f} ({m:.3f})" for f, m in result.trajectory) or "(none)"
    print(f"target={target} group={args.group} trajectory: {steps}")
    print(f"final MCC {result.final_report.mcc:.4f} -> {path}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    out = _out_dir(args)
    with open(args.confusion) as handle:
        obj = json.load(handle)
    cm = model.ConfusionMatrix(obj["labels"], np.asarray(obj["confusion"]))
    report = model.evaluate_confusion(cm)
    _write_json(out / "metrics_report.json", report.to_dict())
    print(f"MCC {report.mcc:.4f} accuracy {report.accuracy:.4f}")
    return EXIT_OK


def cmd_correlate(args) -> int:
    out = _out_dir(args)
    ids, names, matrix = features_mod.read_feature_csv(args.features)
    subjects = {rec.participant_id: rec for rec in ingest.parse_subjects(args.subjects)}
    unknown = [pid for pid in ids if pid not in subjects]
    if unknown:
        raise FormatError(f"feature rows without subject records: {unknown}")
    if args.feature_names:
        selected = [n.strip() for n in args.feature_names.split(",") if n.strip()]
    elif args.selection:
        with open(args.selection) as handle:
            selected = json.load(handle)["selection"]["chosen_features"]
        selected = [n for n in selected if n in names]
    else:
        raise FormatError("correlate needs --feature-names or --selection")
    subjective = np.array([
        [_subject_value(subjects[pid], name) for name in correlate_mod.SUBJECTIVE_COLUMNS]
        for pid in ids
    ])
    grid = correlate_mod.correlation_table(matrix, names, subjective, selected)
    path = out / "correlation.csv"
    correlate_mod.write_correlation_csv(path, grid)
    print(f"wrote correlation table for {len(selected)} features -> {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="actipipe",
                                     description="actigraphy segmentation / feature / KNN pipeline")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", help="run-config JSON path")
        p.add_argument("--out", help="output directory (default: cwd)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--jobs", type=int, default=1, help="participant-level parallelism")

    p = sub.add_parser("synth", help="generate a synthetic cohort")
    common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="validate a dataset and report class counts")
    common(p)
    p.add_argument("--subjects", required=True)
    p.add_argument("--actigrams", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("segment", help="segment actigrams into activity/rest")
    common(p)
    p.add_argument("--actigrams", required=True)
    p.add_argument("--svg", action="store_true", help="also render one SVG per participant")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("features", help="extract the 256-entry feature vectors")
    common(p)
    p.add_argument("--actigrams", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("evaluate", help="LOOCV evaluation (or metrics-only from a confusion matrix)")
    common(p)
    p.add_argument("--features")
    p.add_argument("--subjects")
    p.add_argument("--confusion", help="metrics-only mode: confusion-matrix JSON")
    p.add_argument("--group", choices=GROUP_CHOICES, default="both")
    p.add_argument("--target", choices=("fa", "sc"))
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("select", help="greedy forward feature selection")
    common(p)
    p.add_argument("--features")
    p.add_argument("--subjects", required=True)
    p.add_argument("--group", choices=GROUP_CHOICES, default="both")
    p.add_argument("--target", choices=("fa", "sc"))
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("correlate", help="actimetric vs subjective Pearson table")
    common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--subjects", required=True)
    p.add_argument("--feature-names", help="comma-separated canonical feature names")
    p.add_argument("--selection", help="selection JSON produced by `select`")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("metrics", help="confusion-matrix JSON -> metric report")
    common(p, config=False)
    p.add_argument("--confusion", required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("config", help="configuration helpers")
    csub = p.add_subparsers(dest="config_command", required=True)
    ci = csub.add_parser("init", help="write the default run config")
    ci.add_argument("path", nargs="?", default="actipipe_config.json")
    ci.set_defaults(func=cmd_config_init)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except EmptySeriesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except DegenerateLabelsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except Exception as exc:  # pragma: no cover - defensive
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
