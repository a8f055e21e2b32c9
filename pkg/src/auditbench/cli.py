"""``auditbench`` command line.

Exit codes: 0 success, 1 stage failure, 2 invalid configuration or arguments.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import pandas as pd

from . import persist
from .config import DETECTORS, ENCODINGS, ConfigError, PipelineConfig, parse_tau_grid
from .evaluation import (
    DEFAULT_TAU_GRID, STRATEGIES, ConfusionCounts, SplitSpec, auc, flag_top, weighted_f1,
)
from .pipeline import (
    StageError, generation_inputs, stage_encode, stage_generate, stage_score, stage_split, stage_sweep, stage_train,
    run_pipeline, write_manifest,
)

log = logging.getLogger("auditbench")


def _param(text: str):
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def _load_json(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def cmd_generate(args) -> int:
    gen = _load_json(args.config)
    gen = gen.get("dataset", {}).get("generate", gen)
    if args.rows is not None:
        gen["n_rows"] = args.rows
    if args.base_csv:
        gen["base_csv"] = args.base_csv
    anomaly = dict(gen.get("anomaly", {}))
    for key in ("missing_rate", "target_ratio"):
        if getattr(args, key) is not None:
            anomaly[key] = getattr(args, key)
    if args.with_dates:
        anomaly["with_dates"] = True
    gen["anomaly"] = anomaly
    try:
        generation_inputs(gen, args.seed)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc
    manifest = stage_generate(gen, args.seed, args.out)
    print(f"wrote {manifest['n_rows']} rows to {args.out} (anomaly ratio {manifest['achieved_ratio']:.4f})")
    return 0


def cmd_encode(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    split_path = Path(args.split) if args.split else out / "split.json"
    if not args.split:
        stage_split(args.data, args.label_column, SplitSpec(args.strategy, args.seed), split_path)
    kinds = _load_json(args.kinds) if args.kinds else None
    params = dict(args.param or [])
    paths = stage_encode(args.data, split_path, args.encoding, kinds or {}, params, args.seed, out)
    for key, p in paths.items():
        print(f"{key}: {p}")
    return 0


def cmd_train(args) -> int:
    stage_train(args.encoded, args.detector, dict(args.param or []), args.seed, args.out, args.zscore_column)
    print(f"model written to {args.out}")
    return 0


def cmd_score(args) -> int:
    stage_score(args.model, args.encoded, args.out)
    write_manifest(Path(args.out).with_suffix(".manifest.json"), "score", None,
                   inputs=[args.model, args.encoded], outputs=[args.out])
    print(f"scores written to {args.out}")
    return 0


def cmd_eval(args) -> int:
    frame = pd.read_csv(args.scores)
    scores, labels = frame["score"].to_numpy(), frame["label"].to_numpy()
    tau = args.tau if args.tau is not None else float(labels.mean())
    counts = ConfusionCounts.from_predictions(labels, flag_top(scores, tau))
    result = {"auc": auc(scores, labels), "tau": tau, "weighted_f1": weighted_f1(counts),
              "tp": counts.tp, "fp": counts.fp, "tn": counts.tn, "fn": counts.fn}
    text = json.dumps(result, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def cmd_sweep(args) -> int:
    grid = parse_tau_grid(args.tau_grid) if args.tau_grid else list(DEFAULT_TAU_GRID)
    report = stage_sweep(args.scores, grid, args.out_prefix)
    print(f"auc={report.auc:.6f}; {len(report.sweep)} sweep rows written to {args.out_prefix}.{{json,csv,txt}}")
    return 0


def cmd_pipeline(args) -> int:
    data = _load_json(args.config) if args.config else {}
    cfg = PipelineConfig.from_dict(data)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.encoding:
        cfg.encoding = args.encoding
    if args.detector:
        cfg.detector = args.detector
    if args.tau_grid:
        cfg.tau_grid = parse_tau_grid(args.tau_grid)
    if args.matrix:
        cfg.matrix = True
    cfg.validate()
    reports = run_pipeline(cfg, args.out)
    for name, report in reports.items():
        print(f"{name}: auc={report.auc:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="auditbench", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="synthesise a Vehicle Claims dataset")
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--rows", type=int)
    g.add_argument("--base-csv")
    g.add_argument("--config", help="JSON with n_rows/anomaly/catalog/complexity overrides")
    g.add_argument("--missing-rate", type=float)
    g.add_argument("--target-ratio", type=float)
    g.add_argument("--with-dates", action="store_true")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("encode", help="split a labeled CSV and encode train/test")
    e.add_argument("--data", required=True)
    e.add_argument("--encoding", choices=ENCODINGS, required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--label-column", default="label")
    e.add_argument("--split", help="existing split.json to reuse")
    e.add_argument("--strategy", choices=STRATEGIES, default="stratified_70_30")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--kinds", help="JSON file mapping column -> numerical|categorical|ordinal")
    e.add_argument("--param", type=_param, action="append", help="encoder parameter key=value")
    e.set_defaults(func=cmd_encode)

    t = sub.add_parser("train", help="fit a detector on an encoded CSV")
    t.add_argument("--encoded", required=True)
    t.add_argument("--detector", choices=DETECTORS, required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--zscore-column", default="repair_cost")
    t.add_argument("--param", type=_param, action="append", help="detector parameter key=value")
    t.set_defaults(func=cmd_train)

    s = sub.add_parser("score", help="score an encoded CSV with a saved model")
    s.add_argument("--model", required=True)
    s.add_argument("--encoded", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_score)

    ev = sub.add_parser("eval", help="AUC and weighted F1 at one tau")
    ev.add_argument("--scores", required=True)
    ev.add_argument("--tau", type=float, help="defaults to the anomaly ratio of the scored rows")
    ev.add_argument("--out")
    ev.set_defaults(func=cmd_eval)

    sw = sub.add_parser("sweep", help="weighted F1 over a tau grid plus AUC")
    sw.add_argument("--scores", required=True)
    sw.add_argument("--out-prefix", required=True)
    sw.add_argument("--tau-grid", help='"start:stop:step" or comma list (default 0.05:0.30:0.01)')
    sw.set_defaults(func=cmd_sweep)

    pl = sub.add_parser("pipeline", help="run every stage from a config file")
    pl.add_argument("--config")
    pl.add_argument("--out", required=True)
    pl.add_argument("--seed", type=int)
    pl.add_argument("--encoding", choices=ENCODINGS)
    pl.add_argument("--detector", choices=DETECTORS)
    pl.add_argument("--tau-grid")
    pl.add_argument("--matrix", action="store_true", help="run every encoding x detector cell")
    pl.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"auditbench: configuration error: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(f"auditbench: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"auditbench: stage {args.command!r} failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
