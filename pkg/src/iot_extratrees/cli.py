"""Command-line driver: preprocess, train, evaluate, predict, gridsearch.

Exit codes: 0 success, 1 usage error, 2 data error, 3 I/O error.
The default worker count comes from ``IOT_EXTRATREES_THREADS``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from dataclasses import replace

import numpy as np

from . import ensemble
from .container import ModelFormatError, atomic_write, load_model, save_model
from .data_ingest import CATEGORICAL, DataError, RawTable, load_csv
from .ensemble import EnsembleParams, ExtraTreesModel
from .metrics import full_report
from .preprocess import (
    PreprocessModel,
    apply_encoder,
    apply_standardizer,
    clean,
    fit_preprocess,
    train_test_split,
)
from .tree import TreeParams

log = logging.getLogger("iot_extratrees")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write_text(path, text: str) -> None:
    atomic_write(path, text.encode("utf-8"))


def _write_json(path, obj) -> None:
    _write_text(path, json.dumps(obj, indent=2, sort_keys=False) + "\n")


def _parse_k(text: str):
    if text == "sqrt":
        return None
    if text == "all":
        return "all"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'sqrt', 'all' or an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("features per node must be >= 1")
    return value


def _parse_depth(text: str):
    if text.lower() in ("none", "unbounded"):
        return None
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("max depth must be >= 0")
    return value


def _resolve_k(k, n_features: int):
    return n_features if k == "all" else k


def _load(args, label, kinds=None) -> RawTable:
    log.info("loading %s", args.input)
    table = load_csv(
        args.input,
        label_column=label,
        delimiter=args.delimiter,
        max_rows=args.max_rows,
        include=args.include,
        exclude=args.exclude,
        kinds=kinds,
    )
    log.info("loaded %d rows x %d columns", table.row_count, len(table.schema))
    return table


def _prepare(args):
    """Load, clean, split and fit transforms; shared by train/preprocess/gridsearch."""
    table = _load(args, args.label)
    cleaned, report = clean(table)
    log.info("clean: %s", report.as_dict())
    labels = cleaned.column(args.label) if args.stratify else None
    split = train_test_split(cleaned.row_count, args.split, args.seed, labels=labels)
    log.info("split: %d train / %d test", split.train_indices.size, split.test_indices.size)
    pre = fit_preprocess(cleaned, split.train_indices, args.seed, args.split)
    pre = replace(pre, stratified=bool(args.stratify))
    return cleaned, report, split, pre


def _ensemble_params(args) -> EnsembleParams:
    return EnsembleParams(
        n_trees=args.trees,
        tree_params=TreeParams(
            k_features=None if args.features in (None, "all") else args.features,
            max_depth=args.max_depth,
            min_samples_split=args.min_samples_split,
            min_samples_leaf=args.min_samples_leaf,
            splitter=args.splitter,
        ),
        bootstrap=args.bootstrap == "on",
        seed=args.seed,
    )


def cmd_preprocess(args) -> int:
    cleaned, report, split, pre = _prepare(args)
    encoded = apply_encoder(pre.encoder, apply_standardizer(pre.standardizer, cleaned))
    for rows, path in ((split.train_indices, args.out_train), (split.test_indices, args.out_test)):
        buf = io.StringIO()
        part = encoded.take(rows)
        _write_table(part, buf)
        _write_text(path, buf.getvalue())
    if args.report:
        _write_json(args.report, {
            "clean": report.as_dict(),
            "split": {"train": int(split.train_indices.size), "test": int(split.test_indices.size),
                      "seed": args.seed, "train_fraction": args.split},
            "constant_columns": pre.standardizer.constant_columns,
            "label_vocabulary": list(pre.classes),
        })
    return EXIT_OK


def _write_table(table: RawTable, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(table.names)
    writer.writerows(zip(*(table.text_cells(n) for n in table.names)))


def cmd_train(args) -> int:
    start = time.perf_counter()
    cleaned, report, split, pre = _prepare(args)
    train = cleaned.take(split.train_indices)
    X, y = pre.transform(train)
    params = _ensemble_params(args)
    if args.features == "all":
        params = replace(params, tree_params=replace(params.tree_params, k_features=X.shape[1]))
    model = ensemble.fit(
        X, y, params,
        classes=pre.classes,
        feature_names=pre.feature_names,
        preprocess=pre,
        n_jobs=args.threads,
    )
    save_model(model, args.out)
    log.info("model written to %s", args.out)

    run = {
        "command": "train",
        "input": args.input,
        "label": args.label,
        "seed": args.seed,
        "clean": report.as_dict(),
        "split": {"train": int(split.train_indices.size), "test": int(split.test_indices.size),
                  "train_fraction": args.split, "stratified": bool(args.stratify)},
        "params": model.params.describe(),
        "classes": list(model.classes),
        "constant_columns": pre.standardizer.constant_columns,
    }
    if split.test_indices.size:
        test = cleaned.take(split.test_indices)
        Xt, yt = pre.transform(test)
        metrics = full_report(yt, model.predict(Xt), model.vote_shares(Xt), model.classes)
        run["test_metrics"] = {k: v for k, v in metrics.as_dict().items() if k != "per_class"}
        sys.stdout.write(metrics.summary())
    run["wall_time_s"] = round(time.perf_counter() - start, 3)
    if args.report:
        _write_json(args.report, run)
    return EXIT_OK


def _model_kinds(pre: PreprocessModel) -> dict:
    kinds = dict(zip(pre.feature_names, pre.feature_kinds))
    if pre.label_column:
        kinds[pre.label_column] = CATEGORICAL
    return kinds


def _model_preprocess(model: ExtraTreesModel) -> PreprocessModel:
    if model.preprocess is None:
        raise DataError("model file carries no preprocessing transforms")
    return model.preprocess


def cmd_evaluate(args) -> int:
    model = load_model(args.model)
    pre = _model_preprocess(model)
    table = _load(args, pre.label_column, _model_kinds(pre))
    cleaned, report = clean(table)
    log.info("clean: %s", report.as_dict())
    if args.subset != "all":
        labels = cleaned.column(pre.label_column) if pre.stratified else None
        split = train_test_split(cleaned.row_count, pre.train_fraction, pre.split_seed, labels=labels)
        rows = split.train_indices if args.subset == "train" else split.test_indices
        cleaned = cleaned.take(rows)
    X, y = pre.transform(cleaned)
    metrics = full_report(y, model.predict(X), model.vote_shares(X), model.classes, args.averaging)
    if args.report:
        _write_text(args.report, metrics.to_json())
    if args.text_report:
        _write_text(args.text_report, metrics.text_report())
    if args.confusion:
        _write_text(args.confusion, metrics.confusion.to_csv())
    sys.stdout.write(metrics.summary())
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_model(args.model)
    pre = _model_preprocess(model)
    kinds = _model_kinds(pre)
    table = _load(args, None, kinds)
    X = pre.transform(table, with_label=False)
    bad = ~np.isfinite(X).all(axis=1)
    if bad.any():
        row = int(np.flatnonzero(bad)[0]) + 1
        raise DataError(f"row {row} has missing or non-finite feature values")
    shares = model.vote_shares(X)
    pred = np.argmax(shares, axis=1)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["predicted_class", "confidence"])
    for code, share in zip(pred.tolist(), shares[np.arange(len(pred)), pred].tolist()):
        writer.writerow([model.classes[code], repr(float(share))])
    _write_text(args.out, buf.getvalue())
    log.info("wrote %d predictions to %s", len(pred), args.out)
    return EXIT_OK


def cmd_gridsearch(args) -> int:
    cleaned, report, split, pre = _prepare(args)
    X, y = pre.transform(cleaned.take(split.train_indices))
    m = X.shape[1]
    trees = args.grid_trees or [50, 100, 200]
    depths = args.grid_depth or [None, 20]
    ks = args.grid_k or [None, "all"]
    resolved_ks = []
    for k in ks:
        k = TreeParams(k_features=_resolve_k(k, m)).resolve_k(m)
        if k not in resolved_ks:
            resolved_ks.append(k)
    grid = [
        EnsembleParams(n, TreeParams(k_features=k, max_depth=d,
                                     min_samples_split=args.min_samples_split,
                                     min_samples_leaf=args.min_samples_leaf,
                                     splitter=args.splitter),
                       args.bootstrap == "on", args.seed)
        for n in trees for d in depths for k in resolved_ks
    ]
    best, results = ensemble.grid_search(
        X, y, grid, args.validation, args.seed, n_classes=len(pre.classes), n_jobs=args.threads
    )
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(results[0]), lineterminator="\n")
    writer.writeheader()
    for row in results:
        writer.writerow({k: ("none" if v is None else v) for k, v in row.items()})
    _write_text(args.out, buf.getvalue())
    best_doc = {"best": best.describe(), "search_space": "package default grid" if not (
        args.grid_trees or args.grid_depth or args.grid_k) else "user grid",
        "validation_fraction": args.validation, "seed": args.seed}
    _write_json(args.best, best_doc)
    sys.stdout.write(json.dumps(best.describe()) + "\n")
    return EXIT_OK


def _add_input(p, label_required=True):
    p.add_argument("--input", required=True, help="CSV file with a header row")
    if label_required:
        p.add_argument("--label", default="label", help="target column name (default: label)")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--max-rows", type=int, default=None, help="read at most this many data rows")
    p.add_argument("--include", nargs="+", default=None, metavar="COL")
    p.add_argument("--exclude", nargs="+", default=None, metavar="COL")
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes (-1 = all cores; default from IOT_EXTRATREES_THREADS or 1)")


def _add_split(p):
    p.add_argument("--split", type=float, default=0.7, help="training fraction (default 0.7)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--stratify", action="store_true", help="stratify the split by class")


def _add_tree(p, with_trees=True):
    if with_trees:
        p.add_argument("--trees", type=int, default=100)
        p.add_argument("--features", type=_parse_k, default=None,
                       help="features sampled per node: sqrt (default), all, or an integer")
        p.add_argument("--max-depth", type=_parse_depth, default=None)
    p.add_argument("--min-samples-split", type=int, default=2)
    p.add_argument("--min-samples-leaf", type=int, default=1)
    p.add_argument("--splitter", choices=("best", "random"), default="best")
    p.add_argument("--bootstrap", choices=("on", "off"), default="on")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="iot-extratrees", description=__doc__.splitlines()[0])
    parser.add_argument("-q", "--quiet", action="store_true", help="only log warnings and errors")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("preprocess", help="clean, split and encode a CSV")
    _add_input(p)
    _add_split(p)
    p.add_argument("--out-train", required=True)
    p.add_argument("--out-test", required=True)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="fit an ensemble and write a .etg model")
    _add_input(p)
    _add_split(p)
    _add_tree(p)
    p.add_argument("--out", default="model.etg")
    p.add_argument("--report", default=None, help="run report (JSON)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a model on labelled data")
    _add_input(p, label_required=False)
    p.add_argument("--model", required=True)
    p.add_argument("--subset", choices=("all", "train", "test"), default="all",
                   help="re-derive the training split and score only this part")
    p.add_argument("--averaging", choices=("weighted", "macro"), default="weighted")
    p.add_argument("--report", default="metrics.json")
    p.add_argument("--text-report", default=None)
    p.add_argument("--confusion", default=None, help="confusion matrix CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="label unlabelled rows")
    _add_input(p, label_required=False)
    p.add_argument("--model", required=True)
    p.add_argument("--out", default="predictions.csv")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("gridsearch", help="hold-out search over ensemble parameters")
    _add_input(p)
    _add_split(p)
    _add_tree(p, with_trees=False)
    p.add_argument("--grid-trees", type=int, nargs="+", default=None)
    p.add_argument("--grid-depth", type=_parse_depth, nargs="+", default=None)
    p.add_argument("--grid-k", type=_parse_k, nargs="+", default=None)
    p.add_argument("--validation", type=float, default=0.2)
    p.add_argument("--out", default="grid_results.csv")
    p.add_argument("--best", default="best_params.json")
    p.set_defaults(func=cmd_gridsearch)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(asctime)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (OSError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DataError, ModelFormatError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
