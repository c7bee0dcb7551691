"""Command-line interface: ``lmnet {summary,train,evaluate,score,reproduce}``.

Exit codes: 0 success, 2 data error, 3 training failure, 64 usage error.
Diagnostics go to stderr; stdout carries only tables, JSON and scores.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import tempfile
import shutil
from pathlib import Path

from . import dataset, model_io, plotting
from .dataset import DEFAULT_SCHEMA, DataError, Subset
from .evaluation import DISTANCE, YOUDEN, write_gain_csv, write_lift_csv, write_roc_csv
from .loss import class_weights
from .network import Architecture, init
from .order_selection import OrderSelectionConfig, select_order, trial_seed
from .report import dumps, metrics, partition_table, render_text
from .trainer import TrainingConfig, TrainingError, train

EXIT_OK, EXIT_DATA, EXIT_TRAINING, EXIT_USAGE = 0, 2, 3, 64

log = logging.getLogger("lmnet")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _threshold(text):
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("must lie in (0, 1)")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="split / initialization seed (default 1)")
    common.add_argument("--threshold", type=_threshold, default=0.5,
                        help="decision threshold (default 0.5)")
    common.add_argument("--no-result-feature", dest="include_result", action="store_false",
                        help="drop the AQ-10 'result' total from the predictors")
    common.add_argument("-v", "--verbose", action="store_true")

    fit_opts = argparse.ArgumentParser(add_help=False)
    fit_opts.add_argument("--max-order", type=_positive_int, default=10)
    fit_opts.add_argument("--min-order", type=_positive_int, default=1)
    fit_opts.add_argument("--trials", type=_positive_int, default=3,
                          help="initializations per order")
    fit_opts.add_argument("--jobs", type=_positive_int, default=os.cpu_count() or 1,
                          help="parallel candidate trainings")
    fit_opts.add_argument("--max-iterations", type=int, default=1000)
    fit_opts.add_argument("--train-log", type=Path, help="per-iteration CSV of the kept network")
    fit_opts.add_argument("--order-history", type=Path, help="per-order loss CSV")

    out_opts = argparse.ArgumentParser(add_help=False)
    out_opts.add_argument("--svg", action="store_true", help="also render SVG figures")
    out_opts.add_argument("--threshold-rule", choices=[DISTANCE, YOUDEN], default=DISTANCE)

    p = _Parser(prog="lmnet", description="Levenberg-Marquardt trained classifier with order selection.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("summary", parents=[common], help="partition and class counts")
    s.add_argument("--data", type=Path, required=True)

    t = sub.add_parser("train", parents=[common, fit_opts], help="fit and save a model")
    t.add_argument("--data", type=Path, required=True)
    group = t.add_mutually_exclusive_group()
    group.add_argument("--order", type=_positive_int, help="fixed hidden-layer size")
    group.add_argument("--order-select", action="store_true",
                       help="incremental order selection (default)")
    t.add_argument("--model", type=Path, default=Path("model" + model_io.SUFFIX))

    e = sub.add_parser("evaluate", parents=[common, out_opts], help="metrics for a saved model")
    e.add_argument("--data", type=Path, required=True)
    e.add_argument("--model", type=Path, required=True)
    e.add_argument("--subset", choices=[s.value for s in dataset.USED_SUBSETS],
                   default="testing")
    e.add_argument("--out", type=Path, help="directory for curve CSVs and figures")

    c = sub.add_parser("score", parents=[common], help="score raw records")
    c.add_argument("--model", type=Path, required=True)
    c.add_argument("--rows", type=Path, required=True, help="CSV with a header line")

    r = sub.add_parser("reproduce", parents=[common, fit_opts, out_opts],
                       help="split, select order, train and evaluate in one run")
    r.add_argument("--data", type=Path, required=True)
    r.add_argument("--out", type=Path, default=Path("lmnet-out"))
    return p


def _schema(args):
    return DEFAULT_SCHEMA if args.include_result else DEFAULT_SCHEMA.without("result")


def _seed(args, default=1):
    return default if args.seed is None else args.seed


def _load(args):
    return dataset.load(args.data, _seed(args), _schema(args))


def cmd_summary(args) -> int:
    data = _load(args)
    summary = data.summary()
    total = {
        "n_rows": len(data.y),
        "partition": {s.value: int(sum(o == s for o in data.original_subset))
                      for s in dataset.USED_SUBSETS},
        "n_missing_dropped": int(sum(s == Subset.UNUSED for s in data.subset)),
        "n_features": data.X.shape[1],
    }
    print("\n".join(partition_table(summary)))
    print(f"total rows {total['n_rows']}, partition "
          + "/".join(str(v) for v in total["partition"].values())
          + f", dropped (missing) {total['n_missing_dropped']}, features {total['n_features']}")
    print()
    print(json.dumps({"subsets": summary, "totals": total}, indent=2))
    return EXIT_OK


def _fit(args, data, weights):
    """Returns (net, training_log, order_selection_result or None)."""
    seed = _seed(args)
    tcfg = TrainingConfig(max_iterations=args.max_iterations)
    order = getattr(args, "order", None)
    if order is not None:
        net0 = init(Architecture(data.X.shape[1], order), trial_seed(seed, order, 0))
        net, tlog = train(net0, data, weights, tcfg)
        result = None
    else:
        if args.min_order > args.max_order:
            raise UsageError("--min-order exceeds --max-order")
        cfg = OrderSelectionConfig(args.min_order, args.max_order, args.trials, tcfg, seed)
        net, result = select_order(data, weights, cfg, jobs=args.jobs)
        tlog = result.optimal_log
    log.info("trained order %d: loss %.4g, selection loss %.4g, %s, %.3f s",
             net.arch.order, tlog.final_loss, tlog.final_selection_loss,
             tlog.stopping_reason.value, tlog.elapsed_seconds)
    return net, tlog, result


def _bundle(args, data, net, tlog, weights, result):
    return model_io.ModelBundle(
        encoder=data.encoder,
        net=net,
        class_weights=weights,
        training_summary={
            "final_loss": tlog.final_loss,
            "stopping_reason": tlog.stopping_reason.value,
            "optimal_order": net.arch.order,
            "order_selected": result is not None,
            "split_seed": _seed(args),
            "include_result_feature": args.include_result,
        },
    )


def cmd_train(args) -> int:
    data = _load(args)
    weights = class_weights(data.rows(Subset.TRAINING)[1])
    net, tlog, result = _fit(args, data, weights)
    model_io.save(_bundle(args, data, net, tlog, weights, result), args.model)
    if args.train_log:
        tlog.write_csv(args.train_log)
    if args.order_history and result is not None:
        result.write_csv(args.order_history)
    print(json.dumps({"model": str(args.model), "order": net.arch.order,
                      **tlog.summary()}, indent=2))
    return EXIT_OK


def _write_curves(out_dir: Path, curve, gl, svg: bool) -> None:
    write_roc_csv(curve, out_dir / "roc.csv")
    write_gain_csv(gl, out_dir / "gain.csv")
    write_lift_csv(gl, out_dir / "lift.csv")
    if svg:
        plotting.plot_roc(curve, out_dir / "roc.svg")
        plotting.plot_gain(gl, out_dir / "gain.svg")
        plotting.plot_lift(gl, out_dir / "lift.svg")


def cmd_evaluate(args) -> int:
    bundle = model_io.load(args.model)
    seed = _seed(args, bundle.training_summary.get("split_seed", 1))
    raw = dataset.parse_csv(args.data, bundle.schema)
    data = dataset.encode(raw, bundle.schema, dataset.split(len(raw.rows), seed),
                          encoder=bundle.encoder)
    rep, curve, gl = metrics(bundle.net, data, bundle.class_weights, Subset(args.subset),
                             args.threshold, args.threshold_rule)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        _write_curves(args.out, curve, gl, args.svg)
    sys.stdout.write(dumps(rep))
    return EXIT_OK


def _read_score_rows(path: Path, schema):
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            lines = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise DataError(f"{path}: no header line")
    header = [dataset.HEADER_ALIASES.get(h.strip(), h.strip()) for h in lines[0]]
    absent = [n for n in schema.names if n != schema.target and n not in header]
    if absent:
        raise DataError(f"{path}: missing columns {absent}")
    idx = [header.index(n) if n in header else None for n in schema.names]
    rows = []
    for lineno, cells in enumerate(lines[1:], start=2):
        if not cells:
            continue
        if len(cells) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} cells, got {len(cells)}")
        rows.append([cells[j] if j is not None else None for j in idx])
    return rows


def cmd_score(args) -> int:
    bundle = model_io.load(args.model)
    rows = _read_score_rows(args.rows, bundle.schema)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["row", "probability", "prediction"])
    for i, row in enumerate(rows, start=1):
        try:
            p, label = model_io.score_record(bundle, row, args.threshold)
        except model_io.MissingValueError:
            writer.writerow([i, "", "REFUSED(missing)"])
            continue
        except DataError as exc:
            log.error("row %d: %s", i, exc)
            writer.writerow([i, "", "REFUSED(invalid)"])
            continue
        writer.writerow([i, repr(p), label])
    return EXIT_OK


def cmd_reproduce(args) -> int:
    data = _load(args)
    weights = class_weights(data.rows(Subset.TRAINING)[1])
    net, tlog, result = _fit(args, data, weights)
    rep, curve, gl = metrics(net, data, weights, Subset.TESTING, args.threshold,
                             args.threshold_rule)
    report = {
        "dataset": {"path_name": args.data.name, "n_rows": len(data.y),
                    "n_features": data.X.shape[1], "seed": _seed(args),
                    "include_result_feature": args.include_result},
        "partition": data.summary(),
        "class_weights": {"positive": weights.positive, "negative": weights.negative},
        "order_selection": result.to_dict() if result else None,
        "training": tlog.summary(),
        **rep,
    }

    # Everything is computed before anything is written: failures leave no partial output.
    args.out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(dir=args.out) as tmp:
        tmp = Path(tmp)
        (tmp / "report.json").write_text(dumps(report), encoding="utf-8")
        (tmp / "report.txt").write_text(render_text(report) + "\n", encoding="utf-8")
        _write_curves(tmp, curve, gl, args.svg)
        if result:
            result.write_csv(tmp / "order_history.csv")
            if args.svg:
                plotting.plot_order_history(result, tmp / "order_history.svg")
        model_io.save(_bundle(args, data, net, tlog, weights, result),
                      tmp / ("model" + model_io.SUFFIX))
        tlog.write_csv(tmp / "train_log.csv")
        for f in sorted(tmp.iterdir()):
            shutil.move(str(f), args.out / f.name)
    if args.train_log:
        tlog.write_csv(args.train_log)
    if args.order_history and result:
        result.write_csv(args.order_history)

    print(f"order {net.arch.order} | test accuracy {rep['accuracy_percent']:.2f}% | "
          f"AUC {rep['roc']['auc']:.4f} | max gain {rep['gain']['max_gain_score']:.3f} | "
          f"positive weight {weights.positive:.3f} | stop {tlog.stopping_reason.value} | "
          f"{tlog.elapsed_seconds:.3f} s")
    print(f"outputs written to {args.out}")
    return EXIT_OK


COMMANDS = {
    "summary": cmd_summary,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "score": cmd_score,
    "reproduce": cmd_reproduce,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"lmnet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"lmnet: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TrainingError as exc:
        print(f"lmnet: training failed: {exc}", file=sys.stderr)
        return EXIT_TRAINING
    except ValueError as exc:
        # e.g. single-class training subset found while computing class weights
        print(f"lmnet: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
