"""Assemble metrics into the JSON report and its fixed-width text rendering."""
from __future__ import annotations

import json

from .dataset import USED_SUBSETS, EncodedDataset, Subset
from .evaluation import DISTANCE, accuracy, confusion, gain_lift, roc
from .loss import ClassWeights, error_report
from .network import Network, predict

ERROR_ROWS = [
    ("sse", "Sum squared error"),
    ("mse", "Mean squared error"),
    ("rmse", "Root mean squared error"),
    ("nse", "Normalized squared error"),
    ("cross_entropy", "Cross-entropy error"),
    ("minkowski", "Minkowski error"),
    ("weighted_squared", "Weighted squared error"),
]


def metrics(net: Network, data: EncodedDataset, weights: ClassWeights,
            subset: Subset = Subset.TESTING, threshold: float = 0.5,
            rule: str = DISTANCE, minkowski_exponent: float = 1.5):
    """Errors on every subset plus confusion/ROC/gain/lift on ``subset``.

    Returns ``(report_dict, roc_curve, gain_lift_curves)``.
    """
    errors = {}
    for s in USED_SUBSETS:
        X, y = data.rows(s)
        if len(y) == 0:
            continue
        errors[s.value] = error_report(predict(net, X), y, weights,
                                       minkowski_exponent).to_dict()
    X, y = data.rows(subset)
    out = predict(net, X)
    table = confusion(out, y, threshold)
    acc = accuracy(table)
    curve = roc(out, y, rule)
    gl = gain_lift(out, y)
    coarse = gl.downsample(100)
    report = {
        "evaluated_subset": subset.value,
        "accuracy_percent": acc,
        "errors": errors,
        "confusion": {**table.to_dict(), "accuracy_percent": acc},
        "roc": {"auc": curve.auc, "optimal_threshold": curve.optimal_threshold,
                "threshold_rule": rule, "n_points": len(curve.fpr)},
        "gain": {"max_gain_score": gl.max_gain_score,
                 "max_gain_ratio": gl.max_gain_ratio,
                 "ratio": coarse.ratio.tolist(),
                 "positive_gain": coarse.positive_gain.tolist(),
                 "negative_gain": coarse.negative_gain.tolist()},
        "lift": {"ratio": coarse.ratio.tolist(), "lift": coarse.lift.tolist()},
    }
    return report, curve, gl


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _g(x) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _table(title: str, rows, header=None) -> list[str]:
    cells = ([header] if header else []) + [[_g(c) for c in r] for r in rows]
    widths = [max(len(r[j]) for r in cells) for j in range(len(cells[0]))]
    lines = [title, "-" * len(title)]
    for r in cells:
        lines.append("  ".join(c.ljust(w) if j == 0 else c.rjust(w)
                               for j, (c, w) in enumerate(zip(r, widths))))
    return lines + [""]


def partition_table(summary: list[dict]) -> list[str]:
    rows = [[r["subset"], r["n"], r["n_positive"], r["n_negative"], r["n_missing_dropped"]]
            for r in summary]
    return _table("Partition", rows,
                  ["subset", "n", "positive", "negative", "missing dropped"])


def render_text(report: dict) -> str:
    lines = []
    if "partition" in report:
        lines += partition_table(report["partition"])
    if "training" in report:
        t = report["training"]
        lines += _table("Training results", [
            ["Final parameters norm", t["parameters_norm"]],
            ["Final loss", t["final_loss"]],
            ["Final selection loss", t["final_selection_loss"]],
            ["Final gradient norm", t["final_gradient_norm"]],
            ["Iteration number", t["iterations"]],
            ["Stopping criterion", t["stopping_reason"]],
        ])
    if "order_selection" in report:
        o = report["order_selection"]
        lines += _table("Order selection", [
            ["Optimal order", o["optimal_order"]],
            ["Optimum training loss", o["optimum_training_loss"]],
            ["Optimum selection loss", o["optimum_selection_loss"]],
            ["Iteration number", o["total_iterations"]],
        ])
        lines += _table("Order selection history",
                        [[h["order"], h["training_loss"], h["selection_loss"], h["iterations"]]
                         for h in o["history"]],
                        ["order", "training", "selection", "iterations"])
    errs = report["errors"]
    subsets = [s.value for s in USED_SUBSETS if s.value in errs]
    lines += _table("Errors",
                    [[label] + [errs[s][key] for s in subsets] for key, label in ERROR_ROWS],
                    ["error"] + subsets)
    c = report["confusion"]
    lines += _table(f"Confusion ({report['evaluated_subset']}, threshold {c['threshold']:g})", [
        ["Actual positive", c["tp"], c["fn"]],
        ["Actual negative", c["fp"], c["tn"]],
    ], ["", "predicted positive", "predicted negative"])
    lines += _table("Classifier quality", [
        ["Accuracy (%)", report["accuracy_percent"]],
        ["ROC area", report["roc"]["auc"]],
        ["Optimal threshold", report["roc"]["optimal_threshold"]],
        ["Maximum gain score", report["gain"]["max_gain_score"]],
        ["Instance ratio", report["gain"]["max_gain_ratio"]],
    ])
    if "class_weights" in report:
        cw = report["class_weights"]
        lines += _table("Loss index weights", [
            ["Positive weight", cw["positive"]],
            ["Negative weight", cw["negative"]],
        ])
    return "\n".join(lines)
