"""Matplotlib renderings of the evaluation curves.

Figures are built on ``matplotlib.figure.Figure`` directly (no pyplot state)
and written as SVG with fixed metadata and hash salt so repeated runs produce
identical files.
"""
from __future__ import annotations

import matplotlib
from matplotlib.figure import Figure

BASELINE = dict(color="0.6", linestyle="--", linewidth=1.0)


def _save(fig: Figure, path) -> None:
    with matplotlib.rc_context({"svg.hashsalt": "lmnet", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})


def _axes(title: str, xlabel: str, ylabel: str):
    fig = Figure(figsize=(5.0, 4.0))
    ax = fig.add_subplot()
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    return fig, ax


def plot_roc(curve, path) -> None:
    fig, ax = _axes(f"ROC (AUC = {curve.auc:.4f})", "False positive rate", "True positive rate")
    ax.fill_between(curve.fpr, curve.tpr, step=None, alpha=0.2, color="tab:blue")
    ax.plot(curve.fpr, curve.tpr, color="tab:blue")
    ax.plot([0, 1], [0, 1], **BASELINE)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    _save(fig, path)


def plot_gain(curves, path) -> None:
    fig, ax = _axes("Cumulative gain", "Instance ratio", "Fraction found")
    x = [0.0, *curves.ratio]
    ax.plot(x, [0.0, *curves.positive_gain], color="tab:blue", label="positive")
    ax.plot(x, [0.0, *curves.negative_gain], color="tab:red", label="negative")
    ax.plot([0, 1], [0, 1], label="random", **BASELINE)
    ax.axvline(curves.max_gain_ratio, color="0.3", linewidth=0.8, linestyle=":")
    ax.legend(loc="lower right")
    _save(fig, path)


def plot_lift(curves, path) -> None:
    fig, ax = _axes("Lift", "Instance ratio", "Lift")
    ax.plot(curves.ratio, curves.lift, color="tab:blue")
    ax.axhline(1.0, **BASELINE)
    ax.set_xlim(0, 1)
    _save(fig, path)


def plot_order_history(result, path) -> None:
    fig, ax = _axes("Order selection", "Hidden neurons", "Weighted squared error")
    orders = [r.order for r in result.records]
    ax.plot(orders, [r.best_training_loss for r in result.records], "o-",
            color="tab:blue", label="training")
    ax.plot(orders, [r.best_selection_loss for r in result.records], "o-",
            color="tab:red", label="selection")
    ax.set_yscale("log")
    ax.set_xticks(orders)
    ax.legend()
    _save(fig, path)
