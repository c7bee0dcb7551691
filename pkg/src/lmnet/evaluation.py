"""Confusion table, ROC, cumulative gain and lift for a binary scorer."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

DISTANCE = "distance"
YOUDEN = "youden"


@dataclass(frozen=True)
class ConfusionTable:
    tp: int
    fn: int
    fp: int
    tn: int
    threshold: float

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fn": self.fn, "fp": self.fp, "tn": self.tn,
                "threshold": self.threshold}


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float
    optimal_threshold: float

    @property
    def points(self) -> list[tuple[float, float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist(), self.thresholds.tolist()))


@dataclass(frozen=True)
class GainLiftCurves:
    ratio: np.ndarray
    positive_gain: np.ndarray
    negative_gain: np.ndarray
    lift: np.ndarray
    max_gain_score: float
    max_gain_ratio: float

    def downsample(self, n_points: int = 100) -> "GainLiftCurves":
        """Curves at ``n_points`` evenly spaced instance ratios in (0, 1]."""
        n = self.ratio.size
        grid = np.arange(1, n_points + 1) / n_points
        k = np.clip(np.ceil(grid * n - 1e-9).astype(int), 1, n) - 1
        return GainLiftCurves(grid, self.positive_gain[k], self.negative_gain[k],
                              self.positive_gain[k] / grid,
                              self.max_gain_score, self.max_gain_ratio)


def _check(outputs, targets, both_classes=True):
    o = np.asarray(outputs, dtype=float)
    t = np.asarray(targets)
    if o.ndim != 1 or o.shape != t.shape:
        raise ValueError("outputs and targets must be equal-length vectors")
    if o.size == 0:
        raise ValueError("need at least one instance")
    if both_classes and (np.all(t == 1) or np.all(t == 0)):
        raise ValueError("targets must contain both classes")
    return o, (t == 1)


def confusion(outputs, targets, threshold: float = 0.5) -> ConfusionTable:
    """Tally predictions ``output >= threshold`` against the targets."""
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    o, pos = _check(outputs, targets, both_classes=False)
    pred = o >= threshold
    return ConfusionTable(
        tp=int(np.sum(pred & pos)),
        fn=int(np.sum(~pred & pos)),
        fp=int(np.sum(pred & ~pos)),
        tn=int(np.sum(~pred & ~pos)),
        threshold=float(threshold),
    )


def accuracy(c: ConfusionTable) -> float:
    """Percentage of correct predictions."""
    if c.total == 0:
        raise ValueError("empty confusion table")
    return 100.0 * (c.tp + c.tn) / c.total


def roc(outputs, targets, rule: str = DISTANCE) -> RocCurve:
    """ROC over all distinct output values.

    The curve is swept from a threshold above every output, through each
    distinct output in descending order, to one below every output. Tied
    outputs move the curve diagonally, so the trapezoidal area matches the
    pairwise ranking statistic with ties counted one half.
    """
    o, pos = _check(outputs, targets)
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    order = np.argsort(-o, kind="stable")
    o_sorted, pos_sorted = o[order], pos[order]
    tp = np.cumsum(pos_sorted)
    fp = np.cumsum(~pos_sorted)
    # last index of each block of tied outputs
    last = np.flatnonzero(np.r_[o_sorted[1:] != o_sorted[:-1], True])
    hi = 1.0 if o_sorted[0] < 1.0 else o_sorted[0] + 1.0
    lo = 0.0 if o_sorted[-1] > 0.0 else o_sorted[-1] - 1.0
    fpr = np.r_[0.0, fp[last] / n_neg, 1.0]
    tpr = np.r_[0.0, tp[last] / n_pos, 1.0]
    thresholds = np.r_[hi, o_sorted[last], lo]
    auc = float(np.trapezoid(tpr, fpr))
    return RocCurve(fpr, tpr, thresholds, auc, optimal_threshold(fpr, tpr, thresholds, rule))


def optimal_threshold(fpr, tpr, thresholds, rule: str = DISTANCE) -> float:
    """Threshold closest to the (0, 1) corner, or maximizing tpr - fpr.

    Ties go to the higher threshold, i.e. the earlier point on the curve.
    """
    if rule == DISTANCE:
        score = -np.hypot(fpr, 1.0 - tpr)
    elif rule == YOUDEN:
        score = tpr - fpr
    else:
        raise ValueError(f"unknown threshold rule {rule!r}")
    return float(thresholds[int(np.argmax(score))])


def gain_lift(outputs, targets) -> GainLiftCurves:
    o, pos = _check(outputs, targets)
    n = o.size
    order = np.argsort(-o, kind="stable")
    pos_sorted = pos[order]
    ratio = np.arange(1, n + 1) / n
    pg = np.cumsum(pos_sorted) / pos.sum()
    ng = np.cumsum(~pos_sorted) / (~pos).sum()
    lift = pg / ratio
    gap = pg - ng
    k = int(np.argmax(gap))
    return GainLiftCurves(ratio, pg, ng, lift, float(gap[k]), float(ratio[k]))


def write_roc_csv(curve: RocCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fpr", "tpr", "threshold"])
        for f, t, th in curve.points:
            w.writerow([repr(f), repr(t), repr(th)])


def write_gain_csv(curves: GainLiftCurves, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ratio", "positive_gain", "negative_gain"])
        w.writerow([repr(0.0), repr(0.0), repr(0.0)])
        for r, p, q in zip(curves.ratio.tolist(), curves.positive_gain.tolist(),
                           curves.negative_gain.tolist()):
            w.writerow([repr(r), repr(p), repr(q)])


def write_lift_csv(curves: GainLiftCurves, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ratio", "lift"])
        for r, v in zip(curves.ratio.tolist(), curves.lift.tolist()):
            w.writerow([repr(r), repr(v)])

