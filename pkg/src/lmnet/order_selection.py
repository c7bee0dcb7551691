"""Incremental order selection over the width of the hidden layer."""
from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataset import EncodedDataset, Subset
from .loss import ClassWeights
from .network import Architecture, Network, init
from .trainer import TrainingConfig, TrainingError, TrainingLog, fit


@dataclass(frozen=True)
class OrderSelectionConfig:
    min_order: int = 1
    max_order: int = 10
    trials_per_order: int = 3
    trainer_cfg: TrainingConfig = field(default_factory=TrainingConfig)
    seed: int = 1

    def __post_init__(self):
        if self.min_order < 1:
            raise ValueError("min_order must be >= 1")
        if self.max_order < self.min_order:
            raise ValueError("max_order must be >= min_order")
        if self.trials_per_order < 1:
            raise ValueError("trials_per_order must be >= 1")


@dataclass(frozen=True)
class OrderRecord:
    order: int
    best_training_loss: float
    best_selection_loss: float
    iterations_used: int


@dataclass
class OrderSelectionResult:
    records: list[OrderRecord]
    optimal_order: int
    optimum_training_loss: float
    optimum_selection_loss: float
    total_iterations: int
    optimal_log: TrainingLog

    def to_dict(self) -> dict:
        return {
            "optimal_order": self.optimal_order,
            "optimum_training_loss": self.optimum_training_loss,
            "optimum_selection_loss": self.optimum_selection_loss,
            "total_iterations": self.total_iterations,
            "history": [
                {"order": r.order, "training_loss": r.best_training_loss,
                 "selection_loss": r.best_selection_loss,
                 "iterations": r.iterations_used}
                for r in self.records
            ],
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["order", "training_loss", "selection_loss"])
            for r in self.records:
                writer.writerow([r.order, repr(r.best_training_loss),
                                 repr(r.best_selection_loss)])


def trial_seed(seed: int, order: int, trial: int) -> int:
    """Initialization seed for one (order, trial) candidate."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(order, trial))
    return int(ss.generate_state(1)[0])


def _train_candidate(args):
    order, trial, seed, arrays, weights, cfg = args
    X_tr, y_tr, X_sel, y_sel = arrays
    net = init(Architecture(X_tr.shape[1], order), trial_seed(seed, order, trial))
    try:
        trained, log = fit(net, X_tr, y_tr, weights, cfg, X_sel, y_sel)
    except TrainingError as exc:
        raise TrainingError(f"order {order}, trial {trial}: {exc}", exc.log) from exc
    return order, trial, trained, log


def select_order(data: EncodedDataset, weights: ClassWeights,
                 cfg: OrderSelectionConfig = OrderSelectionConfig(),
                 jobs: int = 1) -> tuple[Network, OrderSelectionResult]:
    """Train ``trials_per_order`` networks at every order in the range.

    Each order keeps its trial with the lowest selection loss; the order
    with the lowest kept selection loss wins, ties going to the smaller
    order (and to the earlier trial within an order). ``jobs > 1`` trains
    candidates in worker processes; the result does not depend on it.
    """
    X_tr, y_tr = data.rows(Subset.TRAINING)
    X_sel, y_sel = data.rows(Subset.SELECTION)
    if len(np.unique(y_tr)) < 2:
        raise TrainingError("training subset must contain both classes")
    arrays = (X_tr, y_tr, X_sel, y_sel)
    tasks = [
        (order, trial, cfg.seed, arrays, weights, cfg.trainer_cfg)
        for order in range(cfg.min_order, cfg.max_order + 1)
        for trial in range(cfg.trials_per_order)
    ]
    jobs = jobs or os.cpu_count() or 1
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_train_candidate, tasks))
    else:
        results = [_train_candidate(t) for t in tasks]

    def sel_key(log: TrainingLog) -> float:
        # With no selection rows fall back to training loss.
        s = log.final_selection_loss
        return log.final_loss if np.isnan(s) else s

    records = []
    best_per_order = {}
    total = 0
    for order in range(cfg.min_order, cfg.max_order + 1):
        trials = sorted((r for r in results if r[0] == order), key=lambda r: r[1])
        used = sum(log.iterations for _, _, _, log in trials)
        total += used
        best = min(trials, key=lambda r: sel_key(r[3]))
        best_per_order[order] = best
        records.append(OrderRecord(order, best[3].final_loss,
                                   best[3].final_selection_loss, used))

    optimal = min(best_per_order, key=lambda o: (sel_key(best_per_order[o][3]), o))
    _, _, net, log = best_per_order[optimal]
    result = OrderSelectionResult(
        records=records,
        optimal_order=optimal,
        optimum_training_loss=log.final_loss,
        optimum_selection_loss=log.final_selection_loss,
        total_iterations=total,
        optimal_log=log,
    )
    return net, result
