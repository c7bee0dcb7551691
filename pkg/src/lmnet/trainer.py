"""Levenberg-Marquardt training with selection-loss tracking."""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy import linalg

from .dataset import EncodedDataset, Subset
from .loss import ClassWeights
from .network import Network, residual_jacobian, residuals


class StoppingReason(str, Enum):
    GRADIENT_NORM_GOAL = "GradientNormGoal"
    LOSS_GOAL = "LossGoal"
    MIN_INCREMENT_NORM = "MinIncrementNorm"
    MIN_LOSS_DECREASE = "MinLossDecrease"
    MAX_SELECTION_FAILURES = "MaxSelectionFailures"
    MAX_ITERATIONS = "MaxIterations"
    MAX_DAMPING = "MaxDamping"


class TrainingError(RuntimeError):
    def __init__(self, message: str, log: Optional["TrainingLog"] = None):
        super().__init__(message)
        self.log = log


@dataclass(frozen=True)
class TrainingConfig:
    damping_factor: float = 10.0
    initial_damping: float = 1e-3
    max_damping: float = 1e10
    min_increment_norm: float = 1e-3
    min_loss_decrease: float = 1e-12
    loss_goal: float = 1e-12
    gradient_norm_goal: float = 1e-3
    max_selection_failures: int = 100
    max_iterations: int = 1000

    def __post_init__(self):
        if not self.damping_factor > 1:
            raise ValueError("damping_factor must exceed 1")
        for name in ("initial_damping", "max_damping", "min_increment_norm",
                     "min_loss_decrease", "loss_goal", "gradient_norm_goal"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_selection_failures < 1:
            raise ValueError("max_selection_failures must be >= 1")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    training_loss: float
    selection_loss: float
    gradient_norm: float
    damping: float
    step_norm: float
    accepted: bool


@dataclass
class TrainingLog:
    records: list[IterationRecord] = field(default_factory=list)
    parameters_norm: float = float("nan")
    final_loss: float = float("nan")
    final_selection_loss: float = float("nan")
    final_gradient_norm: float = float("nan")
    iterations: int = 0
    elapsed_seconds: float = 0.0
    stopping_reason: Optional[StoppingReason] = None

    def summary(self, with_time: bool = False) -> dict:
        out = {
            "parameters_norm": self.parameters_norm,
            "final_loss": self.final_loss,
            "final_selection_loss": self.final_selection_loss,
            "final_gradient_norm": self.final_gradient_norm,
            "iterations": self.iterations,
            "stopping_reason": self.stopping_reason.value if self.stopping_reason else None,
        }
        if with_time:
            out["elapsed_seconds"] = self.elapsed_seconds
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["iteration", "training_loss", "selection_loss",
                             "gradient_norm", "damping", "step_norm", "accepted"])
            for r in self.records:
                writer.writerow([r.iteration, repr(r.training_loss), repr(r.selection_loss),
                                 repr(r.gradient_norm), repr(r.damping),
                                 repr(r.step_norm), int(r.accepted)])


def lm_step(e, J, mu: float) -> np.ndarray:
    """Increment ``-(J'J + mu I)^-1 J'e`` via a Cholesky solve."""
    e = np.asarray(e, dtype=float)
    J = np.asarray(J, dtype=float)
    if not mu > 0:
        raise ValueError("damping must be positive")
    if J.ndim != 2 or J.shape[0] != e.shape[0]:
        raise ValueError("Jacobian rows must match residual length")
    if not (np.all(np.isfinite(J)) and np.all(np.isfinite(e))):
        raise np.linalg.LinAlgError("non-finite residuals or Jacobian")
    A = J.T @ J
    A[np.diag_indices_from(A)] += mu
    return -linalg.cho_solve(linalg.cho_factor(A), J.T @ e)


def fit(net: Network, X_train, y_train, weights: ClassWeights,
        cfg: TrainingConfig = TrainingConfig(),
        X_sel=None, y_sel=None) -> tuple[Network, TrainingLog]:
    """Train ``net`` on arrays; see :func:`train`."""
    y_train = np.asarray(y_train, dtype=float)
    if y_train.size == 0:
        raise TrainingError("training subset is empty")
    if len(np.unique(y_train)) < 2:
        raise TrainingError("training subset contains a single class")
    wt = weights.instance_weights(y_train)
    has_sel = X_sel is not None and len(X_sel) > 0
    if has_sel:
        wt_sel = weights.instance_weights(y_sel)

    def selection_loss(w):
        if not has_sel:
            return float("nan")
        r = residuals(net, X_sel, y_sel, wt_sel, w)
        return float(r @ r)

    start = time.perf_counter()
    log = TrainingLog()
    w = net.w.copy()
    mu = cfg.initial_damping
    e, J = residual_jacobian(net, X_train, y_train, wt, w)
    loss = float(e @ e)
    sel = selection_loss(w)
    best_w, best_sel = w.copy(), sel
    failures = 0
    iteration = 0
    log.records.append(IterationRecord(0, loss, sel, float(np.linalg.norm(2 * J.T @ e)),
                                       mu, 0.0, True))

    while True:
        grad_norm = float(np.linalg.norm(2.0 * J.T @ e))
        if grad_norm <= cfg.gradient_norm_goal:
            reason = StoppingReason.GRADIENT_NORM_GOAL
            break
        if loss <= cfg.loss_goal:
            reason = StoppingReason.LOSS_GOAL
            break
        if iteration >= cfg.max_iterations:
            reason = StoppingReason.MAX_ITERATIONS
            break

        reason = None
        while True:
            try:
                step = lm_step(e, J, mu)
            except np.linalg.LinAlgError:
                step = None
            if step is not None:
                w_new = w + step
                e_new = residuals(net, X_train, y_train, wt, w_new)
                loss_new = float(e_new @ e_new)
                if not np.isfinite(loss_new):
                    log.iterations = iteration
                    raise TrainingError("training loss is not finite", log)
                if loss_new < loss:
                    mu = mu / cfg.damping_factor
                    break
                log.records.append(IterationRecord(iteration + 1, loss_new, sel, grad_norm,
                                                   mu, float(np.linalg.norm(step)), False))
            mu *= cfg.damping_factor
            if mu > cfg.max_damping:
                reason = StoppingReason.MAX_DAMPING
                break
        if reason is not None:
            break

        iteration += 1
        step_norm = float(np.linalg.norm(step))
        decrease = loss - loss_new
        w = w_new
        e, J = residual_jacobian(net, X_train, y_train, wt, w)
        loss = loss_new
        sel = selection_loss(w)
        if has_sel:
            if sel < best_sel:
                best_w, best_sel = w.copy(), sel
            elif sel > best_sel:
                failures += 1
        else:
            best_w = w.copy()
        log.records.append(IterationRecord(iteration, loss, sel,
                                           float(np.linalg.norm(2.0 * J.T @ e)),
                                           mu, step_norm, True))
        if step_norm <= cfg.min_increment_norm:
            reason = StoppingReason.MIN_INCREMENT_NORM
            break
        if decrease <= cfg.min_loss_decrease:
            reason = StoppingReason.MIN_LOSS_DECREASE
            break
        if failures >= cfg.max_selection_failures:
            reason = StoppingReason.MAX_SELECTION_FAILURES
            break

    trained = Network(net.arch, best_w)
    e, J = residual_jacobian(trained, X_train, y_train, wt)
    log.final_loss = float(e @ e)
    log.final_gradient_norm = float(np.linalg.norm(2.0 * J.T @ e))
    log.final_selection_loss = selection_loss(best_w)
    log.parameters_norm = float(np.linalg.norm(best_w))
    log.iterations = iteration
    log.stopping_reason = reason
    log.elapsed_seconds = round(time.perf_counter() - start, 3)
    return trained, log


def train(net: Network, data: EncodedDataset, weights: ClassWeights,
          cfg: TrainingConfig = TrainingConfig()) -> tuple[Network, TrainingLog]:
    """Levenberg-Marquardt on the training rows of ``data``.

    Each iteration solves the damped normal equations; a proposal that does
    not lower the training loss is rejected and retried with the damping
    multiplied by ``damping_factor`` (accepted steps divide it). The stopping
    tests are checked in the order gradient norm, loss goal, iteration
    budget before a step, and increment norm, loss decrease, selection
    failures after it. The returned network holds the parameters with the
    lowest selection loss seen, which need not be the last iterate.
    """
    X_train, y_train = data.rows(Subset.TRAINING)
    X_sel, y_sel = data.rows(Subset.SELECTION)
    return fit(net, X_train, y_train, weights, cfg, X_sel, y_sel)
