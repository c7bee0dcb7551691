"""Error measures for binary outputs and the class weights of the loss index."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

CROSS_ENTROPY_CLAMP = 1e-12
MINKOWSKI_EXPONENT = 1.5


@dataclass(frozen=True)
class ClassWeights:
    positive: float
    negative: float = 1.0

    def instance_weights(self, y) -> np.ndarray:
        y = np.asarray(y)
        return np.where(y == 1, self.positive, self.negative).astype(float)


@dataclass(frozen=True)
class ErrorReport:
    sse: float
    mse: float
    rmse: float
    nse: float
    cross_entropy: float
    minkowski: float
    weighted_squared: float

    def to_dict(self) -> dict:
        return asdict(self)


def class_weights(y_train) -> ClassWeights:
    """Positive weight = negatives / positives on the training targets."""
    y = np.asarray(y_train)
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("training targets must contain both classes")
    return ClassWeights(positive=n_neg / n_pos, negative=1.0)


def weighted_squared_error(outputs, targets, weights: ClassWeights) -> float:
    o = np.asarray(outputs, dtype=float)
    t = np.asarray(targets, dtype=float)
    wt = weights.instance_weights(t)
    return float(np.sum(wt * (o - t) ** 2) / np.sum(wt))


def error_report(outputs, targets, weights: ClassWeights,
                 minkowski_exponent: float = MINKOWSKI_EXPONENT) -> ErrorReport:
    o = np.asarray(outputs, dtype=float)
    t = np.asarray(targets, dtype=float)
    if o.shape != t.shape or o.ndim != 1:
        raise ValueError("outputs and targets must be equal-length vectors")
    if o.size == 0:
        raise ValueError("need at least one instance")
    n = o.size
    err = o - t
    sse = float(np.sum(err ** 2))
    mse = sse / n
    spread = float(np.sum((t - t.mean()) ** 2))
    if spread == 0:
        raise ValueError("normalized squared error is undefined for constant targets")
    oc = np.clip(o, CROSS_ENTROPY_CLAMP, 1.0 - CROSS_ENTROPY_CLAMP)
    ce = float(-np.mean(t * np.log(oc) + (1.0 - t) * np.log(1.0 - oc)))
    return ErrorReport(
        sse=sse,
        mse=mse,
        rmse=float(np.sqrt(mse)),
        nse=sse / spread,
        cross_entropy=ce,
        minkowski=float(np.mean(np.abs(err) ** minkowski_exponent)),
        weighted_squared=weighted_squared_error(o, t, weights),
    )
