"""Single-hidden-layer network: tanh hidden units, logistic output.

Parameters live in one flat vector laid out as::

    [W_1, b_1, W_2, b_2, ..., W_h, b_h, v_1, ..., v_h, c]

i.e. the hidden weight matrix row-major with each neuron's bias appended,
followed by the output weights and output bias.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# logistic(+-36) is still representable as strictly inside (0, 1).
_OUTPUT_PRE_CLIP = 36.0


@dataclass(frozen=True)
class Architecture:
    n_inputs: int
    order: int
    n_outputs: int = 1

    def __post_init__(self):
        if self.n_inputs < 1:
            raise ValueError("n_inputs must be >= 1")
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if self.n_outputs != 1:
            raise ValueError("only a single output is supported")

    @property
    def n_params(self) -> int:
        return self.order * (self.n_inputs + 1) + self.order + 1


@dataclass(frozen=True)
class ForwardCache:
    hidden_pre: np.ndarray
    hidden_act: np.ndarray
    output_pre: float
    output: float


@dataclass
class Network:
    arch: Architecture
    w: np.ndarray

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        if self.w.shape != (self.arch.n_params,):
            raise ValueError(
                f"parameter vector has length {self.w.size}, "
                f"architecture needs {self.arch.n_params}"
            )
        if not np.all(np.isfinite(self.w)):
            raise ValueError("parameters must be finite")

    def unpack(self, w=None):
        """Views (hidden weights incl. bias column, output weights incl. bias)."""
        w = self.w if w is None else w
        h, d = self.arch.order, self.arch.n_inputs
        hidden = w[: h * (d + 1)].reshape(h, d + 1)
        output = w[h * (d + 1):]
        return hidden, output

    def copy(self) -> "Network":
        return Network(self.arch, self.w.copy())


def init(arch: Architecture, seed: int) -> Network:
    """Glorot-uniform initialization, biases included, per layer."""
    rng = np.random.default_rng(seed)
    h, d = arch.order, arch.n_inputs
    lim_hidden = np.sqrt(6.0 / (d + h))
    lim_output = np.sqrt(6.0 / (h + 1))
    hidden = rng.uniform(-lim_hidden, lim_hidden, size=h * (d + 1))
    output = rng.uniform(-lim_output, lim_output, size=h + 1)
    return Network(arch, np.concatenate([hidden, output]))


def logistic(z):
    z = np.clip(z, -_OUTPUT_PRE_CLIP, _OUTPUT_PRE_CLIP)
    return 1.0 / (1.0 + np.exp(-z))


def _layers(net: Network, X: np.ndarray, w=None):
    hidden, output = net.unpack(w)
    # Elementwise product + row sum: the summation order per row does not
    # depend on how many rows are evaluated together, so scoring one record
    # reproduces batch scoring bit for bit.
    hidden_pre = (X[:, None, :] * hidden[None, :, :-1]).sum(axis=2) + hidden[:, -1]
    hidden_act = np.tanh(hidden_pre)
    output_pre = (hidden_act * output[:-1]).sum(axis=1) + output[-1]
    return hidden_pre, hidden_act, output_pre, logistic(output_pre)


def _check_inputs(net: Network, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != net.arch.n_inputs:
        raise ValueError(
            f"expected inputs with {net.arch.n_inputs} columns, got shape {X.shape}"
        )
    if not np.all(np.isfinite(X)):
        raise ValueError("inputs contain non-finite values")
    return X


def forward(net: Network, x) -> tuple[float, ForwardCache]:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("forward takes a single feature vector")
    X = _check_inputs(net, x[None, :])
    hp, ha, op, o = _layers(net, X)
    return float(o[0]), ForwardCache(hp[0], ha[0], float(op[0]), float(o[0]))


def predict(net: Network, X, w=None) -> np.ndarray:
    """Outputs for every row of ``X``."""
    X = _check_inputs(net, X)
    return _layers(net, X, w)[3]


def residuals(net: Network, X, y, weights, w=None) -> np.ndarray:
    """Scaled residuals ``sqrt(weights / sum(weights)) * (output - y)``."""
    X = _check_inputs(net, X)
    s = _residual_scale(X, y, weights)
    return s * (_layers(net, X, w)[3] - np.asarray(y, dtype=float))


def _residual_scale(X, y, weights) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if y.shape != (X.shape[0],) or weights.shape != (X.shape[0],):
        raise ValueError("X, y and weights must have matching lengths")
    if np.any(weights <= 0):
        raise ValueError("instance weights must be positive")
    return np.sqrt(weights / weights.sum())


def residual_jacobian(net: Network, X, y, weights, w=None):
    """Residual vector ``e`` and its Jacobian ``J`` (n_instances x n_params).

    ``sum(e**2)`` is the class-weighted squared error, so a least-squares
    step on ``(e, J)`` minimizes it directly.
    """
    X = _check_inputs(net, X)
    s = _residual_scale(X, y, weights)
    _, output = net.unpack(w)
    _, hidden_act, _, out = _layers(net, X, w)
    e = s * (out - np.asarray(y, dtype=float))

    n, d = X.shape
    h = net.arch.order
    d_out = s * out * (1.0 - out)                             # de/d(output_pre)
    d_hidden = d_out[:, None] * output[:-1] * (1.0 - hidden_act ** 2)

    Xb = np.hstack([X, np.ones((n, 1))])
    J = np.empty((n, net.arch.n_params))
    J[:, : h * (d + 1)] = (d_hidden[:, :, None] * Xb[:, None, :]).reshape(n, -1)
    J[:, h * (d + 1): -1] = d_out[:, None] * hidden_act
    J[:, -1] = d_out
    return e, J
