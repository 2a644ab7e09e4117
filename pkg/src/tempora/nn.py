"""Minimal dense numeric kernel: layers, exact gradients, and Adam.

All math runs in float64 on dense numpy arrays.  Layer initialization uses a
counter-based Philox generator keyed by (seed, stream) so parameters are
reproducible across platforms and independent of construction order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


def require_finite(name: str, array: np.ndarray) -> np.ndarray:
    array = np.asarray(array, dtype=float)
    if not np.all(np.isfinite(array)):
        raise ValueError(f"{name} contains non-finite values")
    return array


def sigmoid(x: np.ndarray) -> np.ndarray:
    return expit(np.asarray(x, dtype=float))


def elu(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = x.copy()
    neg = x < 0
    out[neg] = np.expm1(x[neg])
    return out


def identity(x: np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=float)


def _sigmoid_grad(z: np.ndarray) -> np.ndarray:
    s = sigmoid(z)
    return s * (1.0 - s)


def _elu_grad(z: np.ndarray) -> np.ndarray:
    grad = np.ones_like(z)
    neg = z < 0
    grad[neg] = np.exp(z[neg])
    return grad


ACTIVATIONS = {
    "sigmoid": (sigmoid, _sigmoid_grad),
    "elu": (elu, _elu_grad),
    "identity": (identity, lambda z: np.ones_like(z)),
}


@dataclass
class LayerParams:
    weight: np.ndarray
    bias: np.ndarray
    activation: str

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        self.weight = require_finite("weight", self.weight)
        self.bias = require_finite("bias", self.bias)
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[1],):
            raise ValueError("weight must be (in, out) with matching bias")

    @property
    def in_dim(self) -> int:
        return self.weight.shape[0]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[1]


def init_layer(in_dim: int, out_dim: int, activation: str, seed: int, stream: int) -> LayerParams:
    """Glorot-uniform weights (+/- sqrt(6/(in+out))), zero bias."""
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed) + (np.uint64(stream) << np.uint64(32))))
    bound = np.sqrt(6.0 / max(1, in_dim + out_dim))
    weight = rng.uniform(-bound, bound, size=(in_dim, out_dim))
    return LayerParams(weight=weight, bias=np.zeros(out_dim), activation=activation)


def normalize_adjacency(weights: np.ndarray, add_self_loops: bool = True) -> np.ndarray:
    """Symmetric-degree renormalization D^-1/2 (A + I) D^-1/2.

    Degrees are weighted row sums; rows with zero degree map to zero rows.
    Directed inputs are normalized as given, without symmetrization.
    """
    a = require_finite("adjacency", weights)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"adjacency must be square, got shape {a.shape}")
    if np.any(a < 0):
        raise ValueError("adjacency weights must be non-negative")
    if add_self_loops:
        a = a + np.eye(a.shape[0])
    deg = a.sum(axis=1)
    scale = np.zeros_like(deg)
    nz = deg > 0
    scale[nz] = 1.0 / np.sqrt(deg[nz])
    return a * scale[:, None] * scale[None, :]


@dataclass
class LayerCache:
    """Recorded forward pass of one layer, consumed by the backward pass."""

    propagate: np.ndarray | None  # message matrix, None for plain dense layers
    summed: np.ndarray            # propagate @ x (or x itself)
    pre_activation: np.ndarray


def layer_forward(
    params: LayerParams, x: np.ndarray | None, propagate: np.ndarray | None = None
) -> tuple[np.ndarray, LayerCache]:
    """act(M @ X @ W + b); ``x=None`` stands for a one-hot identity input."""
    if x is None:
        if propagate is None:
            raise ValueError("identity input requires a message matrix")
        summed = propagate
    elif propagate is None:
        summed = np.asarray(x, dtype=float)
    else:
        summed = propagate @ np.asarray(x, dtype=float)
    if summed.shape[1] != params.in_dim:
        raise ValueError(
            f"input width {summed.shape[1]} does not match layer in_dim {params.in_dim}"
        )
    z = summed @ params.weight + params.bias
    act, _ = ACTIVATIONS[params.activation]
    return act(z), LayerCache(propagate=propagate, summed=summed, pre_activation=z)


def layer_backward(
    params: LayerParams, cache: LayerCache, upstream: np.ndarray, need_input_grad: bool = True
) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    """Gradients (dW, db, dX) of a recorded layer application."""
    _, grad_fn = ACTIVATIONS[params.activation]
    dz = upstream * grad_fn(cache.pre_activation)
    d_weight = cache.summed.T @ dz
    d_bias = dz.sum(axis=0)
    d_input = None
    if need_input_grad:
        d_input = dz @ params.weight.T
        if cache.propagate is not None:
            d_input = cache.propagate.T @ d_input
    return d_weight, d_bias, d_input


def graph_conv_forward(adj_norm: np.ndarray, x: np.ndarray, params: LayerParams) -> np.ndarray:
    """act(A_hat @ X @ W + b) with shape and finiteness checks."""
    adj_norm = require_finite("adjacency", adj_norm)
    x = require_finite("features", x)
    if adj_norm.ndim != 2 or adj_norm.shape[0] != adj_norm.shape[1]:
        raise ValueError(f"normalized adjacency must be square, got {adj_norm.shape}")
    if x.shape[0] != adj_norm.shape[0]:
        raise ValueError(f"features rows {x.shape[0]} != adjacency size {adj_norm.shape[0]}")
    out, _ = layer_forward(params, x, propagate=adj_norm)
    return out


def mse_loss(pred: np.ndarray, target: np.ndarray, mask: np.ndarray | None = None) -> tuple[float, np.ndarray]:
    """Mean squared error over masked entries plus its gradient w.r.t. pred."""
    pred = np.asarray(pred, dtype=float).reshape(-1)
    target = np.asarray(target, dtype=float).reshape(-1)
    if pred.shape != target.shape:
        raise ValueError("prediction/target length mismatch")
    if mask is None:
        mask = np.ones(pred.shape, dtype=bool)
    count = int(mask.sum())
    if count == 0:
        raise ValueError("mse_loss needs at least one unmasked entry")
    diff = np.where(mask, pred - target, 0.0)
    loss = float(diff @ diff) / count
    grad = 2.0 * diff / count
    return loss, grad


class AdamState:
    """Adam with L2-coupled weight decay: g' = g + wd * theta."""

    def __init__(self, shapes: list[tuple[int, ...]], lr: float, weight_decay: float = 0.0):
        if lr <= 0:
            raise ValueError(f"learning rate must be positive, got {lr}")
        self.lr = lr
        self.weight_decay = weight_decay
        self.step_count = 0
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> list[np.ndarray]:
        if len(params) != len(self.m) or len(grads) != len(self.m):
            raise ValueError("parameter/gradient count does not match optimizer state")
        for i, grad in enumerate(grads):
            if not np.all(np.isfinite(grad)):
                raise ValueError(f"non-finite gradient in parameter {i}")
        self.step_count += 1
        t = self.step_count
        out = []
        for i, (theta, grad) in enumerate(zip(params, grads)):
            g = grad + self.weight_decay * theta
            self.m[i] = ADAM_BETA1 * self.m[i] + (1.0 - ADAM_BETA1) * g
            self.v[i] = ADAM_BETA2 * self.v[i] + (1.0 - ADAM_BETA2) * g * g
            m_hat = self.m[i] / (1.0 - ADAM_BETA1 ** t)
            v_hat = self.v[i] / (1.0 - ADAM_BETA2 ** t)
            out.append(theta - self.lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS))
        return out


def adam_step(state: AdamState, params: list[np.ndarray], grads: list[np.ndarray]) -> list[np.ndarray]:
    return state.step(params, grads)


def save_params(named: dict[str, np.ndarray], path: str | Path) -> None:
    """Checkpoint format: JSON of {name: {shape, data(flat, row-major)}}."""
    payload = {
        "format": "tempora-params-v1",
        "tensors": {
            name: {"shape": list(arr.shape), "data": np.asarray(arr, dtype=float).ravel().tolist()}
            for name, arr in named.items()
        },
    }
    Path(path).write_text(json.dumps(payload))


def load_params(path: str | Path) -> dict[str, np.ndarray]:
    payload = json.loads(Path(path).read_text())
    if payload.get("format") != "tempora-params-v1":
        raise ValueError("unrecognized parameter checkpoint format")
    return {
        name: np.array(entry["data"], dtype=float).reshape(entry["shape"])
        for name, entry in payload["tensors"].items()
    }
