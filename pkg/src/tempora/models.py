"""Time-aware and static graph models for node-level centrality regression.

The time-aware model runs one graph convolution per De Bruijn order over
one-hot node encodings, funnels all orders through a bipartite aggregation
onto first-order nodes, and ends in a scalar head.  The static baseline is a
two-layer graph convolution over the weighted time-aggregated graph.  A
shared node registry spanning both data windows sizes the one-hot encodings
so trained models refit to a future window with possibly different active
nodes and edges.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .debruijn import DeBruijnGraph
from .graph import WeightedGraph
from .nn import (
    AdamState,
    LayerParams,
    init_layer,
    layer_backward,
    layer_forward,
    mse_loss,
    normalize_adjacency,
)

HIDDEN_WIDTH = 16
EMBED_WIDTH = 8


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int, learning_rate: float):
        super().__init__(
            f"non-finite loss at epoch {epoch} (learning rate {learning_rate})"
        )
        self.epoch = epoch
        self.learning_rate = learning_rate


@dataclass(frozen=True)
class Registry:
    """Shared one-hot index space over first- and higher-order nodes.

    Built from the union of De Bruijn node sets across all windows so that
    nodes appearing only in a future window already own a slot.
    """

    node_names: tuple[str, ...]
    per_order: dict[int, tuple[tuple[int, ...], ...]]

    def __post_init__(self):
        object.__setattr__(
            self,
            "_index",
            {k: {seq: i for i, seq in enumerate(seqs)} for k, seqs in self.per_order.items()},
        )

    @property
    def orders(self) -> list[int]:
        return sorted(self.per_order)

    @property
    def max_order(self) -> int:
        return max(self.per_order)

    def size(self, order: int) -> int:
        return len(self.per_order[order])

    def slot(self, order: int, seq: tuple[int, ...]) -> int:
        try:
            return self._index[order][seq]
        except KeyError:
            raise ValueError(
                f"walk {seq} of order {order} has no registry slot; "
                "the registry must be built over every window"
            ) from None


def build_registry(
    node_names: tuple[str, ...], window_graphs: list[dict[int, DeBruijnGraph]], max_order: int
) -> Registry:
    per_order: dict[int, tuple[tuple[int, ...], ...]] = {
        1: tuple((v,) for v in range(len(node_names)))
    }
    for k in range(2, max_order + 1):
        union: set[tuple[int, ...]] = set()
        for dbgs in window_graphs:
            if k not in dbgs:
                raise ValueError(f"window is missing the order-{k} De Bruijn graph")
            union.update(dbgs[k].ho_nodes)
        per_order[k] = tuple(sorted(union))
    return Registry(node_names=node_names, per_order=per_order)


@dataclass
class DbgnnWindow:
    """Per-window tensors: normalized per-order message matrices, bipartite
    aggregation matrix over active walks, and the active-node mask."""

    orders: list[int]
    conv_mats: dict[int, np.ndarray]
    bip_matrix: np.ndarray
    active_mask: np.ndarray


@dataclass
class GcnWindow:
    conv_mat: np.ndarray
    active_mask: np.ndarray


def _active_mask_from_order1(dbg1: DeBruijnGraph, n: int) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    for (u, v) in dbg1.edges:
        mask[u[-1]] = True
        mask[v[-1]] = True
    return mask


def prepare_dbgnn_window(
    registry: Registry, dbgs: dict[int, DeBruijnGraph], aggregation: str = "mean"
) -> DbgnnWindow:
    """Lay the window's De Bruijn graphs out over the registry index space.

    Message matrices are oriented so a walk receives along De Bruijn edge
    direction; self-loops keep every registry slot well-defined.  Bipartite
    aggregation runs from the window's realized walks (every first-order slot
    stays connected through its own order-1 walk).
    """
    if aggregation not in ("mean", "sum"):
        raise ValueError(f"aggregation must be 'mean' or 'sum', got {aggregation!r}")
    orders = registry.orders
    if sorted(dbgs) != orders:
        raise ValueError(f"window orders {sorted(dbgs)} do not match registry orders {orders}")
    n_first = registry.size(1)
    conv_mats: dict[int, np.ndarray] = {}
    offsets: dict[int, int] = {}
    total = 0
    for k in orders:
        offsets[k] = total
        total += registry.size(k)
    incidence = np.zeros((n_first, total))
    for k in orders:
        size = registry.size(k)
        raw = np.zeros((size, size))
        for (u, v), w in dbgs[k].edges.items():
            raw[registry.slot(k, v), registry.slot(k, u)] += w
        conv_mats[k] = normalize_adjacency(raw, add_self_loops=True)
        active_walks = registry.per_order[1] if k == 1 else dbgs[k].ho_nodes
        for seq in active_walks:
            incidence[seq[-1], offsets[k] + registry.slot(k, seq)] = 1.0
    if aggregation == "mean":
        counts = incidence.sum(axis=1, keepdims=True)
        counts[counts == 0] = 1.0
        bip = incidence / counts
    else:
        bip = incidence
    return DbgnnWindow(
        orders=orders,
        conv_mats=conv_mats,
        bip_matrix=bip,
        active_mask=_active_mask_from_order1(dbgs[1], n_first),
    )


def prepare_gcn_window(wg: WeightedGraph) -> GcnWindow:
    n = wg.num_nodes
    raw = np.zeros((n, n))
    for (u, v), w in wg.edges.items():
        raw[v, u] += w
    mask = np.zeros(n, dtype=bool)
    for (u, v) in wg.edges:
        mask[u] = True
        mask[v] = True
    return GcnWindow(conv_mat=normalize_adjacency(raw, add_self_loops=True), active_mask=mask)


class DbgnnModel:
    """Per-order graph convolutions (one-hot -> 16, sigmoid), bipartite
    aggregation (16 -> 8, ELU), scalar head (8 -> 1, ELU)."""

    def __init__(self, registry: Registry, seed: int = 0, aggregation: str = "mean"):
        if aggregation not in ("mean", "sum"):
            raise ValueError(f"aggregation must be 'mean' or 'sum', got {aggregation!r}")
        self.registry = registry
        self.aggregation = aggregation
        self.seed = seed
        self.conv = {
            k: init_layer(registry.size(k), HIDDEN_WIDTH, "sigmoid", seed, stream=k)
            for k in registry.orders
        }
        self.bipartite = init_layer(HIDDEN_WIDTH, EMBED_WIDTH, "elu", seed, stream=64)
        self.head = init_layer(EMBED_WIDTH, 1, "elu", seed, stream=65)

    @property
    def orders(self) -> list[int]:
        return self.registry.orders

    def layers(self) -> list[tuple[str, LayerParams]]:
        named = [(f"conv{k}", self.conv[k]) for k in self.orders]
        named.append(("bipartite", self.bipartite))
        named.append(("head", self.head))
        return named

    def param_list(self) -> list[np.ndarray]:
        out = []
        for _, layer in self.layers():
            out.extend([layer.weight, layer.bias])
        return out

    def set_param_list(self, params: list[np.ndarray]) -> None:
        layers = self.layers()
        if len(params) != 2 * len(layers):
            raise ValueError("parameter list length mismatch")
        for (name, layer), i in zip(layers, range(0, len(params), 2)):
            layer.weight = params[i]
            layer.bias = params[i + 1]

    def named_params(self) -> dict[str, np.ndarray]:
        out = {}
        for name, layer in self.layers():
            out[f"{name}.weight"] = layer.weight
            out[f"{name}.bias"] = layer.bias
        return out

    def load_named_params(self, named: dict[str, np.ndarray]) -> None:
        for name, layer in self.layers():
            layer.weight = np.asarray(named[f"{name}.weight"], dtype=float)
            layer.bias = np.asarray(named[f"{name}.bias"], dtype=float)

    def _forward(self, window: DbgnnWindow):
        if window.orders != self.orders:
            raise ValueError("window orders do not match the model")
        parts, caches = [], {}
        for k in self.orders:
            out, cache = layer_forward(self.conv[k], None, propagate=window.conv_mats[k])
            parts.append(out)
            caches[k] = cache
        stacked = np.vstack(parts) if parts else np.zeros((0, HIDDEN_WIDTH))
        agg = window.bip_matrix @ stacked
        bip_out, bip_cache = layer_forward(self.bipartite, agg)
        head_out, head_cache = layer_forward(self.head, bip_out)
        return head_out[:, 0], (caches, bip_cache, head_cache)

    def forward(self, window: DbgnnWindow) -> np.ndarray:
        return self._forward(window)[0]

    def embeddings(self, window: DbgnnWindow) -> np.ndarray:
        """Bipartite-layer activations: one 8-dim row per first-order node."""
        parts = [layer_forward(self.conv[k], None, propagate=window.conv_mats[k])[0] for k in self.orders]
        agg = window.bip_matrix @ np.vstack(parts)
        return layer_forward(self.bipartite, agg)[0]

    def loss_and_grads(self, window: DbgnnWindow, target: np.ndarray, mask: np.ndarray):
        pred, (caches, bip_cache, head_cache) = self._forward(window)
        loss, dpred = mse_loss(pred, target, mask)
        d_head_w, d_head_b, d_bip_out = layer_backward(self.head, head_cache, dpred[:, None])
        d_bip_w, d_bip_b, d_agg = layer_backward(self.bipartite, bip_cache, d_bip_out)
        d_stacked = window.bip_matrix.T @ d_agg
        grads: list[np.ndarray] = []
        offset = 0
        for k in self.orders:
            size = self.registry.size(k)
            d_w, d_b, _ = layer_backward(
                self.conv[k], caches[k], d_stacked[offset : offset + size], need_input_grad=False
            )
            grads.extend([d_w, d_b])
            offset += size
        grads.extend([d_bip_w, d_bip_b, d_head_w, d_head_b])
        return loss, grads


class GcnModel:
    """Static baseline: conv(one-hot -> 16, sigmoid), conv(16 -> 8, ELU),
    scalar head (8 -> 1, ELU) over the weighted time-aggregated graph."""

    def __init__(self, num_nodes: int, seed: int = 0):
        self.num_nodes = num_nodes
        self.seed = seed
        self.layer1 = init_layer(num_nodes, HIDDEN_WIDTH, "sigmoid", seed, stream=1)
        self.layer2 = init_layer(HIDDEN_WIDTH, EMBED_WIDTH, "elu", seed, stream=2)
        self.head = init_layer(EMBED_WIDTH, 1, "elu", seed, stream=3)

    def layers(self) -> list[tuple[str, LayerParams]]:
        return [("layer1", self.layer1), ("layer2", self.layer2), ("head", self.head)]

    def param_list(self) -> list[np.ndarray]:
        out = []
        for _, layer in self.layers():
            out.extend([layer.weight, layer.bias])
        return out

    def set_param_list(self, params: list[np.ndarray]) -> None:
        layers = self.layers()
        if len(params) != 2 * len(layers):
            raise ValueError("parameter list length mismatch")
        for (name, layer), i in zip(layers, range(0, len(params), 2)):
            layer.weight = params[i]
            layer.bias = params[i + 1]

    def named_params(self) -> dict[str, np.ndarray]:
        out = {}
        for name, layer in self.layers():
            out[f"{name}.weight"] = layer.weight
            out[f"{name}.bias"] = layer.bias
        return out

    def load_named_params(self, named: dict[str, np.ndarray]) -> None:
        for name, layer in self.layers():
            layer.weight = np.asarray(named[f"{name}.weight"], dtype=float)
            layer.bias = np.asarray(named[f"{name}.bias"], dtype=float)

    def _forward(self, window: GcnWindow):
        m = window.conv_mat
        if m.shape[0] != self.num_nodes:
            raise ValueError("window size does not match the model")
        h1, c1 = layer_forward(self.layer1, None, propagate=m)
        h2, c2 = layer_forward(self.layer2, h1, propagate=m)
        out, c3 = layer_forward(self.head, h2)
        return out[:, 0], (c1, c2, c3)

    def forward(self, window: GcnWindow) -> np.ndarray:
        return self._forward(window)[0]

    def embeddings(self, window: GcnWindow) -> np.ndarray:
        m = window.conv_mat
        h1, _ = layer_forward(self.layer1, None, propagate=m)
        return layer_forward(self.layer2, h1, propagate=m)[0]

    def loss_and_grads(self, window: GcnWindow, target: np.ndarray, mask: np.ndarray):
        pred, (c1, c2, c3) = self._forward(window)
        loss, dpred = mse_loss(pred, target, mask)
        d_head_w, d_head_b, d_h2 = layer_backward(self.head, c3, dpred[:, None])
        d_l2_w, d_l2_b, d_h1 = layer_backward(self.layer2, c2, d_h2)
        d_l1_w, d_l1_b, _ = layer_backward(self.layer1, c1, d_h1, need_input_grad=False)
        return loss, [d_l1_w, d_l1_b, d_l2_w, d_l2_b, d_head_w, d_head_b]


@dataclass
class TrainConfig:
    epochs: int = 1000
    learning_rate: float = 0.01
    weight_decay: float = 5e-4
    seed: int = 0
    measure: str = "temporal-closeness"
    delta: float = 1.0
    order: int = 2
    target_scaling: str = "none"  # none | minmax
    aggregation: str = "mean"     # mean | sum

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning rate must be positive, got {self.learning_rate}")
        if self.target_scaling not in ("none", "minmax"):
            raise ValueError(f"unknown target scaling {self.target_scaling!r}")


@dataclass
class TrainResult:
    loss_trace: list[float]
    scaler: tuple[float, float] | None


def _fit_scaler(targets: np.ndarray, mask: np.ndarray) -> tuple[float, float]:
    lo = float(targets[mask].min())
    hi = float(targets[mask].max())
    if hi <= lo:
        hi = lo + 1.0
    return lo, hi


def train_model(model, window, targets: np.ndarray, cfg: TrainConfig) -> TrainResult:
    """Full-batch Adam on masked MSE; deterministic under a fixed config."""
    targets = np.asarray(targets, dtype=float)
    mask = np.asarray(window.active_mask, dtype=bool)
    if not mask.any():
        raise ValueError("training window has no active nodes")
    scaler = None
    y = targets
    if cfg.target_scaling == "minmax":
        scaler = _fit_scaler(targets, mask)
        y = (targets - scaler[0]) / (scaler[1] - scaler[0])
    opt = AdamState(
        [p.shape for p in model.param_list()], cfg.learning_rate, cfg.weight_decay
    )
    trace: list[float] = []
    for epoch in range(cfg.epochs):
        loss, grads = model.loss_and_grads(window, y, mask)
        if not np.isfinite(loss):
            raise TrainingDiverged(epoch, cfg.learning_rate)
        trace.append(loss)
        model.set_param_list(opt.step(model.param_list(), grads))
    return TrainResult(loss_trace=trace, scaler=scaler)


def predict(model, window, scaler: tuple[float, float] | None = None) -> np.ndarray:
    """Frozen-parameter forward pass on a (possibly future) window."""
    pred = model.forward(window)
    if scaler is not None:
        lo, hi = scaler
        pred = pred * (hi - lo) + lo
    return pred
