"""End-to-end experiment runner, timing benchmark, and embedding export.

Pipeline per run: time-based split, exact ground-truth centralities on both
windows, De Bruijn graphs for both windows over a shared registry, training
on the training-window targets, inductive refit and prediction on the test
window, rank metrics against the test-window ground truth.  Runs repeat over
seeds and a learning-rate grid; aggregates report mean and standard
deviation with the best row flagged per model.
"""
from __future__ import annotations

import json
import math
import statistics
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

import numpy as np

from .centrality import CentralityVector, temporal_betweenness, temporal_closeness
from .debruijn import build_debruijn_graphs
from .graph import TemporalGraph, aggregate, time_split
from .metrics import MetricSet, rank_metrics
from .models import (
    DbgnnModel,
    GcnModel,
    TrainConfig,
    build_registry,
    predict,
    prepare_dbgnn_window,
    prepare_gcn_window,
    train_model,
)

MEASURES = ("temporal-closeness", "temporal-betweenness")


@dataclass
class ExperimentConfig:
    measure: str = "temporal-closeness"
    delta: float = 1.0
    order: int = 2
    fraction: float = 0.5
    epochs: int = 1000
    learning_rates: tuple[float, ...] = (0.1, 0.01, 0.001, 0.0001)
    weight_decay: float = 5e-4
    runs: int = 20
    seed: int = 0
    models: tuple[str, ...] = ("dbgnn", "gcn")
    target_scaling: str = "none"
    aggregation: str = "mean"
    hits_k: int = 10
    jobs: int = 1

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise ValueError(f"measure must be one of {MEASURES}, got {self.measure!r}")
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        unknown = set(self.models) - {"dbgnn", "gcn"}
        if unknown:
            raise ValueError(f"unknown models: {sorted(unknown)}")


@dataclass
class RunRecord:
    model: str
    learning_rate: float
    seed: int
    spearman: float
    kendall_tau: float
    hits_at_k: int
    mae: float
    train_seconds: float


@dataclass
class AggregateRecord:
    model: str
    learning_rate: float
    runs: int
    spearman_mean: float
    spearman_std: float
    kendall_mean: float
    kendall_std: float
    hits_mean: float
    hits_std: float
    mae_mean: float
    mae_std: float
    best: bool = False


@dataclass
class ExperimentReport:
    config: dict
    dataset: dict
    runs: list[RunRecord]
    aggregates: list[AggregateRecord]
    timings: dict

    def to_json(self, deterministic_header: bool = False) -> str:
        payload = {
            "config": self.config,
            "dataset": self.dataset,
            "runs": [asdict(r) for r in self.runs],
            "aggregates": [asdict(a) for a in self.aggregates],
        }
        if deterministic_header:
            # wall-clock fields are measurements, not reproducible results
            for run in payload["runs"]:
                run.pop("train_seconds", None)
        else:
            payload["timings"] = self.timings
            payload["generated"] = datetime.now(timezone.utc).isoformat()
        return json.dumps(payload, indent=2, allow_nan=True) + "\n"

    def to_text(self) -> str:
        lines = [
            f"measure={self.config['measure']} delta={self.config['delta']} "
            f"order={self.config['order']} runs={self.config['runs']}",
            f"dataset: {self.dataset}",
            "",
            f"{'model':>6} {'lr':>8} {'spearman':>18} {'kendall':>18} "
            f"{'hits@k':>14} {'mae':>18} {'best':>5}",
        ]
        for a in self.aggregates:
            lines.append(
                f"{a.model:>6} {a.learning_rate:>8g} "
                f"{a.spearman_mean:>9.4f} ± {a.spearman_std:<6.4f} "
                f"{a.kendall_mean:>9.4f} ± {a.kendall_std:<6.4f} "
                f"{a.hits_mean:>6.2f} ± {a.hits_std:<5.2f} "
                f"{a.mae_mean:>10.4g} ± {a.mae_std:<8.4g} "
                f"{'*' if a.best else '':>5}"
            )
        lines.append("")
        lines.append(
            "timings: "
            + " ".join(f"{k}={v:.4g}" for k, v in self.timings.items() if isinstance(v, float))
        )
        return "\n".join(lines) + "\n"

    def runs_csv(self) -> str:
        lines = ["model,learning_rate,seed,spearman,kendall_tau,hits_at_k,mae,train_seconds"]
        for r in self.runs:
            lines.append(
                f"{r.model},{r.learning_rate!r},{r.seed},{r.spearman!r},"
                f"{r.kendall_tau!r},{r.hits_at_k},{r.mae!r},{r.train_seconds!r}"
            )
        return "\n".join(lines) + "\n"


def compute_measure(g: TemporalGraph, measure: str, delta: float, jobs: int = 1) -> CentralityVector:
    if measure == "temporal-closeness":
        return temporal_closeness(g, delta, jobs=jobs)
    if measure == "temporal-betweenness":
        return temporal_betweenness(g, delta, jobs=jobs)
    raise ValueError(f"unsupported measure {measure!r}")


def _make_model(name: str, registry, num_nodes: int, seed: int, aggregation: str):
    if name == "dbgnn":
        return DbgnnModel(registry, seed=seed, aggregation=aggregation)
    if name == "gcn":
        return GcnModel(num_nodes, seed=seed)
    raise ValueError(f"unknown model {name!r}")


def _aggregate(records: list[RunRecord]) -> AggregateRecord:
    def mean_std(values):
        if len(values) == 1:
            return float(values[0]), 0.0
        return float(statistics.fmean(values)), float(statistics.stdev(values))

    sp = mean_std([r.spearman for r in records])
    kd = mean_std([r.kendall_tau for r in records])
    ht = mean_std([r.hits_at_k for r in records])
    ma = mean_std([r.mae for r in records])
    first = records[0]
    return AggregateRecord(
        model=first.model,
        learning_rate=first.learning_rate,
        runs=len(records),
        spearman_mean=sp[0],
        spearman_std=sp[1],
        kendall_mean=kd[0],
        kendall_std=kd[1],
        hits_mean=ht[0],
        hits_std=ht[1],
        mae_mean=ma[0],
        mae_std=ma[1],
    )


def run_experiment(g: TemporalGraph, cfg: ExperimentConfig) -> ExperimentReport:
    train_g, test_g = time_split(g, cfg.fraction)
    if test_g.num_edges == 0:
        raise ValueError("test window is empty; choose a smaller training fraction")

    t0 = time.perf_counter()
    truth_train = compute_measure(train_g, cfg.measure, cfg.delta, jobs=cfg.jobs)
    gt_train_s = time.perf_counter() - t0
    t0 = time.perf_counter()
    truth_test = compute_measure(test_g, cfg.measure, cfg.delta, jobs=cfg.jobs)
    gt_test_s = time.perf_counter() - t0

    train_dbgs = build_debruijn_graphs(train_g, cfg.delta, cfg.order)
    test_dbgs = build_debruijn_graphs(test_g, cfg.delta, cfg.order)
    registry = build_registry(g.nodes, [train_dbgs, test_dbgs], cfg.order)
    dbgnn_train = prepare_dbgnn_window(registry, train_dbgs, cfg.aggregation)
    dbgnn_test = prepare_dbgnn_window(registry, test_dbgs, cfg.aggregation)
    gcn_train = prepare_gcn_window(aggregate(train_g))
    gcn_test = prepare_gcn_window(aggregate(test_g))

    y_train = np.array(truth_train.values)
    y_test = np.array(truth_test.values)
    test_mask = dbgnn_test.active_mask

    records: list[RunRecord] = []
    last_trained = None
    for model_name in cfg.models:
        windows = (dbgnn_train, dbgnn_test) if model_name == "dbgnn" else (gcn_train, gcn_test)
        for lr in cfg.learning_rates:
            for run in range(cfg.runs):
                seed = cfg.seed + run
                model = _make_model(model_name, registry, g.num_nodes, seed, cfg.aggregation)
                tcfg = TrainConfig(
                    epochs=cfg.epochs,
                    learning_rate=lr,
                    weight_decay=cfg.weight_decay,
                    seed=seed,
                    measure=cfg.measure,
                    delta=cfg.delta,
                    order=cfg.order,
                    target_scaling=cfg.target_scaling,
                    aggregation=cfg.aggregation,
                )
                t0 = time.perf_counter()
                result = train_model(model, windows[0], y_train, tcfg)
                train_s = time.perf_counter() - t0
                pred = predict(model, windows[1], result.scaler)
                metrics = rank_metrics(pred[test_mask], y_test[test_mask], k=cfg.hits_k)
                records.append(
                    RunRecord(
                        model=model_name,
                        learning_rate=lr,
                        seed=seed,
                        spearman=metrics.spearman,
                        kendall_tau=metrics.kendall_tau,
                        hits_at_k=metrics.hits_at_k,
                        mae=metrics.mae,
                        train_seconds=train_s,
                    )
                )
                if model_name == "dbgnn":
                    last_trained = (model, result.scaler)

    # Refit + inference wall clock: rebuild the test-window De Bruijn graphs
    # and run one frozen forward pass, mirroring how a pretrained model is
    # applied to new data.
    refit_s = math.nan
    if last_trained is not None:
        model, scaler = last_trained
        t0 = time.perf_counter()
        fresh = build_debruijn_graphs(test_g, cfg.delta, cfg.order)
        window = prepare_dbgnn_window(registry, fresh, cfg.aggregation)
        predict(model, window, scaler)
        refit_s = time.perf_counter() - t0

    aggregates = []
    for model_name in cfg.models:
        for lr in cfg.learning_rates:
            bucket = [r for r in records if r.model == model_name and r.learning_rate == lr]
            if bucket:
                aggregates.append(_aggregate(bucket))
    for model_name in cfg.models:
        rows = [a for a in aggregates if a.model == model_name]
        if rows:
            best = max(rows, key=lambda a: (a.spearman_mean if not math.isnan(a.spearman_mean) else -math.inf))
            best.best = True

    timings = {
        "ground_truth_train_s": gt_train_s,
        "ground_truth_test_s": gt_test_s,
        "refit_inference_s": refit_s,
        "speedup": (gt_test_s / refit_s) if refit_s and not math.isnan(refit_s) else math.nan,
    }
    dataset = {
        "nodes": g.num_nodes,
        "temporal_edges": g.num_edges,
        "train_edges": train_g.num_edges,
        "test_edges": test_g.num_edges,
        "active_test_nodes": int(test_mask.sum()),
    }
    return ExperimentReport(
        config=asdict(cfg),
        dataset=dataset,
        runs=records,
        aggregates=aggregates,
        timings=timings,
    )


def benchmark_speedup(
    g: TemporalGraph, cfg: ExperimentConfig, repeats: int = 5
) -> dict:
    """Median-of-``repeats`` wall-clock comparison on the test window.

    Exact side: the full temporal centrality computation.  Model side: De
    Bruijn construction on the test window plus one frozen forward pass of a
    model trained once beforehand.  Timing runs single-threaded.
    """
    train_g, test_g = time_split(g, cfg.fraction)
    truth_train = compute_measure(train_g, cfg.measure, cfg.delta, jobs=1)
    train_dbgs = build_debruijn_graphs(train_g, cfg.delta, cfg.order)
    test_dbgs = build_debruijn_graphs(test_g, cfg.delta, cfg.order)
    registry = build_registry(g.nodes, [train_dbgs, test_dbgs], cfg.order)
    window_train = prepare_dbgnn_window(registry, train_dbgs, cfg.aggregation)
    model = DbgnnModel(registry, seed=cfg.seed, aggregation=cfg.aggregation)
    tcfg = TrainConfig(
        epochs=cfg.epochs,
        learning_rate=cfg.learning_rates[0],
        weight_decay=cfg.weight_decay,
        seed=cfg.seed,
        measure=cfg.measure,
        delta=cfg.delta,
        order=cfg.order,
        target_scaling=cfg.target_scaling,
        aggregation=cfg.aggregation,
    )
    result = train_model(model, window_train, np.array(truth_train.values), tcfg)

    exact_times, model_times = [], []
    for _ in range(repeats):
        t0 = time.perf_counter()
        compute_measure(test_g, cfg.measure, cfg.delta, jobs=1)
        exact_times.append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        fresh = build_debruijn_graphs(test_g, cfg.delta, cfg.order)
        window = prepare_dbgnn_window(registry, fresh, cfg.aggregation)
        predict(model, window, result.scaler)
        model_times.append(time.perf_counter() - t0)
    exact_median = statistics.median(exact_times)
    model_median = statistics.median(model_times)
    return {
        "measure": cfg.measure,
        "repeats": repeats,
        "exact_seconds": exact_median,
        "refit_inference_seconds": model_median,
        "speedup": exact_median / model_median,
        "exact_samples": exact_times,
        "refit_samples": model_times,
    }


def predictions_csv(nodes: tuple[str, ...], pred, truth, mask=None) -> str:
    lines = ["node,predicted,ground_truth"]
    for i, name in enumerate(nodes):
        if mask is not None and not mask[i]:
            continue
        lines.append(f"{name},{float(pred[i])!r},{float(truth[i])!r}")
    return "\n".join(lines) + "\n"


def embeddings_csv(model, window, nodes: tuple[str, ...]) -> str:
    """Bipartite-layer activations, one row per active first-order node."""
    emb = model.embeddings(window)
    width = emb.shape[1]
    header = "node," + ",".join(f"e{i}" for i in range(width))
    lines = [header]
    for i, name in enumerate(nodes):
        if not window.active_mask[i]:
            continue
        lines.append(name + "," + ",".join(repr(float(x)) for x in emb[i]))
    return "\n".join(lines) + "\n"
