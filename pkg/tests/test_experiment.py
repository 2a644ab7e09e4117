import json
import math

import numpy as np
import pytest

from tempora.debruijn import build_debruijn_graphs
from tempora.experiment import (
    ExperimentConfig,
    benchmark_speedup,
    compute_measure,
    embeddings_csv,
    predictions_csv,
    run_experiment,
)
from tempora.graph import parse_edge_list
from tempora.models import DbgnnModel, build_registry, prepare_dbgnn_window
from tempora.synth import planted_order2_graph


@pytest.fixture(scope="module")
def small_graph():
    return planted_order2_graph(n_nodes=25, n_edges=700, out_degree=3, seed=3)


@pytest.fixture(scope="module")
def small_report(small_graph):
    cfg = ExperimentConfig(
        measure="temporal-closeness",
        delta=1.0,
        order=2,
        epochs=60,
        learning_rates=(0.05, 0.01),
        runs=2,
        seed=1,
        models=("dbgnn", "gcn"),
        target_scaling="minmax",
    )
    return run_experiment(small_graph, cfg), cfg


def test_report_structure(small_report):
    report, cfg = small_report
    assert len(report.runs) == cfg.runs * len(cfg.learning_rates) * len(cfg.models)
    assert len(report.aggregates) == len(cfg.learning_rates) * len(cfg.models)
    assert report.dataset["nodes"] == 25
    best_rows = [a for a in report.aggregates if a.best]
    assert {a.model for a in best_rows} == {"dbgnn", "gcn"}


def test_aggregates_recomputable_from_runs(small_report):
    report, _ = small_report
    for agg in report.aggregates:
        bucket = [
            r for r in report.runs
            if r.model == agg.model and r.learning_rate == agg.learning_rate
        ]
        values = [r.spearman for r in bucket]
        mean = sum(values) / len(values)
        var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
        assert agg.spearman_mean == pytest.approx(mean, abs=1e-12)
        assert agg.spearman_std == pytest.approx(math.sqrt(var), abs=1e-12)


def test_report_determinism(small_graph):
    cfg = ExperimentConfig(
        measure="temporal-closeness", delta=1.0, order=2, epochs=40,
        learning_rates=(0.05,), runs=2, seed=4, models=("dbgnn",),
    )
    a = run_experiment(small_graph, cfg)
    b = run_experiment(small_graph, cfg)
    assert [r.spearman for r in a.runs] == [r.spearman for r in b.runs]
    assert [r.mae for r in a.runs] == [r.mae for r in b.runs]
    assert a.to_json(deterministic_header=True) != ""
    ja = json.loads(a.to_json(deterministic_header=True))
    jb = json.loads(b.to_json(deterministic_header=True))
    for run_a, run_b in zip(ja["runs"], jb["runs"]):
        for key in ("spearman", "kendall_tau", "hits_at_k", "mae"):
            assert run_a[key] == run_b[key]


def test_report_renders_text_json_csv(small_report):
    report, _ = small_report
    text = report.to_text()
    assert "spearman" in text and "dbgnn" in text
    payload = json.loads(report.to_json())
    assert "generated" in payload
    assert "config" in payload and "aggregates" in payload
    csv = report.runs_csv()
    assert csv.splitlines()[0].startswith("model,learning_rate,seed")
    assert len(csv.strip().splitlines()) == len(report.runs) + 1


def test_empty_test_window_errors():
    g = parse_edge_list("a b 1\nb c 2\n")
    cfg = ExperimentConfig(measure="temporal-closeness", runs=1, epochs=5, learning_rates=(0.01,))
    with pytest.warns(UserWarning):
        with pytest.raises(ValueError):
            run_experiment(g, ExperimentConfig(measure="temporal-closeness", runs=1, epochs=5,
                                               learning_rates=(0.01,), fraction=0.999))


def test_measure_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(measure="pagerank")
    with pytest.raises(ValueError):
        ExperimentConfig(models=("dbgnn", "mystery"))
    with pytest.raises(ValueError):
        compute_measure(parse_edge_list("a b 1\n"), "pagerank", 1.0)


def test_benchmark_speedup_record(small_graph):
    cfg = ExperimentConfig(
        measure="temporal-closeness", delta=1.0, order=2, epochs=10,
        learning_rates=(0.01,), runs=1, seed=0, models=("dbgnn",),
    )
    record = benchmark_speedup(small_graph, cfg, repeats=3)
    assert record["repeats"] == 3
    assert len(record["exact_samples"]) == 3
    assert record["exact_seconds"] > 0
    assert record["refit_inference_seconds"] > 0
    assert record["speedup"] == pytest.approx(
        record["exact_seconds"] / record["refit_inference_seconds"]
    )


def test_embeddings_csv_shape_and_determinism(small_graph):
    dbgs = build_debruijn_graphs(small_graph, 1.0, 2)
    registry = build_registry(small_graph.nodes, [dbgs], 2)
    window = prepare_dbgnn_window(registry, dbgs)
    model = DbgnnModel(registry, seed=6)
    text = embeddings_csv(model, window, small_graph.nodes)
    lines = text.strip().splitlines()
    assert lines[0] == "node," + ",".join(f"e{i}" for i in range(8))
    assert len(lines) == int(window.active_mask.sum()) + 1
    assert text == embeddings_csv(model, window, small_graph.nodes)


def test_embeddings_zero_params_all_zero(small_graph):
    dbgs = build_debruijn_graphs(small_graph, 1.0, 2)
    registry = build_registry(small_graph.nodes, [dbgs], 2)
    window = prepare_dbgnn_window(registry, dbgs)
    model = DbgnnModel(registry, seed=6)
    model.set_param_list([np.zeros_like(p) for p in model.param_list()])
    emb = model.embeddings(window)
    assert emb == pytest.approx(np.zeros_like(emb))


def test_predictions_csv(small_graph):
    pred = np.arange(small_graph.num_nodes, dtype=float)
    truth = pred * 2
    text = predictions_csv(small_graph.nodes, pred, truth)
    lines = text.strip().splitlines()
    assert lines[0] == "node,predicted,ground_truth"
    assert len(lines) == small_graph.num_nodes + 1
