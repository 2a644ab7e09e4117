"""Command-line interface exposing every pipeline stage.

All randomness flows from ``--seed`` (falling back to the TEMPORA_SEED
environment variable), and a JSON config file can pre-set any flag, with
explicit flags taking precedence.  Artifact-producing commands are
byte-idempotent under a fixed seed when ``--deterministic-headers`` is set.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .centrality import (
    approx_temporal_betweenness,
    centrality_csv,
    scatter_csv,
    static_betweenness,
    static_closeness,
    temporal_betweenness,
    temporal_closeness,
)
from .debruijn import (
    bipartite_csv,
    build_debruijn,
    build_debruijn_graphs,
    debruijn_csv,
    order_selection_table,
)
from .experiment import (
    ExperimentConfig,
    benchmark_speedup,
    compute_measure,
    embeddings_csv,
    run_experiment,
)
from .graph import aggregate, graph_stats, load_edge_list, time_split, write_edge_list
from .metrics import rank_metrics
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
from .paths import build_event_graph, count_paths_length_k, enumerate_paths_bruteforce, paths_to_csv
from .synth import memoryless_graph, planted_order2_graph

CHECKPOINT_FORMAT = "tempora-checkpoint-v1"


def _coerce(value: str):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    if value.lower() in ("true", "false"):
        return value.lower() == "true"
    return value


def parse_synth_spec(spec: str) -> dict:
    kind, _, rest = spec.partition(":")
    options = {}
    for item in rest.split(","):
        if not item:
            continue
        key, _, value = item.partition("=")
        if not value:
            raise ValueError(f"bad synth option {item!r}; expected key=value")
        options[key.strip()] = _coerce(value.strip())
    options["kind"] = kind.strip()
    return options


def make_synth_graph(options: dict):
    options = dict(options)
    kind = options.pop("kind")
    seed = options.pop("seed", 0)
    if kind == "memoryless":
        return memoryless_graph(seed=seed, **options)
    if kind == "order2":
        return planted_order2_graph(seed=seed, **options)
    raise ValueError(f"unknown synthetic kind {kind!r}; use memoryless or order2")


def _load_dataset(args):
    has_input = getattr(args, "input", None) is not None
    has_synth = getattr(args, "synth", None) is not None
    if has_input == has_synth:
        raise ValueError("exactly one of --input or --synth is required")
    if has_synth:
        return make_synth_graph(parse_synth_spec(args.synth))
    return load_edge_list(
        args.input,
        directed=not args.undirected,
        header=args.header,
        delimiter=args.delimiter,
    )


def _resolve_seed(args) -> int:
    seed = getattr(args, "seed", None)
    if seed is None:
        seed = int(os.environ.get("TEMPORA_SEED", "0"))
    return seed


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _add_input_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="edge-list file (gzip if the name ends in .gz)")
    p.add_argument("--synth", help="synthetic spec, e.g. order2:n_nodes=80,n_edges=4000")
    p.add_argument("--undirected", action="store_true", help="treat input rows as undirected")
    p.add_argument("--header", action="store_true", help="skip the first input line")
    p.add_argument("--delimiter", default=None, help="field delimiter (default: auto-detect)")


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default: $TEMPORA_SEED or 0)")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                   help="parallel workers for per-source centrality loops")
    p.add_argument("--output", help="output file (default: stdout)")
    p.add_argument("--deterministic-headers", action="store_true",
                   help="omit timestamps from output headers")
    p.add_argument("--config", help="JSON file of flag defaults; explicit flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tempora",
        description="Temporal-graph centralities, De Bruijn models, and centrality prediction",
    )
    parser.add_argument("--version", action="version", version=f"tempora {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    parser.subcommand_parsers = {}

    def command(name, help_text):
        p = sub.add_parser(name, help=help_text,
                           formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        _add_input_flags(p)
        _add_common_flags(p)
        parser.subcommand_parsers[name] = p
        return p

    p = command("stats", "dataset summary counts")
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = command("centrality", "exact centrality values as CSV")
    p.add_argument("--measure", default="temporal-closeness", choices=(
        "temporal-closeness", "temporal-betweenness", "static-closeness", "static-betweenness"))
    p.add_argument("--delta", type=float, default=1.0, help="maximum waiting time")
    p.add_argument("--scatter", help="also write paired static/temporal CSV to this path")

    p = command("paths", "time-respecting path counts or exhaustive enumeration")
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--length", type=int, help="count paths of exactly this length")
    p.add_argument("--enumerate", dest="enumerate_len", type=int,
                   help="exhaustively list paths up to this length (tiny graphs only)")

    p = command("debruijn", "export an order-k De Bruijn graph as CSV")
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--bipartite-output", help="also write the walk->node map to this path")

    p = command("order-select", "likelihood-ratio Markov order detection")
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--max-order", type=int, default=3)
    p.add_argument("--significance", type=float, default=0.01)
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = command("train", "train one model on the training window and checkpoint it")
    p.add_argument("--measure", default="temporal-closeness",
                   choices=("temporal-closeness", "temporal-betweenness"))
    p.add_argument("--model", default="dbgnn", choices=("dbgnn", "gcn"))
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--fraction", type=float, default=0.5)
    p.add_argument("--epochs", type=int, default=1000)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--weight-decay", type=float, default=5e-4)
    p.add_argument("--target-scaling", choices=("none", "minmax"), default="none")
    p.add_argument("--aggregation", choices=("mean", "sum"), default="mean")
    p.add_argument("--checkpoint", required=True, help="checkpoint output path")
    p.add_argument("--trace", help="write the per-epoch loss trace CSV here")
    p.add_argument("--predictions", help="write test-window predictions CSV here")

    p = command("evaluate", "full train/refit/score experiment over seeds and learning rates")
    p.add_argument("--measure", default="temporal-closeness",
                   choices=("temporal-closeness", "temporal-betweenness"))
    p.add_argument("--models", default="dbgnn,gcn", help="comma list of dbgnn,gcn")
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--fraction", type=float, default=0.5)
    p.add_argument("--epochs", type=int, default=1000)
    p.add_argument("--lr-grid", default="0.1,0.01,0.001,0.0001", help="comma list of learning rates")
    p.add_argument("--weight-decay", type=float, default=5e-4)
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--target-scaling", choices=("none", "minmax"), default="none")
    p.add_argument("--aggregation", choices=("mean", "sum"), default="mean")
    p.add_argument("--hits-k", type=int, default=10)
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--runs-csv", help="write per-run metrics CSV here")

    p = command("benchmark", "exact centrality vs refit+inference wall clock (median of N)")
    p.add_argument("--measure", default="temporal-betweenness",
                   choices=("temporal-closeness", "temporal-betweenness"))
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--fraction", type=float, default=0.5)
    p.add_argument("--epochs", type=int, default=1000)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--repeats", type=int, default=5)

    p = command("approx-betweenness", "pair-sampling temporal betweenness estimate")
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--samples", default="1000", help="sample count, or 'all' for full enumeration")

    p = command("export-embeddings", "hidden-layer activations of a trained checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--window", choices=("train", "test"), default="test")

    p = command("synth", "write a synthetic temporal graph as an edge list")
    p.add_argument("--kind", choices=("memoryless", "order2"), default="order2")
    p.add_argument("--nodes", type=int, default=80)
    p.add_argument("--edges", type=int, default=4000)
    p.add_argument("--out-degree", type=int, default=3)
    p.add_argument("--session-len", type=int, default=25)
    p.add_argument("--concentration", type=float, default=0.9)
    p.add_argument("--noise-fraction", type=float, default=0.0)
    p.add_argument("--hubs", type=int, default=0)
    p.add_argument("--rotate-hubs", action="store_true")

    return parser


def _cmd_stats(args) -> int:
    g = _load_dataset(args)
    stats = graph_stats(g).as_dict()
    if args.format == "json":
        _emit(json.dumps(stats, indent=2) + "\n", args.output)
    else:
        lines = [f"{key}: {value}" for key, value in stats.items()]
        _emit("\n".join(lines) + "\n", args.output)
    return 0


def _cmd_centrality(args) -> int:
    g = _load_dataset(args)
    if args.measure == "temporal-closeness":
        vec = temporal_closeness(g, args.delta, jobs=args.jobs)
    elif args.measure == "temporal-betweenness":
        vec = temporal_betweenness(g, args.delta, jobs=args.jobs)
    elif args.measure == "static-closeness":
        vec = static_closeness(aggregate(g))
    else:
        vec = static_betweenness(aggregate(g))
    _emit(centrality_csv(vec, deterministic_header=args.deterministic_headers), args.output)
    if args.scatter:
        family = args.measure.split("-", 1)[1]
        if family == "closeness":
            static_vec, temporal_vec = static_closeness(aggregate(g)), temporal_closeness(g, args.delta, jobs=args.jobs)
        else:
            static_vec, temporal_vec = static_betweenness(aggregate(g)), temporal_betweenness(g, args.delta, jobs=args.jobs)
        Path(args.scatter).write_text(scatter_csv(static_vec, temporal_vec))
    return 0


def _cmd_paths(args) -> int:
    g = _load_dataset(args)
    if (args.length is None) == (args.enumerate_len is None):
        raise ValueError("exactly one of --length or --enumerate is required")
    if args.length is not None:
        eg = build_event_graph(g, args.delta)
        counts = count_paths_length_k(eg, args.length)
        lines = ["node_seq,count"]
        for seq in sorted(counts.counts):
            names = "|".join(g.nodes[i] for i in seq)
            lines.append(f"{names},{counts.counts[seq]}")
        _emit("\n".join(lines) + "\n", args.output)
    else:
        paths = enumerate_paths_bruteforce(g, args.delta, args.enumerate_len)
        _emit(paths_to_csv(g, paths), args.output)
    return 0


def _cmd_debruijn(args) -> int:
    g = _load_dataset(args)
    dbg = build_debruijn(g, args.delta, args.order)
    _emit(debruijn_csv(dbg), args.output)
    if args.bipartite_output:
        Path(args.bipartite_output).write_text(bipartite_csv(dbg))
    return 0


def _cmd_order_select(args) -> int:
    g = _load_dataset(args)
    rows = order_selection_table(g, args.delta, args.max_order, args.significance)
    selected = rows[-1]["selected"]
    if args.format == "json":
        _emit(json.dumps({"selected_order": selected, "tests": rows}, indent=2) + "\n", args.output)
    else:
        lines = []
        for row in rows:
            if row["tested_order"] is None:
                continue
            lines.append(
                f"order {row['tested_order']} vs {row['tested_order'] - 1}: "
                f"statistic={row['statistic']:.4g} df={row['df']} p={row['p_value']:.4g} "
                f"accepted={row['accepted']}"
            )
        lines.append(f"selected_order: {selected}")
        _emit("\n".join(lines) + "\n", args.output)
    return 0


def _experiment_config(args, lrs, models, runs) -> ExperimentConfig:
    return ExperimentConfig(
        measure=args.measure,
        delta=args.delta,
        order=args.order,
        fraction=args.fraction,
        epochs=args.epochs,
        learning_rates=tuple(lrs),
        weight_decay=getattr(args, "weight_decay", 5e-4),
        runs=runs,
        seed=_resolve_seed(args),
        models=tuple(models),
        target_scaling=getattr(args, "target_scaling", "none"),
        aggregation=getattr(args, "aggregation", "mean"),
        hits_k=getattr(args, "hits_k", 10),
        jobs=args.jobs,
    )


def _cmd_train(args) -> int:
    g = _load_dataset(args)
    seed = _resolve_seed(args)
    train_g, test_g = time_split(g, args.fraction)
    truth_train = compute_measure(train_g, args.measure, args.delta, jobs=args.jobs)
    train_dbgs = build_debruijn_graphs(train_g, args.delta, args.order)
    test_dbgs = build_debruijn_graphs(test_g, args.delta, args.order)
    registry = build_registry(g.nodes, [train_dbgs, test_dbgs], args.order)
    if args.model == "dbgnn":
        window = prepare_dbgnn_window(registry, train_dbgs, args.aggregation)
        model = DbgnnModel(registry, seed=seed, aggregation=args.aggregation)
    else:
        window = prepare_gcn_window(aggregate(train_g))
        model = GcnModel(g.num_nodes, seed=seed)
    cfg = TrainConfig(
        epochs=args.epochs,
        learning_rate=args.lr,
        weight_decay=args.weight_decay,
        seed=seed,
        measure=args.measure,
        delta=args.delta,
        order=args.order,
        target_scaling=args.target_scaling,
        aggregation=args.aggregation,
    )
    result = train_model(model, window, np.array(truth_train.values), cfg)
    if args.predictions:
        if args.model == "dbgnn":
            test_window = prepare_dbgnn_window(registry, test_dbgs, args.aggregation)
        else:
            test_window = prepare_gcn_window(aggregate(test_g))
        truth_test = compute_measure(test_g, args.measure, args.delta, jobs=args.jobs)
        pred = predict(model, test_window, result.scaler)
        Path(args.predictions).write_text(
            predictions_csv(g.nodes, pred, truth_test.values, test_window.active_mask)
        )
    payload = {
        "format": CHECKPOINT_FORMAT,
        "model": args.model,
        "scaler": list(result.scaler) if result.scaler else None,
        "config": {
            "measure": args.measure,
            "delta": args.delta,
            "order": args.order,
            "fraction": args.fraction,
            "epochs": args.epochs,
            "learning_rate": args.lr,
            "weight_decay": args.weight_decay,
            "target_scaling": args.target_scaling,
            "aggregation": args.aggregation,
            "seed": seed,
            "undirected": args.undirected,
            "header": args.header,
            "delimiter": args.delimiter,
            "input": args.input,
            "synth": args.synth,
        },
        "tensors": {
            name: {"shape": list(arr.shape), "data": arr.ravel().tolist()}
            for name, arr in model.named_params().items()
        },
    }
    Path(args.checkpoint).write_text(json.dumps(payload))
    if args.trace:
        lines = ["epoch,loss"] + [f"{i},{loss!r}" for i, loss in enumerate(result.loss_trace)]
        Path(args.trace).write_text("\n".join(lines) + "\n")
    summary = {
        "model": args.model,
        "final_loss": result.loss_trace[-1],
        "initial_loss": result.loss_trace[0],
        "epochs": len(result.loss_trace),
        "checkpoint": args.checkpoint,
    }
    _emit(json.dumps(summary, indent=2) + "\n", args.output)
    return 0


def _load_checkpoint(path: str):
    payload = json.loads(Path(path).read_text())
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"unrecognized checkpoint format in {path}")
    tensors = {
        name: np.array(entry["data"], dtype=float).reshape(entry["shape"])
        for name, entry in payload["tensors"].items()
    }
    return payload, tensors


def _cmd_export_embeddings(args) -> int:
    payload, tensors = _load_checkpoint(args.checkpoint)
    cfg = payload["config"]
    if args.input is None and args.synth is None:
        args.input = cfg.get("input")
        args.synth = cfg.get("synth")
        args.undirected = cfg.get("undirected", False)
        args.header = cfg.get("header", False)
        args.delimiter = cfg.get("delimiter")
    g = _load_dataset(args)
    train_g, test_g = time_split(g, cfg["fraction"])
    window_g = train_g if args.window == "train" else test_g
    train_dbgs = build_debruijn_graphs(train_g, cfg["delta"], cfg["order"])
    test_dbgs = build_debruijn_graphs(test_g, cfg["delta"], cfg["order"])
    registry = build_registry(g.nodes, [train_dbgs, test_dbgs], cfg["order"])
    if payload["model"] == "dbgnn":
        model = DbgnnModel(registry, seed=cfg["seed"], aggregation=cfg["aggregation"])
        dbgs = train_dbgs if args.window == "train" else test_dbgs
        window = prepare_dbgnn_window(registry, dbgs, cfg["aggregation"])
    else:
        model = GcnModel(g.num_nodes, seed=cfg["seed"])
        window = prepare_gcn_window(aggregate(window_g))
    model.load_named_params(tensors)
    _emit(embeddings_csv(model, window, g.nodes), args.output)
    return 0


def _cmd_evaluate(args) -> int:
    g = _load_dataset(args)
    lrs = [float(x) for x in args.lr_grid.split(",") if x]
    models = [m.strip() for m in args.models.split(",") if m.strip()]
    cfg = _experiment_config(args, lrs, models, args.runs)
    report = run_experiment(g, cfg)
    _emit(report.to_text(), args.output)
    if args.report:
        Path(args.report).write_text(report.to_json(deterministic_header=args.deterministic_headers))
    if args.runs_csv:
        Path(args.runs_csv).write_text(report.runs_csv())
    return 0


def _cmd_benchmark(args) -> int:
    g = _load_dataset(args)
    cfg = _experiment_config(args, [args.lr], ["dbgnn"], 1)
    record = benchmark_speedup(g, cfg, repeats=args.repeats)
    _emit(json.dumps(record, indent=2) + "\n", args.output)
    return 0


def _cmd_approx_betweenness(args) -> int:
    g = _load_dataset(args)
    samples = args.samples if args.samples == "all" else int(args.samples)
    vec = approx_temporal_betweenness(g, args.delta, samples, seed=_resolve_seed(args), jobs=args.jobs)
    _emit(centrality_csv(vec, deterministic_header=args.deterministic_headers), args.output)
    return 0


def _cmd_synth(args) -> int:
    seed = _resolve_seed(args)
    if args.kind == "memoryless":
        g = memoryless_graph(
            n_nodes=args.nodes,
            n_edges=args.edges,
            out_degree=args.out_degree,
            session_len=args.session_len,
            seed=seed,
        )
    else:
        g = planted_order2_graph(
            n_nodes=args.nodes,
            n_edges=args.edges,
            out_degree=args.out_degree,
            session_len=args.session_len,
            concentration=args.concentration,
            noise_fraction=args.noise_fraction,
            n_hubs=args.hubs,
            rotate_hubs=args.rotate_hubs,
            seed=seed,
        )
    if args.output:
        write_edge_list(g, args.output)
    else:
        from .graph import to_edge_list

        sys.stdout.write(to_edge_list(g))
    return 0


COMMANDS = {
    "stats": _cmd_stats,
    "centrality": _cmd_centrality,
    "paths": _cmd_paths,
    "debruijn": _cmd_debruijn,
    "order-select": _cmd_order_select,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "benchmark": _cmd_benchmark,
    "approx-betweenness": _cmd_approx_betweenness,
    "export-embeddings": _cmd_export_embeddings,
    "synth": _cmd_synth,
}


def _apply_config_defaults(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    if "--config" not in argv:
        return
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        return  # argparse will report the missing value
    config = {
        key.replace("-", "_"): value
        for key, value in json.loads(Path(argv[idx + 1]).read_text()).items()
    }
    # Subcommands parse into a fresh namespace, so defaults must be overridden
    # on the invoked subparser for explicit flags to keep precedence.
    for token in argv:
        target = parser.subcommand_parsers.get(token)
        if target is not None:
            target.set_defaults(**config)
            break


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_defaults(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, KeyError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
