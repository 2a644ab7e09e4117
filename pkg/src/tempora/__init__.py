"""Temporal-graph centralities, De Bruijn graph models, and centrality prediction."""

from .graph import (
    EdgeListParseError,
    GraphStats,
    TemporalGraph,
    WeightedGraph,
    aggregate,
    graph_stats,
    load_edge_list,
    parse_edge_list,
    time_split,
    to_edge_list,
    write_edge_list,
)
from .paths import (
    EventGraph,
    PathCounts,
    TemporalSSSPResult,
    build_event_graph,
    count_paths_length_k,
    enumerate_paths_bruteforce,
    temporal_sssp,
)
from .centrality import (
    CentralityVector,
    approx_temporal_betweenness,
    static_betweenness,
    static_closeness,
    temporal_betweenness,
    temporal_closeness,
)
from .debruijn import (
    DeBruijnGraph,
    TransitionModel,
    build_debruijn,
    build_debruijn_graphs,
    log_likelihood,
    order_selection_table,
    select_order,
    transition_probabilities,
)
from .metrics import MetricSet, hits_at_k, kendall_tau, mean_absolute_error, rank_metrics, spearman
from .models import (
    DbgnnModel,
    GcnModel,
    Registry,
    TrainConfig,
    TrainResult,
    build_registry,
    predict,
    prepare_dbgnn_window,
    prepare_gcn_window,
    train_model,
)
from .experiment import (
    ExperimentConfig,
    ExperimentReport,
    benchmark_speedup,
    compute_measure,
    run_experiment,
)
from .synth import memoryless_graph, planted_order2_graph

__version__ = "0.1.0"
