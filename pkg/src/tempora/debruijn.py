"""Higher-order De Bruijn graph models of time-respecting paths.

An order-k graph has one node per realized time-respecting walk of length
k-1; a weighted edge joins two overlapping walks whenever their concatenation
is a realized path of length k, with the path count as weight.  Order 1
coincides with the time-aggregated weighted graph.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.stats import chi2

from .graph import TemporalGraph
from .paths import EventGraph, PathCounts, build_event_graph, count_paths_length_k

LIKELIHOOD_FLOOR = 1e-12


@dataclass(frozen=True)
class DeBruijnGraph:
    order: int
    ho_nodes: tuple[tuple[int, ...], ...]
    edges: dict[tuple[tuple[int, ...], tuple[int, ...]], int]
    node_names: tuple[str, ...]

    @property
    def bipartite(self) -> dict[tuple[int, ...], int]:
        """Map each higher-order node to the first-order node ending its walk."""
        return {seq: seq[-1] for seq in self.ho_nodes}

    def index(self) -> dict[tuple[int, ...], int]:
        return {seq: i for i, seq in enumerate(self.ho_nodes)}

    def weight_sum(self) -> int:
        return sum(self.edges.values())

    def seq_name(self, seq: tuple[int, ...]) -> str:
        return "|".join(self.node_names[i] for i in seq)


@dataclass(frozen=True)
class TransitionModel:
    order: int
    probabilities: dict[tuple[int, ...], dict[int, float]]

    def free_parameters(self) -> int:
        return sum(len(dist) - 1 for dist in self.probabilities.values())


def debruijn_from_counts(
    g: TemporalGraph, node_counts: PathCounts, edge_counts: PathCounts
) -> DeBruijnGraph:
    k = edge_counts.k
    if node_counts.k != k - 1 and k != 1:
        raise ValueError("node counts must be one order below edge counts")
    if k == 1:
        ho_nodes = tuple((v,) for v in range(g.num_nodes))
    else:
        ho_nodes = tuple(sorted(node_counts.counts))
    known = set(ho_nodes)
    edges: dict[tuple[tuple[int, ...], tuple[int, ...]], int] = {}
    for seq, count in sorted(edge_counts.counts.items()):
        u, v = seq[:-1], seq[1:]
        if u not in known or v not in known:
            raise ValueError(f"path {seq} references an unrealized walk")
        edges[(u, v)] = count
    return DeBruijnGraph(order=k, ho_nodes=ho_nodes, edges=edges, node_names=g.nodes)


def build_debruijn_from_event_graph(eg: EventGraph, k: int) -> DeBruijnGraph:
    if k < 1:
        raise ValueError(f"order must be >= 1, got {k}")
    edge_counts = count_paths_length_k(eg, k)
    if k == 1:
        node_counts = PathCounts(k=0, counts={})
    else:
        node_counts = count_paths_length_k(eg, k - 1)
    return debruijn_from_counts(eg.graph, node_counts, edge_counts)


def build_debruijn(g: TemporalGraph, delta: float, k: int) -> DeBruijnGraph:
    """Construct the order-k De Bruijn graph of time-respecting paths."""
    if k < 1:
        raise ValueError(f"order must be >= 1, got {k}")
    return build_debruijn_from_event_graph(build_event_graph(g, delta), k)


def build_debruijn_graphs(g: TemporalGraph, delta: float, max_order: int) -> dict[int, DeBruijnGraph]:
    """Orders 1..max_order sharing a single event-graph construction."""
    eg = build_event_graph(g, delta)
    return {k: build_debruijn_from_event_graph(eg, k) for k in range(1, max_order + 1)}


def transition_probabilities(dbg: DeBruijnGraph) -> TransitionModel:
    """Row-normalized continuation probabilities per higher-order context."""
    totals: dict[tuple[int, ...], int] = {}
    for (u, _), w in dbg.edges.items():
        totals[u] = totals.get(u, 0) + w
    probs: dict[tuple[int, ...], dict[int, float]] = {}
    for (u, v), w in dbg.edges.items():
        probs.setdefault(u, {})[v[-1]] = w / totals[u]
    return TransitionModel(order=dbg.order, probabilities=probs)


def log_likelihood(model: TransitionModel, paths: PathCounts) -> float:
    """Log-likelihood of the final transition of each observed path.

    A path of length l yields one transition: context = its last
    ``model.order`` nodes before the endpoint, continuation = the endpoint.
    Unseen contexts or zero-probability continuations fall back to a smoothing
    floor instead of -inf.
    """
    if not paths.counts:
        raise ValueError("log_likelihood needs non-empty evaluation data")
    if paths.k < model.order:
        raise ValueError(
            f"paths of length {paths.k} cannot carry order-{model.order} transitions"
        )
    total = 0.0
    for seq, count in paths.counts.items():
        context = seq[-(model.order + 1):-1]
        p = model.probabilities.get(context, {}).get(seq[-1], LIKELIHOOD_FLOOR)
        total += count * math.log(max(p, LIKELIHOOD_FLOOR))
    return total


def _nested_transition_test(eval_counts: PathCounts) -> tuple[float, int]:
    """Likelihood-ratio statistic and df for full vs context-marginalized order.

    Each observed path contributes its final transition.  Transitions sharing
    the same marginal context (the path minus its oldest node) form one
    contingency table: rows are the dropped oldest nodes, columns the
    continuations.  Both orders are maximum-likelihood fits of these shared
    transitions, so the aggregate statistic 2*(L_full - L_marginal) equals the
    summed per-table independence G-statistics and is chi-squared under the
    lower order with df = sum of (rows-1)*(cols-1).  Each table's statistic
    gets the Williams small-sample correction, which de-biases the sparse
    contexts that otherwise inflate the statistic.
    """
    tables: dict[tuple[int, ...], dict[int, dict[int, int]]] = {}
    for seq, count in eval_counts.counts.items():
        rows = tables.setdefault(seq[1:-1], {})
        rows.setdefault(seq[0], {}).setdefault(seq[-1], 0)
        rows[seq[0]][seq[-1]] += count

    statistic = 0.0
    df = 0
    for rows in tables.values():
        col_totals: dict[int, int] = {}
        row_totals: dict[int, int] = {}
        for u, dist in rows.items():
            for nxt, c in dist.items():
                col_totals[nxt] = col_totals.get(nxt, 0) + c
                row_totals[u] = row_totals.get(u, 0) + c
        table_df = (len(rows) - 1) * (len(col_totals) - 1)
        if table_df <= 0:
            continue
        n = sum(col_totals.values())
        g2 = 0.0
        for u, dist in rows.items():
            for nxt, c in dist.items():
                g2 += 2.0 * c * math.log((c / row_totals[u]) / (col_totals[nxt] / n))
        williams = 1.0 + (
            (n * sum(1.0 / r for r in row_totals.values()) - 1.0)
            * (n * sum(1.0 / c for c in col_totals.values()) - 1.0)
        ) / (6.0 * n * table_df)
        statistic += max(0.0, g2) / williams
        df += table_df
    return statistic, df


def select_order(
    g: TemporalGraph, delta: float, max_k: int, significance: float = 0.01
) -> int:
    """Pick the Markov order by nested likelihood-ratio tests.

    Order k+1 is tested against k on the final transitions of length-(k+1)
    paths; the statistic 2*(L_{k+1} - L_k) is referred to a chi-squared tail
    with df = difference in realized free parameters.  The search stops at the
    first rejection or when no longer paths exist.
    """
    if max_k < 1:
        raise ValueError(f"max_k must be >= 1, got {max_k}")
    if not (0.0 < significance < 1.0):
        raise ValueError(f"significance must be in (0, 1), got {significance}")
    details = order_selection_table(g, delta, max_k, significance)
    return details[-1]["selected"] if details else 1


def order_selection_table(
    g: TemporalGraph, delta: float, max_k: int, significance: float = 0.01
) -> list[dict]:
    """Per-step diagnostics of the likelihood-ratio order search."""
    eg = build_event_graph(g, delta)
    rows: list[dict] = []
    selected = 1
    for k in range(1, max_k):
        eval_data = count_paths_length_k(eg, k + 1)
        if not eval_data.counts:
            break
        statistic, df = _nested_transition_test(eval_data)
        p_value = float(chi2.sf(statistic, df)) if df > 0 else 1.0
        accepted = df > 0 and p_value < significance
        if accepted:
            selected = k + 1
        rows.append(
            {
                "tested_order": k + 1,
                "statistic": statistic,
                "df": df,
                "p_value": p_value,
                "accepted": accepted,
                "selected": selected,
            }
        )
        if not accepted:
            break
    if not rows:
        rows.append(
            {
                "tested_order": None,
                "statistic": 0.0,
                "df": 0,
                "p_value": 1.0,
                "accepted": False,
                "selected": 1,
            }
        )
    return rows


def debruijn_csv(dbg: DeBruijnGraph) -> str:
    lines = ["src_seq,dst_seq,weight"]
    for (u, v), w in sorted(dbg.edges.items()):
        lines.append(f"{dbg.seq_name(u)},{dbg.seq_name(v)},{w}")
    return "\n".join(lines) + "\n"


def bipartite_csv(dbg: DeBruijnGraph) -> str:
    lines = ["ho_seq,first_order_node"]
    for seq in dbg.ho_nodes:
        lines.append(f"{dbg.seq_name(seq)},{dbg.node_names[seq[-1]]}")
    return "\n".join(lines) + "\n"
