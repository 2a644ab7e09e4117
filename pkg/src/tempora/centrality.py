"""Exact and approximate path-based centralities, temporal and static.

Temporal betweenness follows the shortest time-respecting path definition:
paths are distinct iff their temporal-edge sequences differ, and a node
appearing several times on one path is counted once per path.  Temporal and
static closeness use incoming hop distances with unreachable pairs capped at
``n`` so disconnected windows keep finite, rank-preserving scores.
"""
from __future__ import annotations

import math
import random
from collections import defaultdict, deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .graph import TemporalGraph, WeightedGraph
from .paths import EventGraph, TemporalSSSPResult, build_event_graph, temporal_sssp


@dataclass
class CentralityVector:
    measure: str
    nodes: tuple[str, ...]
    values: list[float]
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.values) != len(self.nodes):
            raise ValueError("centrality vector length must equal the node count")

    def by_name(self, name: str) -> float:
        return self.values[self.nodes.index(name)]


def _source_contributions(
    eg: EventGraph, sp: TemporalSSSPResult, target_weights: dict[int, float] | None = None
) -> list[float]:
    """Shortest-path dependency of every node on one source.

    Returns per-node sums of weight(t) * sigma_{s,t}(v) / sigma_{s,t} over
    reachable targets t (weight 1 each by default).  Works backward over the
    BFS DAG of events; psi(e) aggregates, for every final event f reachable
    from e, the number of DAG paths e->f scaled by weight/sigma of f's target.
    An event's own "ending here" term is excluded again when reading off
    interior contributions, so endpoints never count.

    Shortest time-respecting paths need not be simple: waiting-time limits can
    force a path back through an earlier node.  Plain accumulation would then
    credit that node once per occurrence.  Nodes at risk are detected with an
    ancestor-head bitmask, and for those the prefix counts are recomputed
    excluding earlier occurrences, which restores once-per-path counting.
    """
    events = eg.events
    m = eg.num_events
    n = eg.graph.num_nodes
    level, sigma_e, preds = sp.event_level, sp.event_sigma, sp.event_preds
    dist, sigma = sp.dist, sp.sigma

    def final_term(e: int) -> float:
        head = events[e][1]
        if level[e] != dist[head]:
            return 0.0
        if target_weights is None:
            w = 1.0
        else:
            w = target_weights.get(head, 0.0)
            if w == 0.0:
                return 0.0
        return w / sigma[head]

    psi = [0.0] * m
    for bucket in reversed(sp.levels):
        for e in bucket:
            psi[e] += final_term(e)
            for p in preds[e]:
                psi[p] += psi[e]

    # Ancestor-head bitmasks over the BFS DAG flag nodes that can repeat
    # along a shortest path.
    anc = [0] * m
    flagged: set[int] = set()
    for bucket in sp.levels:
        for e in bucket:
            mask = 0
            for p in preds[e]:
                mask |= anc[p] | (1 << events[p][1])
            anc[e] = mask
            head = events[e][1]
            if (mask >> head) & 1:
                flagged.add(head)

    avoiding: dict[int, list[int]] = {}
    for v in flagged:
        sav = [0] * m
        for bucket in sp.levels:
            for e in bucket:
                if level[e] == 1:
                    sav[e] = 1
                else:
                    sav[e] = sum(sav[p] for p in preds[e] if events[p][1] != v)
        avoiding[v] = sav

    contrib = [0.0] * n
    for bucket in sp.levels:
        for e in bucket:
            head = events[e][1]
            phi = psi[e] - final_term(e)
            if phi == 0.0:
                continue
            prefix = avoiding[head][e] if head in flagged else sigma_e[e]
            contrib[head] += prefix * phi
    return contrib


_WORKER_EG: EventGraph | None = None


def _init_worker(eg: EventGraph) -> None:
    global _WORKER_EG
    _WORKER_EG = eg


def _betweenness_source(source: int) -> list[float]:
    sp = temporal_sssp(_WORKER_EG, source)
    return _source_contributions(_WORKER_EG, sp)


def _closeness_source(source: int) -> list[float]:
    return temporal_sssp(_WORKER_EG, source).dist


def _map_sources(eg: EventGraph, worker, jobs: int) -> list[list[float]]:
    sources = range(eg.graph.num_nodes)
    if jobs <= 1:
        _init_worker(eg)
        return [worker(s) for s in sources]
    chunk = max(1, len(sources) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(eg,)) as ex:
        return list(ex.map(worker, sources, chunksize=chunk))


def temporal_betweenness(g: TemporalGraph, delta: float, jobs: int = 1) -> CentralityVector:
    """Sum of shortest time-respecting path fractions through each node."""
    eg = build_event_graph(g, delta)
    n = g.num_nodes
    values = [0.0] * n
    # Reduction in source order keeps float summation deterministic under jobs.
    for contrib in _map_sources(eg, _betweenness_source, jobs):
        for v in range(n):
            values[v] += contrib[v]
    return CentralityVector(
        measure="temporal-betweenness", nodes=g.nodes, values=values, params={"delta": delta}
    )


def temporal_closeness(g: TemporalGraph, delta: float, jobs: int = 1) -> CentralityVector:
    """Reciprocal of incoming shortest time-respecting distances, cap ``n``."""
    n = g.num_nodes
    if n < 2:
        raise ValueError("temporal closeness requires at least 2 nodes")
    eg = build_event_graph(g, delta)
    sums = [0.0] * n
    for s, dist in enumerate(_map_sources(eg, _closeness_source, jobs)):
        for v in range(n):
            if v == s:
                continue
            d = dist[v]
            sums[v] += d if math.isfinite(d) else n
    values = [1.0 / sums[v] for v in range(n)]
    return CentralityVector(
        measure="temporal-closeness",
        nodes=g.nodes,
        values=values,
        params={"delta": delta, "unreachable_cap": n},
    )


def _out_adjacency(wg: WeightedGraph) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(wg.num_nodes)]
    for (src, dst) in wg.edges:
        adj[src].append(dst)
    for lst in adj:
        lst.sort()
    return adj


def static_betweenness(wg: WeightedGraph) -> CentralityVector:
    """Brandes betweenness on the aggregated topology, unit hop lengths."""
    n = wg.num_nodes
    adj = _out_adjacency(wg)
    values = [0.0] * n
    for s in range(n):
        stack: list[int] = []
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = [0] * n
        sigma[s] = 1
        dist = [-1] * n
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [0.0] * n
        while stack:
            w = stack.pop()
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                values[w] += delta[w]
    return CentralityVector(measure="static-betweenness", nodes=wg.nodes, values=values)


def static_closeness(wg: WeightedGraph) -> CentralityVector:
    """Reciprocal incoming hop distances on the aggregated topology, cap ``n``."""
    n = wg.num_nodes
    if n < 2:
        raise ValueError("static closeness requires at least 2 nodes")
    adj = _out_adjacency(wg)
    sums = [0.0] * n
    for s in range(n):
        dist = [-1] * n
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        for v in range(n):
            if v == s:
                continue
            sums[v] += dist[v] if dist[v] >= 0 else n
    values = [1.0 / sums[v] for v in range(n)]
    return CentralityVector(
        measure="static-closeness", nodes=wg.nodes, values=values, params={"unreachable_cap": n}
    )


def approx_temporal_betweenness(
    g: TemporalGraph,
    delta: float,
    samples: int | str,
    seed: int = 0,
    jobs: int = 1,
) -> CentralityVector:
    """Uniform ordered-pair sampling estimator of temporal betweenness.

    Draws ``samples`` ordered node pairs (s, t) with replacement, accumulates
    sigma_{s,t}(v)/sigma_{s,t} for each intermediate v, and rescales by
    n(n-1)/samples, which makes the estimator unbiased.  ``samples="all"``
    replaces sampling with full enumeration and equals the exact measure.
    """
    n = g.num_nodes
    if samples == "all":
        vec = temporal_betweenness(g, delta, jobs=jobs)
        vec.measure = "approx-temporal-betweenness"
        vec.params = {"delta": delta, "samples": "all", "seed": seed}
        return vec
    samples = int(samples)
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    if n < 2:
        raise ValueError("need at least 2 nodes to sample ordered pairs")
    rng = random.Random(seed)
    by_source: dict[int, dict[int, float]] = defaultdict(lambda: defaultdict(float))
    for _ in range(samples):
        s = rng.randrange(n)
        t = rng.randrange(n - 1)
        if t >= s:
            t += 1
        by_source[s][t] += 1.0
    eg = build_event_graph(g, delta)
    scale = n * (n - 1) / samples
    values = [0.0] * n
    for s in sorted(by_source):
        sp = temporal_sssp(eg, s)
        contrib = _source_contributions(eg, sp, target_weights=dict(by_source[s]))
        for v in range(n):
            values[v] += contrib[v] * scale
    return CentralityVector(
        measure="approx-temporal-betweenness",
        nodes=g.nodes,
        values=values,
        params={"delta": delta, "samples": samples, "seed": seed},
    )


def centrality_csv(vec: CentralityVector, deterministic_header: bool = False) -> str:
    lines = [f"# measure={vec.measure}"]
    for key in sorted(vec.params):
        lines.append(f"# {key}={vec.params[key]}")
    if not deterministic_header:
        lines.append(f"# generated={datetime.now(timezone.utc).isoformat()}")
    lines.append("node,value")
    for name, value in zip(vec.nodes, vec.values):
        lines.append(f"{name},{value!r}")
    return "\n".join(lines) + "\n"


def scatter_csv(static_vec: CentralityVector, temporal_vec: CentralityVector) -> str:
    """Paired static/temporal values per node, for scatter exports."""
    if static_vec.nodes != temporal_vec.nodes:
        raise ValueError("scatter export requires matching node sets")
    lines = ["node,static_value,temporal_value"]
    for name, s_val, t_val in zip(static_vec.nodes, static_vec.values, temporal_vec.values):
        lines.append(f"{name},{s_val!r},{t_val!r}")
    return "\n".join(lines) + "\n"


def write_csv(text: str, path: str | Path) -> None:
    Path(path).write_text(text)
