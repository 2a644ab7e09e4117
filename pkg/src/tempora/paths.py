"""Time-respecting path machinery over the event graph.

An event is one temporal edge; event e1=(u,v;t) precedes e2=(v,w;t') whenever
0 < t'-t <= delta.  The resulting DAG drives path counting, shortest
time-respecting distances, and shortest-path counts.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass

from .graph import TemporalGraph


@dataclass(frozen=True)
class EventGraph:
    """DAG over temporal edges under the delta-succession relation."""

    graph: TemporalGraph
    delta: float
    successors: tuple[tuple[int, ...], ...]

    @property
    def events(self) -> tuple[tuple[int, int, float], ...]:
        return self.graph.temporal_edges

    @property
    def num_events(self) -> int:
        return len(self.graph.temporal_edges)

    def predecessor_lists(self) -> list[list[int]]:
        preds: list[list[int]] = [[] for _ in range(self.num_events)]
        for i, succ in enumerate(self.successors):
            for j in succ:
                preds[j].append(i)
        return preds


@dataclass(frozen=True)
class PathCounts:
    """Counts of time-respecting paths of a fixed length, keyed by node sequence."""

    k: int
    counts: dict[tuple[int, ...], int]

    def total(self) -> int:
        return sum(self.counts.values())


@dataclass
class TemporalSSSPResult:
    """Per-node and per-event shortest time-respecting path structure.

    ``dist[v]`` is the minimum hop count over time-respecting paths from the
    source (inf if unreachable); ``sigma[v]`` counts distinct shortest paths,
    where paths are distinct iff their temporal-edge sequences differ.
    Event-level fields support dependency accumulation: ``event_level[e]`` is
    the hop count of shortest paths ending with event e (None if e lies on no
    path from the source), ``event_sigma[e]`` their count, and
    ``event_preds[e]`` the predecessor events one level up.
    """

    source: int
    dist: list[float]
    sigma: list[int]
    event_level: list[int | None]
    event_sigma: list[int]
    event_preds: list[list[int]]
    levels: list[list[int]]


def build_event_graph(g: TemporalGraph, delta: float) -> EventGraph:
    """Index the delta-succession relation with per-node binary search."""
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    events = g.temporal_edges
    out_events: dict[int, list[int]] = defaultdict(list)
    out_times: dict[int, list[float]] = defaultdict(list)
    for idx, (src, _, t) in enumerate(events):
        out_events[src].append(idx)
        out_times[src].append(t)
    successors = []
    for src, dst, t in events:
        times = out_times.get(dst)
        if not times:
            successors.append(())
            continue
        lo = bisect_right(times, t)
        hi = bisect_right(times, t + delta) if math.isfinite(delta) else len(times)
        successors.append(tuple(out_events[dst][lo:hi]))
    return EventGraph(graph=g, delta=delta, successors=tuple(successors))


def count_paths_length_k(eg: EventGraph, k: int) -> PathCounts:
    """Count time-respecting paths of length k, keyed by their node sequences.

    Length-1 paths are the temporal edges themselves; longer paths are walks
    of length k-1 in the event graph projected to node sequences.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    events = eg.events
    counts: dict[tuple[int, ...], int] = defaultdict(int)
    if k == 1:
        for src, dst, _ in events:
            counts[(src, dst)] += 1
        return PathCounts(k=1, counts=dict(counts))
    frontier: dict[tuple[int, tuple[int, ...]], int] = {
        (i, (src, dst)): 1 for i, (src, dst, _) in enumerate(events)
    }
    for _ in range(k - 1):
        nxt: dict[tuple[int, tuple[int, ...]], int] = defaultdict(int)
        for (i, seq), c in frontier.items():
            for j in eg.successors[i]:
                nxt[(j, seq + (events[j][1],))] += c
        frontier = nxt
        if not frontier:
            break
    for (_, seq), c in frontier.items():
        counts[seq] += c
    return PathCounts(k=k, counts=dict(counts))


def temporal_sssp(eg: EventGraph, source: int) -> TemporalSSSPResult:
    """Level-synchronous BFS over the event graph from one source node.

    Every temporal edge leaving the source seeds the frontier at hop count 1;
    the first timestamp of a path is unconstrained.  Paths may revisit nodes.
    """
    g = eg.graph
    n = g.num_nodes
    if not (0 <= source < n):
        raise ValueError(f"unknown source index {source} for {n} nodes")
    m = eg.num_events
    events = eg.events
    level: list[int | None] = [None] * m
    sigma_e = [0] * m
    preds: list[list[int]] = [[] for _ in range(m)]
    levels: list[list[int]] = [[]]

    frontier = [i for i, (src, _, _) in enumerate(events) if src == source]
    for e in frontier:
        level[e] = 1
        sigma_e[e] = 1
    cur = 1
    while frontier:
        levels.append(frontier)
        nxt = []
        for e in frontier:
            for f in eg.successors[e]:
                if level[f] is None:
                    level[f] = cur + 1
                    nxt.append(f)
                if level[f] == cur + 1:
                    sigma_e[f] += sigma_e[e]
                    preds[f].append(e)
        frontier = nxt
        cur += 1

    dist = [math.inf] * n
    sigma = [0] * n
    dist[source] = 0
    for e, lvl in enumerate(level):
        if lvl is None:
            continue
        head = events[e][1]
        if lvl < dist[head]:
            dist[head] = lvl
            sigma[head] = sigma_e[e]
        elif lvl == dist[head]:
            sigma[head] += sigma_e[e]
    # The empty path reaches the source in 0 hops regardless of returning edges.
    dist[source] = 0
    sigma[source] = 1
    return TemporalSSSPResult(
        source=source,
        dist=dist,
        sigma=sigma,
        event_level=level,
        event_sigma=sigma_e,
        event_preds=preds,
        levels=levels,
    )


def enumerate_paths_bruteforce(
    g: TemporalGraph, delta: float, max_len: int
) -> list[tuple[tuple[int, ...], tuple[float, ...]]]:
    """Exhaustively list time-respecting paths of length 1..max_len.

    Each result is one temporal-edge sequence, reported as its node-index
    sequence plus timestamps; duplicate temporal edges yield separate paths.
    Intended for tiny instances only; the caller bounds the work.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    edges = g.temporal_edges
    max_len = min(max_len, len(edges))
    out: dict[int, list[int]] = defaultdict(list)
    for idx, (src, _, _) in enumerate(edges):
        out[src].append(idx)
    results: list[tuple[tuple[int, ...], tuple[float, ...]]] = []

    def extend(nodes: tuple[int, ...], times: tuple[float, ...], last: int, last_t: float):
        if len(times) == max_len:
            return
        for j in out.get(last, ()):
            _, dst, t = edges[j]
            if 0 < t - last_t <= delta:
                step_nodes = nodes + (dst,)
                step_times = times + (t,)
                results.append((step_nodes, step_times))
                extend(step_nodes, step_times, dst, t)

    if max_len >= 1:
        for src, dst, t in edges:
            results.append(((src, dst), (t,)))
            extend((src, dst), (t,), dst, t)
    return results


def paths_to_csv(
    g: TemporalGraph, paths: list[tuple[tuple[int, ...], tuple[float, ...]]]
) -> str:
    """Render enumerated paths as ``node_seq,timestamps`` CSV rows."""
    lines = ["node_seq,timestamps"]
    for nodes, times in paths:
        names = "|".join(g.nodes[i] for i in nodes)
        stamps = "|".join(repr(t) for t in times)
        lines.append(f"{names},{stamps}")
    return "\n".join(lines) + "\n"
