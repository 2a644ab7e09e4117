"""Temporal graph data model, edge-list ingestion, aggregation and time splits."""
from __future__ import annotations

import gzip
import io
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, TextIO


class EdgeListParseError(ValueError):
    """Malformed edge-list input; carries the 1-based offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class TemporalGraph:
    """A node set plus a time-sorted multiset of directed time-stamped edges.

    ``nodes`` maps dense indices to node names; ``temporal_edges`` holds
    ``(source_index, target_index, timestamp)`` triples sorted by timestamp
    (stable for equal timestamps).  Undirected observations are materialized
    as two directed edges with equal timestamps, observation first.
    Instances are immutable and safe to share across threads.
    """

    nodes: tuple[str, ...]
    temporal_edges: tuple[tuple[int, int, float], ...]
    directed: bool = True

    def __post_init__(self):
        n = len(self.nodes)
        last_t = -math.inf
        for src, dst, t in self.temporal_edges:
            if not (0 <= src < n and 0 <= dst < n):
                raise ValueError(f"edge endpoint out of range: ({src}, {dst}) with {n} nodes")
            if t < last_t:
                raise ValueError("temporal_edges must be sorted by timestamp")
            last_t = t
        object.__setattr__(self, "_index", {name: i for i, name in enumerate(self.nodes)})

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.temporal_edges)

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown node {name!r}") from None

    def active_nodes(self) -> set[int]:
        """Indices of nodes incident to at least one temporal edge."""
        active = set()
        for src, dst, _ in self.temporal_edges:
            active.add(src)
            active.add(dst)
        return active

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str, float]], directed: bool = True) -> TemporalGraph:
        """Build a graph from named ``(source, target, timestamp)`` triples.

        Dense indices are assigned in first-appearance order over the
        timestamp-sorted edge sequence, which makes serialization round-trips
        exact.
        """
        named = [(str(u), str(v), float(t)) for u, v, t in edges]
        if not directed:
            mirrored = []
            for u, v, t in named:
                mirrored.append((u, v, t))
                mirrored.append((v, u, t))
            named = mirrored
        named.sort(key=lambda e: e[2])
        index: dict[str, int] = {}
        triples = []
        for u, v, t in named:
            if u not in index:
                index[u] = len(index)
            if v not in index:
                index[v] = len(index)
            triples.append((index[u], index[v], t))
        names = tuple(sorted(index, key=index.__getitem__))
        return cls(nodes=names, temporal_edges=tuple(triples), directed=directed)


@dataclass(frozen=True)
class WeightedGraph:
    """Time-aggregated graph: edge weights count temporal-edge occurrences."""

    nodes: tuple[str, ...]
    edges: dict[tuple[int, int], int]

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    def weight_sum(self) -> int:
        return sum(self.edges.values())


@dataclass(frozen=True)
class GraphStats:
    node_count: int
    temporal_edge_count: int
    static_edge_count: int
    time_span: float
    distinct_timestamps: int

    def as_dict(self) -> dict:
        return {
            "nodes": self.node_count,
            "temporal_edges": self.temporal_edge_count,
            "static_edges": self.static_edge_count,
            "time_span": self.time_span,
            "distinct_timestamps": self.distinct_timestamps,
        }


def _split_line(line: str, delimiter: str | None) -> list[str]:
    if delimiter is None:
        return line.split("," if "," in line else None)
    return [f.strip() for f in line.split(delimiter)]


def parse_edge_list(
    stream: TextIO | str,
    delimiter: str | None = None,
    directed: bool = True,
    header: bool = False,
    timestamp_column: int = 2,
) -> TemporalGraph:
    """Parse ``source target timestamp`` rows into a TemporalGraph.

    The delimiter is auto-detected per line (comma if present, else any
    whitespace) unless forced.  Extra columns are ignored; the timestamp may
    live in a non-default column via ``timestamp_column``.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    edges: list[tuple[str, str, float]] = []
    required = max(3, timestamp_column + 1)
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if header and lineno == 1:
            continue
        if not line or line.startswith("#"):
            continue
        fields = _split_line(line, delimiter)
        if len(fields) < required:
            raise EdgeListParseError(
                f"expected at least {required} fields, got {len(fields)}", line=lineno
            )
        try:
            t = float(fields[timestamp_column])
        except ValueError:
            raise EdgeListParseError(
                f"non-numeric timestamp {fields[timestamp_column]!r}", line=lineno
            ) from None
        if math.isnan(t):
            raise EdgeListParseError("timestamp is NaN", line=lineno)
        edges.append((fields[0], fields[1], t))
    if not edges:
        raise EdgeListParseError("empty input: no edge rows found")
    return TemporalGraph.from_edges(edges, directed=directed)


def load_edge_list(path: str | Path, **options) -> TemporalGraph:
    """Read an edge-list file; gzip is used when the name ends in ``.gz``."""
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rt") as fh:
        return parse_edge_list(fh, **options)


def to_edge_list(g: TemporalGraph, delimiter: str = " ") -> str:
    """Serialize to edge-list text; undirected graphs emit one row per observation."""
    edges = g.temporal_edges
    if not g.directed:
        # Mirrored pairs are adjacent (observation first); emit the observations.
        edges = g.temporal_edges[0::2]
    lines = []
    for src, dst, t in edges:
        lines.append(f"{g.nodes[src]}{delimiter}{g.nodes[dst]}{delimiter}{t!r}")
    return "\n".join(lines) + "\n"


def write_edge_list(g: TemporalGraph, path: str | Path, delimiter: str = " ") -> None:
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "wt") as fh:
        fh.write(to_edge_list(g, delimiter=delimiter))


def aggregate(g: TemporalGraph) -> WeightedGraph:
    """Collapse temporal edges into static edges weighted by occurrence count."""
    weights: dict[tuple[int, int], int] = {}
    for src, dst, _ in g.temporal_edges:
        key = (src, dst)
        weights[key] = weights.get(key, 0) + 1
    return WeightedGraph(nodes=g.nodes, edges=weights)


def time_split(g: TemporalGraph, fraction: float) -> tuple[TemporalGraph, TemporalGraph]:
    """Cut the time-sorted edge sequence into leading/trailing windows.

    The training window holds the first ``ceil(fraction * m)`` edges; both
    windows share the full node index space.  For undirected graphs the cut
    is taken on observation pairs so mirrored edges never straddle it.
    """
    if not (0.0 < fraction < 1.0):
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    if g.num_edges == 0:
        raise ValueError("cannot split an empty graph")
    if g.directed:
        cut = math.ceil(fraction * g.num_edges)
    else:
        cut = 2 * math.ceil(fraction * (g.num_edges // 2))
    train = TemporalGraph(g.nodes, g.temporal_edges[:cut], g.directed)
    test = TemporalGraph(g.nodes, g.temporal_edges[cut:], g.directed)
    if test.num_edges == 0:
        warnings.warn("time_split produced an empty test window", stacklevel=2)
    return train, test


def graph_stats(g: TemporalGraph) -> GraphStats:
    timestamps = {t for _, _, t in g.temporal_edges}
    span = (max(timestamps) - min(timestamps)) if timestamps else 0.0
    return GraphStats(
        node_count=g.num_nodes,
        temporal_edge_count=g.num_edges,
        static_edge_count=len(aggregate(g).edges),
        time_span=span,
        distinct_timestamps=len(timestamps),
    )
