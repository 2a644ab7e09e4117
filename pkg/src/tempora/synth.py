"""Synthetic temporal-graph generators with controllable path memory.

Both generators emit timestamped edges from random-walk sessions: steps
inside a session are one time unit apart (so consecutive steps chain into
time-respecting paths at delta=1), and sessions are separated by gaps larger
than delta.  The memoryless generator continues each walk from the current
node alone; the planted-order-2 generator conditions the continuation on the
previous two nodes, with a concentration knob controlling how far the
length-2 path statistics deviate from a first-order factorization.

The planted generator can also emit repeated "hub" contacts, each hub
touching only a fixed handful of partners, at isolated timestamps.  Those
edges inflate static weights without creating any length-2 time-respecting
path or widening temporal reach, and the hub set can rotate between the
first and second half of the data, which makes static weight profiles
actively misleading about temporal reachability.
"""
from __future__ import annotations

import random

from .graph import TemporalGraph

DEFAULT_DELTA = 1.0
SESSION_GAP = 5.0


def _random_out_neighbors(n: int, out_degree: int, rng: random.Random) -> list[list[int]]:
    if n < out_degree + 1:
        raise ValueError("need more nodes than the out-degree")
    # A ring edge keeps the walk able to leave every node; the rest is random.
    neighbors = []
    for v in range(n):
        others = [u for u in range(n) if u != v]
        chosen = {(v + 1) % n}
        while len(chosen) < out_degree:
            chosen.add(rng.choice(others))
        neighbors.append(sorted(chosen))
    return neighbors


def memoryless_graph(
    n_nodes: int = 60,
    n_edges: int = 3000,
    out_degree: int = 3,
    session_len: int = 25,
    seed: int = 0,
) -> TemporalGraph:
    """Walk sessions whose continuation depends only on the current node."""
    rng = random.Random(seed)
    neighbors = _random_out_neighbors(n_nodes, out_degree, rng)
    # Node-specific preference weights keep the first-order chain non-uniform.
    prefs = [[0.25 + rng.random() for _ in nbrs] for nbrs in neighbors]
    edges: list[tuple[str, str, float]] = []
    t = 0.0
    while len(edges) < n_edges:
        cur = rng.randrange(n_nodes)
        for _ in range(session_len):
            if len(edges) >= n_edges:
                break
            nxt = rng.choices(neighbors[cur], weights=prefs[cur])[0]
            t += 1.0
            edges.append((f"n{cur}", f"n{nxt}", t))
            cur = nxt
        t += SESSION_GAP
    return TemporalGraph.from_edges(edges, directed=True)


def _blocked_out_neighbors(
    n: int, out_degree: int, block_of: list[int], rng: random.Random
) -> list[list[int]]:
    """Half the out-neighbors stay in the node's block, half cross over."""
    blocks: dict[int, list[int]] = {}
    for v, b in enumerate(block_of):
        blocks.setdefault(b, []).append(v)
    neighbors = []
    for v in range(n):
        own = [u for u in blocks[block_of[v]] if u != v]
        cross = [u for u in range(n) if block_of[u] != block_of[v]]
        take_cross = out_degree // 2
        take_own = out_degree - take_cross
        chosen = set(rng.sample(own, min(take_own, len(own))))
        chosen.update(rng.sample(cross, min(take_cross, len(cross))))
        while len(chosen) < out_degree:
            u = rng.randrange(n)
            if u != v:
                chosen.add(u)
        neighbors.append(sorted(chosen))
    return neighbors


def planted_order2_graph(
    n_nodes: int = 80,
    n_edges: int = 4000,
    out_degree: int = 3,
    session_len: int = 25,
    concentration: float = 0.9,
    noise_fraction: float = 0.0,
    n_hubs: int = 0,
    rotate_hubs: bool = False,
    block_split: float = 0.0,
    activity_skew: float = 0.0,
    concurrency: int = 1,
    seed: int = 0,
) -> TemporalGraph:
    """Walk sessions whose continuation depends on the previous two nodes.

    With probability ``concentration`` a step from (prev, cur) goes to a
    designated continuation chosen per (prev, cur) pair; otherwise it is
    uniform over cur's out-neighbors.  ``noise_fraction`` of the edges are
    repeated contacts from a few fixed partners into hub nodes, placed at
    timestamps that cannot chain with anything else; with ``rotate_hubs`` the
    hub set changes between the first and second half of the data.

    A positive ``block_split`` divides the nodes into two blocks of that
    proportion.  Out-neighbor sets then mix blocks evenly, but designated
    continuations prefer the current block, so time-respecting walks mostly
    stay inside a block even though the static topology looks well mixed.

    ``activity_skew`` > 0 draws session starts and exploration steps with
    node weights proportional to rank^(-skew), giving the heavy-tailed
    activity profile of empirical contact data.  ``concurrency`` runs that
    many walkers side by side within each session block (edges of one tick
    share a timestamp), so trajectories that touch the same node a tick
    apart splice into each other's time-respecting paths.
    """
    if not (0.0 <= concentration <= 1.0):
        raise ValueError(f"concentration must be in [0, 1], got {concentration}")
    if not (0.0 <= noise_fraction < 1.0):
        raise ValueError(f"noise_fraction must be in [0, 1), got {noise_fraction}")
    if noise_fraction > 0 and n_hubs < 1:
        raise ValueError("noise edges require n_hubs >= 1")
    if not (0.0 <= block_split < 1.0):
        raise ValueError(f"block_split must be in [0, 1), got {block_split}")
    rng = random.Random(seed)
    if block_split > 0.0:
        boundary = max(2, min(n_nodes - 2, round(block_split * n_nodes)))
        block_of = [0 if v < boundary else 1 for v in range(n_nodes)]
        neighbors = _blocked_out_neighbors(n_nodes, out_degree, block_of, rng)
    else:
        block_of = [0] * n_nodes
        neighbors = _random_out_neighbors(n_nodes, out_degree, rng)
    designated: dict[tuple[int, int], int] = {}
    for cur in range(n_nodes):
        same_block = [u for u in neighbors[cur] if block_of[u] == block_of[cur]]
        pool = same_block if same_block else neighbors[cur]
        for prev in range(n_nodes):
            designated[(prev, cur)] = rng.choice(pool)
    if activity_skew > 0.0:
        ranks = list(range(n_nodes))
        rng.shuffle(ranks)
        popularity = [(ranks[v] + 1.0) ** (-activity_skew) for v in range(n_nodes)]
    else:
        popularity = [1.0] * n_nodes
    start_nodes = list(range(n_nodes))

    hub_pool = rng.sample(range(n_nodes), 2 * n_hubs) if n_hubs else []
    first_hubs, second_hubs = hub_pool[:n_hubs], hub_pool[n_hubs:]
    if not rotate_hubs:
        second_hubs = first_hubs
    partners = {
        hub: rng.sample([v for v in range(n_nodes) if v != hub], 3)
        for hub in set(first_hubs) | set(second_hubs)
    }

    noise_per_session = 0
    if noise_fraction > 0:
        noise_per_session = max(1, round(session_len * noise_fraction / (1.0 - noise_fraction)))

    if concurrency < 1:
        raise ValueError(f"concurrency must be >= 1, got {concurrency}")
    edges: list[tuple[str, str, float]] = []
    t = 0.0
    while len(edges) < n_edges:
        cur = [rng.choices(start_nodes, weights=popularity)[0] for _ in range(concurrency)]
        prev: list[int | None] = [None] * concurrency
        for _ in range(session_len):
            if len(edges) >= n_edges:
                break
            t += 1.0
            for w in range(concurrency):
                if len(edges) >= n_edges:
                    break
                if prev[w] is None or rng.random() > concentration:
                    nbrs = neighbors[cur[w]]
                    nxt = rng.choices(nbrs, weights=[popularity[u] for u in nbrs])[0]
                else:
                    nxt = designated[(prev[w], cur[w])]
                edges.append((f"n{cur[w]}", f"n{nxt}", t))
                prev[w], cur[w] = cur[w], nxt
        t += SESSION_GAP
        hubs = first_hubs if len(edges) < n_edges // 2 else second_hubs
        for _ in range(noise_per_session):
            if len(edges) >= n_edges or not hubs:
                break
            hub = rng.choice(hubs)
            partner = rng.choice(partners[hub])
            # An isolated timestamp slot: nothing within delta on either side.
            t += SESSION_GAP
            edges.append((f"n{partner}", f"n{hub}", t))
            t += SESSION_GAP
    return TemporalGraph.from_edges(edges, directed=True)
