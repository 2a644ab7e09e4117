import math
import random

import pytest

from oracles import oracle_path_counts, random_temporal_graph
from tempora.debruijn import (
    bipartite_csv,
    build_debruijn,
    build_debruijn_graphs,
    debruijn_csv,
    log_likelihood,
    order_selection_table,
    select_order,
    transition_probabilities,
)
from tempora.graph import aggregate, parse_edge_list
from tempora.paths import PathCounts, build_event_graph, count_paths_length_k
from tempora.synth import memoryless_graph, planted_order2_graph


def test_build_debruijn_k2_example(g1):
    dbg = build_debruijn(g1, 2.0, 2)
    name = dbg.seq_name
    assert [name(s) for s in dbg.ho_nodes] == ["a|b", "b|c", "c|d"]
    named_edges = {(name(u), name(v)): w for (u, v), w in dbg.edges.items()}
    assert named_edges == {("a|b", "b|c"): 1, ("b|c", "c|d"): 1}
    bip = {name(seq): dbg.node_names[v] for seq, v in dbg.bipartite.items()}
    assert bip == {"a|b": "b", "b|c": "c", "c|d": "d"}


def test_build_debruijn_k1_equals_aggregate(g1):
    dbg = build_debruijn(g1, 2.0, 1)
    wg = aggregate(g1)
    assert dbg.ho_nodes == tuple((v,) for v in range(g1.num_nodes))
    assert {(u[0], v[0]): w for (u, v), w in dbg.edges.items()} == wg.edges


def test_build_debruijn_single_edge_k2():
    g = parse_edge_list("a b 1\n")
    dbg = build_debruijn(g, 1.0, 2)
    assert dbg.ho_nodes == ((0, 1),)
    assert dbg.edges == {}


def test_build_debruijn_validation(g1):
    with pytest.raises(ValueError):
        build_debruijn(g1, 2.0, 0)


def test_weight_conservation_random():
    rng = random.Random(3)
    for _ in range(25):
        g = random_temporal_graph(rng)
        delta = rng.choice([1.0, 2.0, 5.0])
        eg = build_event_graph(g, delta)
        for k in (1, 2, 3):
            dbg = build_debruijn(g, delta, k)
            assert dbg.weight_sum() == count_paths_length_k(eg, k).total()
            if k == 1:
                assert dbg.weight_sum() == g.num_edges


def test_ho_nodes_are_realized_walks():
    rng = random.Random(5)
    for _ in range(15):
        g = random_temporal_graph(rng)
        dbg = build_debruijn(g, 2.0, 2)
        realized = set(oracle_path_counts(g, 2.0, 1))
        assert set(dbg.ho_nodes) <= realized


def test_transition_probabilities_k1(g1):
    model = transition_probabilities(build_debruijn(g1, 2.0, 1))
    b = g1.index_of("b")
    c = g1.index_of("c")
    assert model.probabilities[(b,)] == {c: 1.0}


def test_transition_probabilities_normalization():
    g = parse_edge_list("a b 1\nb x 2\nb x 3\nb x 4\nb y 2\n")
    model = transition_probabilities(build_debruijn(g, 10.0, 1))
    b = g.index_of("b")
    dist = model.probabilities[(b,)]
    assert dist[g.index_of("x")] == pytest.approx(0.75)
    assert dist[g.index_of("y")] == pytest.approx(0.25)
    assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)


def test_transition_rows_sum_to_one_random():
    rng = random.Random(9)
    for _ in range(20):
        g = random_temporal_graph(rng)
        for k in (1, 2):
            model = transition_probabilities(build_debruijn(g, 2.0, k))
            for dist in model.probabilities.values():
                assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)


def test_sink_context_absent(g1):
    model = transition_probabilities(build_debruijn(g1, 2.0, 1))
    assert (g1.index_of("d"),) not in model.probabilities


def test_log_likelihood_deterministic_chain_is_zero(g1):
    # every node in g1 has a single continuation, so all probabilities are 1
    model = transition_probabilities(build_debruijn(g1, 2.0, 1))
    eg = build_event_graph(g1, 2.0)
    assert log_likelihood(model, count_paths_length_k(eg, 1)) == pytest.approx(0.0)


def test_log_likelihood_uniform_branching():
    g = parse_edge_list("a b 1\na c 1\na b 2\na c 2\n")
    model = transition_probabilities(build_debruijn(g, 1.0, 1))
    eg = build_event_graph(g, 1.0)
    counts = count_paths_length_k(eg, 1)
    assert log_likelihood(model, counts) == pytest.approx(4 * math.log(0.5))


def test_log_likelihood_empty_errors(g1):
    model = transition_probabilities(build_debruijn(g1, 2.0, 1))
    with pytest.raises(ValueError):
        log_likelihood(model, PathCounts(k=2, counts={}))


def test_log_likelihood_smoothing_floor(g1):
    model = transition_probabilities(build_debruijn(g1, 2.0, 1))
    unseen = PathCounts(k=1, counts={(g1.index_of("d"), g1.index_of("a")): 1})
    value = log_likelihood(model, unseen)
    assert value == pytest.approx(math.log(1e-12))


def test_select_order_memoryless_and_planted():
    memoryless = [
        select_order(memoryless_graph(n_nodes=50, n_edges=4000, seed=s), 1.0, 3, 0.01)
        for s in range(10)
    ]
    assert sum(k == 1 for k in memoryless) >= 8
    planted = [
        select_order(
            planted_order2_graph(n_nodes=80, n_edges=6000, concentration=0.85, seed=s),
            1.0, 3, 0.01,
        )
        for s in range(10)
    ]
    assert sum(k == 2 for k in planted) >= 8


def test_select_order_caps_at_longest_path():
    g = parse_edge_list("a b 1\nc d 5\n")  # no length-2 paths at delta=1
    assert select_order(g, 1.0, 4, 0.01) == 1


def test_select_order_validation(g1):
    with pytest.raises(ValueError):
        select_order(g1, 2.0, 0, 0.01)
    with pytest.raises(ValueError):
        select_order(g1, 2.0, 2, 1.5)


def test_order_selection_table_fields(g1):
    rows = order_selection_table(g1, 2.0, 3, 0.01)
    assert rows
    for row in rows:
        assert set(row) == {"tested_order", "statistic", "df", "p_value", "accepted", "selected"}
        assert row["statistic"] >= 0.0


def test_build_debruijn_graphs_shares_event_graph(g1):
    dbgs = build_debruijn_graphs(g1, 2.0, 2)
    assert sorted(dbgs) == [1, 2]
    assert dbgs[2].edges == build_debruijn(g1, 2.0, 2).edges


def test_csv_exports(g1):
    dbg = build_debruijn(g1, 2.0, 2)
    edges_csv = debruijn_csv(dbg)
    assert edges_csv.splitlines()[0] == "src_seq,dst_seq,weight"
    assert "a|b,b|c,1" in edges_csv
    bip = bipartite_csv(dbg)
    assert bip.splitlines()[0] == "ho_seq,first_order_node"
    assert "a|b,b" in bip
