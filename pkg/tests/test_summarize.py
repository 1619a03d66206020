from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_graph
from multiscale_snapshots.graphs import StaticGraph
from multiscale_snapshots.hierarchy import build_hierarchy
from multiscale_snapshots.summarize import (
    SnapshotStore, cluster_communities, default_i_threshold, disjoint_graph,
    intersection_graph, make_snapshot, modularity, union_graph,
)


def brute_summary(graphs, mode, i=0):
    """Reference by explicit occurrence counting over the graph sequence."""
    node_counts = Counter()
    edge_counts = Counter()
    for g in graphs:
        node_counts.update(g.nodes)
        edge_counts.update(g.edges.keys())
    if mode == "union":
        keep_n = set(node_counts)
        keep_e = {e: c for e, c in edge_counts.items()}
    elif mode == "intersection":
        keep_n = {u for u, c in node_counts.items() if c > i}
        keep_e = {e: c for e, c in edge_counts.items() if c > i}
    else:
        keep_n = {u for u, c in node_counts.items() if c < i}
        keep_e = {e: c for e, c in edge_counts.items() if c < i}
    out = StaticGraph(keep_n)
    for (u, v), c in keep_e.items():
        if u in keep_n and v in keep_n:
            out.add_edge(u, v, float(c))
    return out


def graph_seq(rng, count, n=10, p=0.3):
    return [random_graph(rng, n, p) for _ in range(count)]


class TestSummaries:
    def test_union_weight_is_membership_count(self):
        a = StaticGraph()
        a.add_edge(0, 1)
        b = StaticGraph()
        b.add_edge(0, 1)
        b.add_edge(1, 2)
        u = union_graph([a, b])
        assert u.edges[(0, 1)].weight == 2.0
        assert u.edges[(1, 2)].weight == 1.0

    def test_intersection_strictly_greater(self):
        a = StaticGraph()
        a.add_edge(0, 1)
        b = StaticGraph()
        b.add_edge(0, 1)
        # appears exactly i=2 times -> excluded (strict >)
        assert intersection_graph([a, b], 2).edge_count == 0
        assert intersection_graph([a, b], 1).edge_count == 1

    def test_disjoint_strictly_less(self):
        a = StaticGraph()
        a.add_edge(0, 1)
        b = StaticGraph()
        b.add_edge(0, 1)
        # appears exactly i=2 times -> excluded (strict <)
        assert disjoint_graph([a, b], 2).edge_count == 0
        # with a third graph on other nodes, the endpoints occur 2 < 3 times
        c = StaticGraph([2, 3])
        assert disjoint_graph([a, b, c], 3).edge_count == 1

    def test_empty_sequence_rejected(self):
        with pytest.raises(ValueError):
            union_graph([])

    def test_i_out_of_range(self):
        g = StaticGraph([0])
        with pytest.raises(ValueError):
            intersection_graph([g], 2)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(0, 6))
    @settings(max_examples=80, deadline=None)
    def test_matches_bruteforce(self, seed, count, i):
        graphs = graph_seq(np.random.default_rng(seed), count)
        i = min(i, count)
        assert union_graph(graphs) == brute_summary(graphs, "union")
        got_i = intersection_graph(graphs, i)
        exp_i = brute_summary(graphs, "intersection", i)
        assert got_i.nodes == exp_i.nodes and set(got_i.edges) == set(exp_i.edges)
        got_d = disjoint_graph(graphs, i)
        exp_d = brute_summary(graphs, "disjoint", i)
        assert got_d.nodes == exp_d.nodes and set(got_d.edges) == set(exp_d.edges)


class TestSnapshots:
    def test_default_threshold_is_half_width(self):
        h = build_hierarchy(8)
        assert default_i_threshold(h.get(3, 0)) == 2

    def test_store_caches(self):
        h = build_hierarchy(4)
        graphs = graph_seq(np.random.default_rng(0), 4)
        store = SnapshotStore(h, graphs)
        assert store.get(2, 0) is store.get(2, 0)

    def test_snapshot_metrics_present(self):
        h = build_hierarchy(4)
        snap = make_snapshot(h.get(2, 0), graph_seq(np.random.default_rng(1), 4))
        assert set(snap.metrics) == {"union", "intersection", "disjoint"}

    def test_length_mismatch_rejected(self):
        h = build_hierarchy(4)
        with pytest.raises(ValueError):
            SnapshotStore(h, graph_seq(np.random.default_rng(0), 3))


class TestClustering:
    def two_cliques(self):
        g = StaticGraph()
        for off in (0, 5):
            for i in range(5):
                for j in range(i + 1, 5):
                    g.add_edge(off + i, off + j)
        g.add_edge(0, 5)
        return g

    def test_two_cliques_found(self):
        part = cluster_communities(self.two_cliques())
        assert len(part.sizes) == 2
        assert sorted(part.sizes.values()) == [5, 5]

    def test_partition_postconditions(self):
        g = self.two_cliques()
        part = cluster_communities(g)
        members = part.members()
        flat = sorted(u for ms in members.values() for u in ms)
        assert flat == sorted(g.nodes)
        assert sorted(members) == list(range(len(members)))

    def test_meta_graph_edge_weight_counts_cross_edges(self):
        part = cluster_communities(self.two_cliques())
        (data,) = part.meta_graph.edges.values()
        assert data.weight == 1.0

    def test_modularity_of_split_beats_trivial(self):
        g = self.two_cliques()
        split = {u: 0 if u < 5 else 1 for u in g.nodes}
        whole = {u: 0 for u in g.nodes}
        assert modularity(g, split) > modularity(g, whole)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_random_graph_partition_is_valid(self, seed):
        g = random_graph(np.random.default_rng(seed), 20, 0.15)
        if g.edge_count == 0:
            return
        part = cluster_communities(g)
        assert set(part.assignment) == g.nodes
        assert len(part.sizes) <= g.node_count
