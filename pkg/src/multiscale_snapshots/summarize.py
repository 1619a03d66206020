"""Per-snapshot summary graphs (union / intersection / disjoint) and
greedy-modularity community coarsening."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .graphs import EdgeData, GraphMetrics, StaticGraph, graph_metrics, majority_sign
from .hierarchy import Interval, SnapshotHierarchy

SUMMARY_TYPES = ("union", "intersection", "disjoint")


def _occurrence_counts(graphs: Sequence[StaticGraph]):
    node_counts: dict = {}
    edge_counts: dict[tuple, int] = {}
    edge_signs: dict[tuple, dict[int, int]] = {}
    for g in graphs:
        for u in g.nodes:
            node_counts[u] = node_counts.get(u, 0) + 1
        for key, data in g.edges.items():
            edge_counts[key] = edge_counts.get(key, 0) + 1
            signs = edge_signs.setdefault(key, {})
            signs[data.sign] = signs.get(data.sign, 0) + 1
    return node_counts, edge_counts, edge_signs


def union_graph(graphs: Sequence[StaticGraph]) -> StaticGraph:
    """Union of all node and edge sets; edge weight = membership count."""
    if not graphs:
        raise ValueError("union of an empty graph list")
    node_counts, edge_counts, edge_signs = _occurrence_counts(graphs)
    g = StaticGraph(node_counts)
    for key, count in edge_counts.items():
        g.edges[key] = EdgeData(float(count), majority_sign(edge_signs[key]))
    return g


def intersection_graph(graphs: Sequence[StaticGraph], i: int) -> StaticGraph:
    """Elements appearing strictly more than i times; edges need qualifying endpoints."""
    if not graphs:
        raise ValueError("intersection of an empty graph list")
    if not 0 <= i <= len(graphs):
        raise ValueError(f"i={i} outside [0, {len(graphs)}]")
    node_counts, edge_counts, edge_signs = _occurrence_counts(graphs)
    keep = {u for u, c in node_counts.items() if c > i}
    g = StaticGraph(keep)
    for key, count in edge_counts.items():
        u, v = key
        if count > i and u in keep and v in keep:
            g.edges[key] = EdgeData(float(count), majority_sign(edge_signs[key]))
    return g


def disjoint_graph(graphs: Sequence[StaticGraph], i: int) -> StaticGraph:
    """Elements appearing strictly fewer than i times (mirror of intersection)."""
    if not graphs:
        raise ValueError("disjoint of an empty graph list")
    if not 0 <= i <= len(graphs):
        raise ValueError(f"i={i} outside [0, {len(graphs)}]")
    node_counts, edge_counts, edge_signs = _occurrence_counts(graphs)
    keep = {u for u, c in node_counts.items() if c < i}
    g = StaticGraph(keep)
    for key, count in edge_counts.items():
        u, v = key
        if count < i and u in keep and v in keep:
            g.edges[key] = EdgeData(float(count), majority_sign(edge_signs[key]))
    return g


@dataclass
class Snapshot:
    interval: Interval
    union: StaticGraph
    intersection: StaticGraph
    disjoint: StaticGraph
    i_threshold: int
    metrics: dict[str, GraphMetrics] = field(default_factory=dict)

    def summary(self, kind: str) -> StaticGraph:
        if kind not in SUMMARY_TYPES:
            raise KeyError(f"unknown summary type {kind!r}")
        return getattr(self, kind)


def default_i_threshold(interval: Interval) -> int:
    # the rolling-window overlap between consecutive intervals of this width
    return interval.width // 2


def make_snapshot(
    interval: Interval,
    graphs: Sequence[StaticGraph],
    i_threshold: int | None = None,
    with_metrics: bool = True,
) -> Snapshot:
    member = list(graphs[interval.start : interval.end])
    i = default_i_threshold(interval) if i_threshold is None else i_threshold
    snap = Snapshot(
        interval,
        union_graph(member),
        intersection_graph(member, i),
        disjoint_graph(member, i),
        i,
    )
    if with_metrics:
        snap.metrics = {kind: graph_metrics(snap.summary(kind)) for kind in SUMMARY_TYPES}
    return snap


class SnapshotStore:
    """Lazy, cached snapshot computation over a hierarchy."""

    def __init__(self, hierarchy: SnapshotHierarchy, graphs: Sequence[StaticGraph],
                 i_threshold: int | None = None):
        if len(graphs) != hierarchy.t_count:
            raise ValueError("graph sequence length does not match hierarchy T")
        self.hierarchy = hierarchy
        self.graphs = list(graphs)
        self.i_threshold = i_threshold
        self._cache: dict[tuple[int, int], Snapshot] = {}

    def get(self, level: int, k: int) -> Snapshot:
        key = (level, k)
        if key not in self._cache:
            interval = self.hierarchy.get(level, k)
            self._cache[key] = make_snapshot(interval, self.graphs, self.i_threshold)
        return self._cache[key]

    def get_interval(self, interval: Interval) -> Snapshot:
        return self.get(interval.level, interval.index_in_level)


@dataclass
class CommunityPartition:
    assignment: dict  # node-id -> community-id, contiguous from 0
    meta_graph: StaticGraph
    sizes: dict[int, int]  # community-id -> member count

    @property
    def community_count(self) -> int:
        return len(self.sizes)

    def members(self) -> dict[int, list]:
        out: dict[int, list] = {c: [] for c in self.sizes}
        for u, c in self.assignment.items():
            out[c].append(u)
        for lst in out.values():
            lst.sort(key=str)
        return out


def modularity(g: StaticGraph, assignment: dict) -> float:
    m = g.edge_count
    if m == 0:
        return 0.0
    adj = g.adjacency()
    intra: dict[int, int] = {}
    deg: dict[int, int] = {}
    for u in g.nodes:
        c = assignment[u]
        deg[c] = deg.get(c, 0) + len(adj[u])
    for u, v in g.edges:
        if assignment[u] == assignment[v]:
            c = assignment[u]
            intra[c] = intra.get(c, 0) + 1
    total = 0.0
    for c in set(assignment.values()):
        total += intra.get(c, 0) / m - (deg.get(c, 0) / (2 * m)) ** 2
    return total


def cluster_communities(g: StaticGraph) -> CommunityPartition:
    """Greedy agglomerative modularity maximization (merge best pair until no
    positive gain). Deterministic: ties break by the smallest community pair.
    """
    if g.node_count < 1:
        raise ValueError("cannot cluster an empty graph")
    order = sorted(g.nodes, key=str)
    comm_of = {u: c for c, u in enumerate(order)}
    m = g.edge_count
    if m > 0:
        # e[a][b]: edge count between communities a and b; a_deg[c]: total degree
        e: dict[int, dict[int, int]] = {c: {} for c in range(len(order))}
        a_deg = [0] * len(order)
        for u, v in g.edges:
            cu, cv = comm_of[u], comm_of[v]
            e[cu][cv] = e[cu].get(cv, 0) + 1
            e[cv][cu] = e[cv].get(cu, 0) + 1
            a_deg[cu] += 1
            a_deg[cv] += 1
        alive = set(range(len(order)))
        two_m = 2 * m
        while len(alive) > 1:
            best = None
            best_gain = 0.0
            for a in sorted(alive):
                for b in sorted(e[a]):
                    if b <= a or b not in alive:
                        continue
                    gain = 2 * (e[a][b] / two_m - (a_deg[a] * a_deg[b]) / (two_m * two_m))
                    if gain > best_gain + 1e-15 or (
                        best is not None and abs(gain - best_gain) <= 1e-15 and (a, b) < best
                    ):
                        best = (a, b)
                        best_gain = gain
            if best is None or best_gain <= 1e-15:
                break
            a, b = best
            # merge b into a
            for c, w in e[b].items():
                if c == a or c == b:
                    continue
                e[a][c] = e[a].get(c, 0) + w
                e[c][a] = e[c].get(a, 0) + w
                e[c].pop(b, None)
            e[a].pop(b, None)
            a_deg[a] += a_deg[b]
            e[b] = {}
            alive.discard(b)
            for u, c in comm_of.items():
                if c == b:
                    comm_of[u] = a

    # renumber communities contiguously, ordered by their smallest member
    reps: dict[int, object] = {}
    for u in order:
        reps.setdefault(comm_of[u], u)
    relabel = {c: i for i, (c, _) in enumerate(sorted(reps.items(), key=lambda kv: str(kv[1])))}
    assignment = {u: relabel[comm_of[u]] for u in g.nodes}

    sizes: dict[int, int] = {}
    for c in assignment.values():
        sizes[c] = sizes.get(c, 0) + 1
    meta = StaticGraph(sizes.keys())
    inter: dict[tuple, int] = {}
    for u, v in g.edges:
        cu, cv = assignment[u], assignment[v]
        if cu != cv:
            key = StaticGraph.edge_key(cu, cv)
            inter[key] = inter.get(key, 0) + 1
    for key, w in inter.items():
        meta.edges[key] = EdgeData(float(w))
    return CommunityPartition(assignment, meta, sizes)
