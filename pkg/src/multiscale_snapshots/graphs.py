"""Core graph model: timestamped edge streams, hourly bucketing, metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ._kernels import triangle_counts

SIGN_NONE = 0
SIGN_POSITIVE = 1
SIGN_NEGATIVE = -1

_SIGN_TOKENS = {
    "1": SIGN_POSITIVE,
    "+1": SIGN_POSITIVE,
    "+": SIGN_POSITIVE,
    "-": SIGN_NEGATIVE,
    "positive": SIGN_POSITIVE,
    "pos": SIGN_POSITIVE,
    "-1": SIGN_NEGATIVE,
    "negative": SIGN_NEGATIVE,
    "neg": SIGN_NEGATIVE,
    "0": SIGN_NONE,
    "none": SIGN_NONE,
    "": SIGN_NONE,
}


@dataclass(frozen=True)
class TimestampedEdge:
    source: str
    target: str
    timestamp: int
    weight: float = 1.0
    sign: int = SIGN_NONE

    def __post_init__(self):
        if self.timestamp < 0:
            raise ValueError("timestamp must be >= 0")
        if not self.source or not self.target:
            raise ValueError("source and target must be non-empty")


@dataclass(frozen=True)
class EdgeData:
    weight: float = 1.0
    sign: int = SIGN_NONE


class StaticGraph:
    """Undirected simple graph with weighted, signed edges.

    Node ids are any orderable hashables (dense ints inside a DynamicGraph,
    strings in ad-hoc graphs). Edge keys are canonical ``(min, max)`` tuples.
    """

    __slots__ = ("nodes", "edges")

    def __init__(self, nodes: Iterable = (), edges=None):
        self.nodes = set(nodes)
        self.edges: dict[tuple, EdgeData] = {}
        if edges:
            for e in edges:
                if isinstance(e, tuple) and len(e) == 2 and not isinstance(e[1], EdgeData):
                    self.add_edge(e[0], e[1])
                else:
                    (u, v), data = e
                    self.add_edge(u, v, data.weight, data.sign)

    @staticmethod
    def edge_key(u, v) -> tuple:
        return (u, v) if u <= v else (v, u)

    def add_edge(self, u, v, weight: float = 1.0, sign: int = SIGN_NONE):
        if u == v:
            raise ValueError("self-loops are not allowed")
        self.nodes.add(u)
        self.nodes.add(v)
        self.edges[self.edge_key(u, v)] = EdgeData(weight, sign)

    def has_edge(self, u, v) -> bool:
        return self.edge_key(u, v) in self.edges

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degree(self, u) -> int:
        return sum(1 for k in self.edges if u in k)

    def neighbors(self, u):
        for a, b in self.edges:
            if a == u:
                yield b
            elif b == u:
                yield a

    def adjacency(self) -> dict:
        adj: dict = {u: set() for u in self.nodes}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def subgraph(self, keep) -> "StaticGraph":
        keep = set(keep)
        g = StaticGraph(self.nodes & keep)
        for (u, v), data in self.edges.items():
            if u in keep and v in keep:
                g.edges[(u, v)] = data
        return g

    def csr(self):
        """Sorted-node CSR adjacency; returns (order, indptr, indices)."""
        order = sorted(self.nodes)
        idx = {u: i for i, u in enumerate(order)}
        adj = [[] for _ in order]
        for a, b in self.edges:
            adj[idx[a]].append(idx[b])
            adj[idx[b]].append(idx[a])
        indptr = np.zeros(len(order) + 1, dtype=np.int64)
        for i, lst in enumerate(adj):
            lst.sort()
            indptr[i + 1] = indptr[i] + len(lst)
        indices = np.empty(int(indptr[-1]), dtype=np.int64)
        p = 0
        for lst in adj:
            for v in lst:
                indices[p] = v
                p += 1
        return order, indptr, indices

    def adjacency_matrix(self, weighted: bool = True) -> np.ndarray:
        order = sorted(self.nodes)
        idx = {u: i for i, u in enumerate(order)}
        a = np.zeros((len(order), len(order)))
        for (u, v), data in self.edges.items():
            w = data.weight if weighted else 1.0
            a[idx[u], idx[v]] = w
            a[idx[v], idx[u]] = w
        return a

    def __eq__(self, other):
        return (
            isinstance(other, StaticGraph)
            and self.nodes == other.nodes
            and self.edges == other.edges
        )

    def __repr__(self):
        return f"StaticGraph(|V|={len(self.nodes)}, |E|={len(self.edges)})"


@dataclass
class DynamicGraph:
    """Contiguous sequence of hourly (or custom-width) static graphs.

    Node ids inside the per-bucket graphs are dense ints; ``node_labels[i]``
    is the original string id of node ``i``.
    """

    graphs: list[StaticGraph]
    bucket_width: int = 3600
    origin: int = 0
    node_labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        if len(self.graphs) < 1:
            raise ValueError("a DynamicGraph needs at least one bucket")

    @property
    def length(self) -> int:
        return len(self.graphs)

    def label_of(self, node: int) -> str:
        return self.node_labels[node] if self.node_labels else str(node)


@dataclass(frozen=True)
class GraphMetrics:
    node_count: int
    edge_count: int
    density: float
    avg_clustering: float
    transitivity: float
    components: int

    def as_dict(self) -> dict:
        return {
            "node_count": self.node_count,
            "edge_count": self.edge_count,
            "density": self.density,
            "avg_clustering": self.avg_clustering,
            "transitivity": self.transitivity,
            "components": self.components,
        }


@dataclass(frozen=True)
class EdgeSchema:
    """Column mapping for a delimited edge-list file.

    Columns are 0-based indices, or header names when ``has_header`` is set.
    """

    source: int | str
    target: int | str
    timestamp: int | str
    weight: int | str | None = None
    sign: int | str | None = None
    delimiter: str = "\t"
    has_header: bool = False


@dataclass(frozen=True)
class ParseError:
    line_number: int
    reason: str


@dataclass
class ParseResult:
    edges: list[TimestampedEdge]
    errors: list[ParseError]


class SchemaError(ValueError):
    pass


def _resolve_columns(schema: EdgeSchema, header: Sequence[str] | None) -> dict[str, int | None]:
    cols = {}
    for name in ("source", "target", "timestamp", "weight", "sign"):
        spec = getattr(schema, name)
        if spec is None:
            cols[name] = None
        elif isinstance(spec, int):
            cols[name] = spec
        else:
            if header is None:
                raise SchemaError(f"column {name}={spec!r} is a name but the file has no header")
            try:
                cols[name] = header.index(spec)
            except ValueError:
                raise SchemaError(f"column {spec!r} not found in header {header}") from None
    return cols


def parse_edge_stream(lines: Iterable[str], schema: EdgeSchema) -> ParseResult:
    """Parse a line-oriented edge stream; malformed lines become error records."""
    edges: list[TimestampedEdge] = []
    errors: list[ParseError] = []
    cols: dict[str, int | None] | None = None
    if not schema.has_header:
        cols = _resolve_columns(schema, None)
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if cols is None:
            cols = _resolve_columns(schema, line.split(schema.delimiter))
            continue
        if not line.strip():
            continue
        parts = line.split(schema.delimiter)
        try:
            src = parts[cols["source"]].strip()
            dst = parts[cols["target"]].strip()
            ts = int(float(parts[cols["timestamp"]]))
            weight = 1.0
            if cols["weight"] is not None:
                weight = float(parts[cols["weight"]])
            sign = SIGN_NONE
            if cols["sign"] is not None:
                token = parts[cols["sign"]].strip().lower()
                if token not in _SIGN_TOKENS:
                    raise ValueError(f"unknown sign token {token!r}")
                sign = _SIGN_TOKENS[token]
            edges.append(TimestampedEdge(src, dst, ts, weight, sign))
        except (IndexError, ValueError) as exc:
            errors.append(ParseError(lineno, str(exc)))
    return ParseResult(edges, errors)


def majority_sign(counts: dict[int, int]) -> int:
    pos = counts.get(SIGN_POSITIVE, 0)
    neg = counts.get(SIGN_NEGATIVE, 0)
    if pos > neg:
        return SIGN_POSITIVE
    if neg > pos:
        return SIGN_NEGATIVE
    return SIGN_NONE


def bucket_by_hour(edges: Sequence[TimestampedEdge], width: int = 3600) -> DynamicGraph:
    """Bucket a timestamped edge stream into a DynamicGraph.

    Self-loops are dropped; parallel occurrences inside a bucket aggregate to
    weight = occurrence count with majority sign. Empty buckets stay as empty
    graphs so bucket indices form a true wall-clock axis.
    """
    if not edges:
        raise ValueError("cannot bucket an empty edge list (no time origin)")
    if width <= 0:
        raise ValueError("bucket width must be positive")
    min_ts = min(e.timestamp for e in edges)
    max_ts = max(e.timestamp for e in edges)
    t_count = math.ceil((max_ts - min_ts + 1) / width)

    labels: list[str] = []
    intern: dict[str, int] = {}

    def nid(label: str) -> int:
        i = intern.get(label)
        if i is None:
            i = len(labels)
            intern[label] = i
            labels.append(label)
        return i

    # per bucket: edge key -> (count, sign counts)
    buckets: list[dict[tuple, dict[int, int]]] = [dict() for _ in range(t_count)]
    bucket_nodes: list[set[int]] = [set() for _ in range(t_count)]
    for e in sorted(edges, key=lambda e: (e.timestamp, e.source, e.target, e.sign)):
        if e.source == e.target:
            continue
        b = (e.timestamp - min_ts) // width
        u, v = nid(e.source), nid(e.target)
        key = StaticGraph.edge_key(u, v)
        counts = buckets[b].setdefault(key, {})
        counts[e.sign] = counts.get(e.sign, 0) + 1
        bucket_nodes[b].add(u)
        bucket_nodes[b].add(v)

    graphs = []
    for b in range(t_count):
        g = StaticGraph(bucket_nodes[b])
        for (u, v), counts in buckets[b].items():
            g.edges[(u, v)] = EdgeData(float(sum(counts.values())), majority_sign(counts))
        graphs.append(g)
    return DynamicGraph(graphs, bucket_width=width, origin=min_ts, node_labels=labels)


def connected_components(g: StaticGraph) -> int:
    parent = {u: u for u in g.nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in g.edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    return len({find(u) for u in g.nodes})


def graph_metrics(g: StaticGraph) -> GraphMetrics:
    """Standard undirected metrics; degenerate denominators yield 0."""
    n = g.node_count
    m = g.edge_count
    density = 2.0 * m / (n * (n - 1)) if n >= 2 else 0.0
    if n == 0:
        return GraphMetrics(0, 0, 0.0, 0.0, 0.0, 0)
    _, indptr, indices = g.csr()
    degrees = np.diff(indptr)
    tri = triangle_counts(indptr, indices)
    local = np.zeros(n)
    eligible = degrees >= 2
    local[eligible] = 2.0 * tri[eligible] / (degrees[eligible] * (degrees[eligible] - 1))
    avg_clustering = float(local.mean()) if n else 0.0
    triads = int((degrees * (degrees - 1) // 2).sum())
    transitivity = float(tri.sum() / triads) if triads else 0.0
    return GraphMetrics(n, m, density, avg_clustering, transitivity, connected_components(g))
