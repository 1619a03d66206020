"""Ground-truth similarity oracle, synthetic dynamic-SBM generator, and the
k-NN window-query accuracy benchmark."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import embed as emb
from .graphs import DynamicGraph, StaticGraph
from .hierarchy import build_hierarchy
from .knn import LevelIndex
from .summarize import SnapshotStore, union_graph


def fnorm(g: StaticGraph) -> float:
    """sqrt of the sum of squared singular values of the adjacency matrix."""
    if g.node_count == 0:
        return 0.0
    sigma = np.linalg.svd(g.adjacency_matrix(), compute_uv=False)
    return float(np.sqrt(np.sum(sigma**2)))


def madist(a: StaticGraph, b: StaticGraph) -> float:
    return abs(fnorm(a) - fnorm(b))


def ground_truth_knn(query: StaticGraph, candidates: Sequence[tuple[object, StaticGraph]],
                     k: int) -> set:
    """Ids of the k madist-closest candidates (ties toward the smaller id)."""
    if not candidates:
        raise ValueError("no candidates")
    if k > len(candidates):
        raise ValueError(f"k={k} exceeds candidate count {len(candidates)}")
    qn = fnorm(query)
    ranked = sorted(((abs(qn - fnorm(g)), cid) for cid, g in candidates),
                    key=lambda pair: (pair[0], str(pair[1])))
    return {cid for _, cid in ranked[:k]}


@dataclass
class SbmConfig:
    nodes: int = 150
    communities: int = 3
    timesteps: int = 100
    diminish_len: int = 10
    swaps_per_step: int = 2
    p_in: float = 0.1
    p_out: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.p_out < self.p_in <= 1:
            raise ValueError("need 0 <= p_out < p_in <= 1")
        if self.communities < 2:
            raise ValueError("need at least two communities")
        if self.diminish_len > 20:
            raise ValueError("diminish events span at most 20 steps")


def synth_dynamic_sbm(cfg: SbmConfig) -> DynamicGraph:
    """Dynamic stochastic block model with diminishing communities.

    Edges are redrawn per timestep (p_in within a block, p_out across).
    During each diminishing event, ``swaps_per_step`` members of the event's
    community migrate to the other communities per step.
    """
    rng = np.random.default_rng(cfg.seed)
    membership = np.arange(cfg.nodes) % cfg.communities
    graphs = []
    # schedule one diminishing event in the middle of the axis
    event_start = cfg.timesteps // 3
    event_end = min(event_start + cfg.diminish_len, cfg.timesteps)
    diminish_comm = 0
    for t in range(cfg.timesteps):
        if event_start <= t < event_end:
            donors = np.flatnonzero(membership == diminish_comm)
            n_swap = min(cfg.swaps_per_step, len(donors))
            moved = rng.choice(donors, size=n_swap, replace=False)
            targets = rng.integers(1, cfg.communities, size=n_swap)
            membership[moved] = targets
        same = membership[:, None] == membership[None, :]
        prob = np.where(same, cfg.p_in, cfg.p_out)
        draw = rng.random((cfg.nodes, cfg.nodes))
        upper = np.triu(draw < prob, k=1)
        g = StaticGraph(range(cfg.nodes))
        for u, v in zip(*np.nonzero(upper)):
            g.add_edge(int(u), int(v))
        graphs.append(g)
    return DynamicGraph(graphs, bucket_width=3600, origin=0,
                        node_labels=[str(i) for i in range(cfg.nodes)])


@dataclass
class AccuracyTable:
    rows: dict[str, dict[int, float]]  # method -> interval length -> accuracy
    runs: int
    k: int
    dataset: str = ""
    chance: dict[str, dict[int, float]] = field(default_factory=dict)  # method -> length -> k/N

    def to_csv(self) -> str:
        lengths = sorted({l for row in self.rows.values() for l in row})
        lines = ["method," + ",".join(str(l) for l in lengths)]
        for method in sorted(self.rows):
            cells = [f"{self.rows[method].get(l, float('nan')):.3f}" for l in lengths]
            lines.append(method + "," + ",".join(cells))
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        lengths = sorted({l for row in self.rows.values() for l in row})
        width = max(len(m) for m in self.rows) + 2
        header = "interval length".ljust(width) + "".join(f"{l:>8}" for l in lengths)
        lines = [header, "-" * len(header)]
        for method in sorted(self.rows):
            cells = "".join(f"{self.rows[method].get(l, float('nan')):>8.3f}" for l in lengths)
            lines.append(method.ljust(width) + cells)
        lines.append("")
        lines.append(f"runs={self.runs} k={self.k} dataset={self.dataset}")
        return "\n".join(lines) + "\n"


def _perturb_window(graphs: list[StaticGraph], rng: np.random.Generator) -> list[StaticGraph]:
    """Remove one random node from each graph of the window."""
    out = []
    for g in graphs:
        if g.node_count == 0:
            out.append(g)
            continue
        victim = sorted(g.nodes)[int(rng.integers(g.node_count))]
        out.append(g.subgraph(g.nodes - {victim}))
    return out


class BenchmarkMethod:
    """A retrieval method under evaluation.

    ``fit`` sees the full dynamic graph once (before query extraction);
    ``query`` maps a perturbed window to ranked candidate ids, where candidate
    ids are the start buckets of the method's own candidate windows.
    """

    name = "base"

    def fit(self, dg: DynamicGraph, seed: int) -> None:
        raise NotImplementedError

    def candidate_windows(self, length: int) -> list[tuple[int, int, int]]:
        """(candidate id, window start, window length) triples."""
        raise NotImplementedError

    def query(self, window: list[StaticGraph], length: int, k: int, seed: int) -> list[int]:
        raise NotImplementedError


class SingleEmbeddingMethod(BenchmarkMethod):
    """Per-bucket embeddings; a window is the coordinate-wise median."""

    def __init__(self, method: str, epochs: int = emb.DEFAULT_EPOCHS,
                 dims: int = emb.DEFAULT_DIMS):
        self.method = method
        self.name = method
        self.epochs = epochs
        self.dims = dims
        self.model: emb.DbowModel | None = None
        self.bucket_vecs: list[np.ndarray] = []
        self.t_count = 0

    def _embed_graph(self, g: StaticGraph, seed: int) -> np.ndarray:
        if g.node_count == 0:
            dim = emb.DEFAULT_BINS if self.method == "fgsd" else self.dims
            return np.zeros(dim)
        if self.method == "fgsd":
            return emb.fgsd_embed(g)
        doc = emb.graph_document(g, self.method, emb.DEFAULT_WL_ITERATIONS, ("q",))
        return self.model.infer(doc, seed=seed)

    def fit(self, dg: DynamicGraph, seed: int) -> None:
        self.t_count = dg.length
        if self.method == "fgsd":
            self.bucket_vecs = [
                emb.fgsd_embed(g) if g.node_count else np.zeros(emb.DEFAULT_BINS)
                for g in dg.graphs
            ]
            return
        corpus = [
            emb.graph_document(g, self.method, emb.DEFAULT_WL_ITERATIONS, (t,))
            for t, g in enumerate(dg.graphs) if g.node_count
        ]
        self.model = emb.DbowModel(self.dims, self.epochs, seed=seed)
        vectors = self.model.fit(corpus)
        zero = np.zeros(self.dims)
        self.bucket_vecs = [vectors.get((t,), zero) for t in range(dg.length)]

    def candidate_windows(self, length: int) -> list[tuple[int, int, int]]:
        return [(s, s, length) for s in range(self.t_count - length + 1)]

    def query(self, window, length, k, seed) -> list[int]:
        qvec = emb.median_embedding([self._embed_graph(g, seed) for g in window])
        scored = []
        for cid, start, wlen in self.candidate_windows(length):
            cvec = emb.median_embedding(self.bucket_vecs[start : start + wlen])
            scored.append((float(np.linalg.norm(qvec - cvec)), cid))
        scored.sort()
        return [cid for _, cid in scored[:k]]


class MultiscaleMethod(BenchmarkMethod):
    """Union-graph snapshot embeddings, searched on the level whose interval
    width is closest to the query length."""

    def __init__(self, method: str, epochs: int = emb.DEFAULT_EPOCHS,
                 dims: int = emb.DEFAULT_DIMS):
        self.method = method
        self.name = f"multiscale_{method}"
        self.epochs = epochs
        self.dims = dims
        self.model: emb.DbowModel | None = None
        self.level_records: dict[int, list] = {}
        self.hierarchy = None

    def fit(self, dg: DynamicGraph, seed: int) -> None:
        self.hierarchy = build_hierarchy(dg.length)
        store = SnapshotStore(self.hierarchy, dg.graphs)
        if self.method == "fgsd":
            records = emb.embed_hierarchy(self.hierarchy, store, "fgsd",
                                          summary_types=("union",))
        else:
            corpus = []
            for iv in self.hierarchy.non_singleton_intervals():
                g = store.get_interval(iv).union
                if g.node_count:
                    corpus.append(emb.graph_document(
                        g, self.method, emb.DEFAULT_WL_ITERATIONS,
                        (iv.level, iv.index_in_level, "union")))
            self.model = emb.DbowModel(self.dims, self.epochs, seed=seed)
            vectors = self.model.fit(corpus)
            zero = np.zeros(self.dims)
            records = [
                emb.EmbeddingRecord(iv.level, iv.index_in_level, "union",
                                    vectors.get((iv.level, iv.index_in_level, "union"), zero),
                                    self.method)
                for iv in self.hierarchy.non_singleton_intervals()
            ]
        self.level_records = {}
        for r in records:
            self.level_records.setdefault(r.level, []).append(r)

    def _level_for(self, length: int) -> int:
        best = None
        for level, records in self.level_records.items():
            width = self.hierarchy.levels[level - 1][0].width
            score = (abs(width - length), level)
            if best is None or score < best[0]:
                best = (score, level)
        return best[1]

    def candidate_windows(self, length: int) -> list[tuple[int, int, int]]:
        level = self._level_for(length)
        out = []
        for r in self.level_records[level]:
            iv = self.hierarchy.get(level, r.index_in_level)
            out.append((iv.start, iv.start, iv.width))
        return out

    def query(self, window, length, k, seed) -> list[int]:
        union = union_graph(window) if window else StaticGraph()
        if self.method == "fgsd":
            qvec = emb.fgsd_embed(union) if union.node_count else np.zeros(emb.DEFAULT_BINS)
        else:
            doc = emb.graph_document(union, self.method, emb.DEFAULT_WL_ITERATIONS, ("q",))
            qvec = self.model.infer(doc, seed=seed)
        level = self._level_for(length)
        scored = []
        for r in self.level_records[level]:
            start = self.hierarchy.get(level, r.index_in_level).start
            scored.append((float(np.linalg.norm(qvec - r.vector)), start))
        scored.sort()
        return [start for _, start in scored[:k]]


class RandomMethod(BenchmarkMethod):
    """Chance baseline: k uniformly random candidate windows."""

    name = "random"

    def fit(self, dg: DynamicGraph, seed: int) -> None:
        self.t_count = dg.length
        self.rng = np.random.default_rng(seed)

    def candidate_windows(self, length: int) -> list[tuple[int, int, int]]:
        return [(s, s, length) for s in range(self.t_count - length + 1)]

    def query(self, window, length, k, seed) -> list[int]:
        cands = self.candidate_windows(length)
        picks = self.rng.choice(len(cands), size=min(k, len(cands)), replace=False)
        return [cands[i][0] for i in picks]


def default_methods(epochs: int = emb.DEFAULT_EPOCHS) -> list[BenchmarkMethod]:
    return [
        SingleEmbeddingMethod("fgsd"),
        SingleEmbeddingMethod("wl_doc", epochs=epochs),
        SingleEmbeddingMethod("wl_doc_line", epochs=epochs),
        MultiscaleMethod("fgsd"),
        MultiscaleMethod("wl_doc", epochs=epochs),
        MultiscaleMethod("wl_doc_line", epochs=epochs),
    ]


def run_accuracy_experiment(
    dg: DynamicGraph,
    methods: Sequence[BenchmarkMethod],
    lengths: Sequence[int] = (1, 2, 3, 4, 8),
    runs: int = 5,
    k: int = 5,
    seed: int = 0,
    dataset: str = "synthetic",
    progress: Callable[[str], None] | None = None,
) -> AccuracyTable:
    """Window-query accuracy protocol.

    Per run and length L: draw a random interval of length L, remove one
    random node from each of its graphs, retrieve the k nearest candidate
    windows per method, and score |retrieved ∩ ground truth| / k. Ground truth
    is the madist between union graphs of the perturbed query window and each
    candidate window of the method's own candidate set.
    """
    if max(lengths) > dg.length:
        raise ValueError("interval length exceeds the dynamic graph")
    for m_i, method in enumerate(methods):
        if progress:
            progress(f"fitting {method.name}")
        method.fit(dg, seed=seed + 1000 * m_i)

    master = np.random.default_rng(seed)
    union_cache: dict[tuple[int, int], StaticGraph] = {}

    def window_union(start: int, length: int) -> StaticGraph:
        key = (start, length)
        if key not in union_cache:
            union_cache[key] = union_graph(dg.graphs[start : start + length])
        return union_cache[key]

    totals: dict[str, dict[int, float]] = {m.name: {l: 0.0 for l in lengths} for m in methods}
    chance: dict[str, dict[int, float]] = {m.name: {} for m in methods}
    for run in range(runs):
        for length in lengths:
            start = int(master.integers(0, dg.length - length + 1))
            window = _perturb_window(dg.graphs[start : start + length], master)
            query_union = union_graph(window) if any(g.node_count for g in window) else StaticGraph()
            qseed = seed + 7919 * run + 13 * length
            for method in methods:
                cands = method.candidate_windows(length)
                kk = min(k, len(cands))
                chance[method.name].setdefault(length, kk / len(cands))
                truth = ground_truth_knn(
                    query_union,
                    [(cid, window_union(s, w)) for cid, s, w in cands], k=kk)
                retrieved = method.query(window, length, kk, qseed)
                totals[method.name][length] += len(set(retrieved) & truth) / kk
            if progress:
                progress(f"run {run + 1}/{runs} length {length} done")
    rows = {name: {l: totals[name][l] / runs for l in lengths} for name in totals}
    return AccuracyTable(rows, runs, k, dataset, chance)


def chance_sigma(p: float, k: int, runs: int) -> float:
    """Std deviation of the run-averaged accuracy of a chance retriever."""
    return math.sqrt(p * (1 - p) / (k * runs))
