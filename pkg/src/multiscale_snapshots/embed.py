"""Whole-graph embeddings: spectral-histogram features, WL subtree documents
with a from-scratch DBOW trainer, and the line-graph variant."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._kernels import dbow_epoch
from .graphs import StaticGraph
from .hierarchy import SnapshotHierarchy
from .summarize import SUMMARY_TYPES, SnapshotStore

METHODS = ("fgsd", "wl_doc", "wl_doc_line")

DEFAULT_BINS = 200
DEFAULT_HIST_RANGE = 20.0
DEFAULT_DIMS = 128
DEFAULT_EPOCHS = 250
INTERACTIVE_EPOCHS = 80
DEFAULT_LR = 0.025
DEFAULT_WL_ITERATIONS = 2
DEFAULT_NEGATIVES = 5


@dataclass
class EmbeddingRecord:
    level: int
    index_in_level: int
    summary_type: str
    vector: np.ndarray
    method: str

    @property
    def key(self) -> tuple[int, int, str]:
        return (self.level, self.index_in_level, self.summary_type)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.vector)


def fgsd_embed(g: StaticGraph, bins: int = DEFAULT_BINS,
               hist_range: float = DEFAULT_HIST_RANGE) -> np.ndarray:
    """Histogram of pairwise harmonic spectral distances.

    The distance between nodes x, y is sum over positive Laplacian eigenvalues
    of (1/lambda)(phi(x) - phi(y))^2, i.e. the effective-resistance form via
    the pseudoinverse. All n^2 ordered pairs enter the histogram (diagonal
    zeros included); values beyond the range clamp into the last bucket.
    """
    if g.node_count == 0:
        raise ValueError("cannot embed an empty graph")
    a = (g.adjacency_matrix(weighted=False) > 0).astype(np.float64)
    lap = np.diag(a.sum(axis=0)) - a
    eigvals, eigvecs = np.linalg.eigh(lap)
    pos = eigvals > 1e-9
    # pinv(L) = V diag(1/lambda) V^T over positive eigenvalues
    pinv = (eigvecs[:, pos] / eigvals[pos]) @ eigvecs[:, pos].T
    d = np.diag(pinv)
    dist = d[:, None] + d[None, :] - 2.0 * pinv
    np.clip(dist, 0.0, hist_range, out=dist)
    counts, _ = np.histogram(dist.ravel(), bins=bins, range=(0.0, hist_range * (1 + 1e-12)))
    return counts.astype(np.float64)


@dataclass
class WlDocument:
    graph_id: tuple
    tokens: list[str]


def _stable_hash(s: str) -> str:
    return hashlib.blake2b(s.encode(), digest_size=8).hexdigest()


def wl_features(g: StaticGraph, iterations: int = DEFAULT_WL_ITERATIONS,
                graph_id: tuple = ()) -> WlDocument:
    """Weisfeiler-Lehman subtree tokens; initial labels are node degrees.

    Tokens from different refinement rounds are namespaced by the round index
    so a raw degree can never collide with a hashed label.
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    adj = g.adjacency()
    order = sorted(g.nodes, key=str)
    labels = {u: str(len(adj[u])) for u in order}
    tokens = [f"0_{labels[u]}" for u in order]
    for it in range(1, iterations + 1):
        new_labels = {}
        for u in order:
            neigh = sorted(labels[v] for v in adj[u])
            new_labels[u] = _stable_hash(labels[u] + "|" + ",".join(neigh))
        labels = new_labels
        tokens.extend(f"{it}_{labels[u]}" for u in order)
    return WlDocument(graph_id, tokens)


def line_graph(g: StaticGraph) -> StaticGraph:
    """Edge-to-vertex dual; line-nodes are the original edge keys."""
    if g.edge_count == 0:
        raise ValueError("line graph of an edgeless graph")
    keys = sorted(g.edges)
    lg = StaticGraph(keys)
    incident: dict = {}
    for key in keys:
        for endpoint in key:
            incident.setdefault(endpoint, []).append(key)
    for edges_at in incident.values():
        for i in range(len(edges_at)):
            for j in range(i + 1, len(edges_at)):
                lg.add_edge(edges_at[i], edges_at[j])
    return lg


def median_embedding(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Coordinate-wise median (even count -> mean of the two middles)."""
    if not len(vectors):
        raise ValueError("median of no vectors")
    dims = {len(v) for v in vectors}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")
    return np.median(np.stack([np.asarray(v, dtype=np.float64) for v in vectors]), axis=0)


class DbowModel:
    """Distributed-bag-of-words document embedding with negative sampling.

    Training is fully deterministic under the seed: example order and negative
    draws come from one numpy Generator, and the sequential update kernel is
    bit-identical with and without numba.
    """

    def __init__(self, dims: int = DEFAULT_DIMS, epochs: int = DEFAULT_EPOCHS,
                 lr: float = DEFAULT_LR, negatives: int = DEFAULT_NEGATIVES,
                 seed: int = 0):
        if dims < 1 or epochs < 1:
            raise ValueError("dims and epochs must be >= 1")
        self.dims = dims
        self.epochs = epochs
        self.lr = lr
        self.negatives = negatives
        self.seed = seed
        self.vocab: dict[str, int] = {}
        self.tok_vecs: np.ndarray | None = None
        self._neg_cdf: np.ndarray | None = None

    def _pairs(self, docs: Sequence[WlDocument], grow_vocab: bool):
        pair_docs: list[int] = []
        pair_toks: list[int] = []
        for d, doc in enumerate(docs):
            for tok in doc.tokens:
                t = self.vocab.get(tok)
                if t is None:
                    if not grow_vocab:
                        continue  # unseen token at inference time
                    t = len(self.vocab)
                    self.vocab[tok] = t
                pair_docs.append(d)
                pair_toks.append(t)
        return (np.asarray(pair_docs, dtype=np.int64),
                np.asarray(pair_toks, dtype=np.int64))

    def _run_epochs(self, doc_vecs, tok_vecs, pair_docs, pair_toks, rng, epochs):
        n = len(pair_docs)
        if n == 0:
            return
        for epoch in range(epochs):
            cur_lr = max(self.lr * (1.0 - epoch / epochs), self.lr * 1e-4)
            order = rng.permutation(n).astype(np.int64)
            draws = rng.random((n, self.negatives))
            negs = np.searchsorted(self._neg_cdf, draws).astype(np.int64)
            dbow_epoch(doc_vecs, tok_vecs, pair_docs, pair_toks, order, negs, cur_lr)

    def fit(self, corpus: Sequence[WlDocument]) -> dict[tuple, np.ndarray]:
        if not corpus:
            raise ValueError("empty corpus")
        pair_docs, pair_toks = self._pairs(corpus, grow_vocab=True)
        vocab_size = max(len(self.vocab), 1)
        freq = np.bincount(pair_toks, minlength=vocab_size).astype(np.float64)
        noise = freq**0.75
        total = noise.sum()
        self._neg_cdf = np.cumsum(noise / total) if total > 0 else np.ones(vocab_size)
        rng = np.random.default_rng(self.seed)
        doc_vecs = (rng.random((len(corpus), self.dims)) - 0.5) / self.dims
        self.tok_vecs = np.zeros((vocab_size, self.dims))
        self._run_epochs(doc_vecs, self.tok_vecs, pair_docs, pair_toks, rng, self.epochs)
        return {doc.graph_id: doc_vecs[i].copy() for i, doc in enumerate(corpus)}

    def infer(self, doc: WlDocument, seed: int | None = None) -> np.ndarray:
        """Train a fresh document vector against frozen token vectors."""
        if self.tok_vecs is None:
            raise RuntimeError("model is not fitted")
        rng = np.random.default_rng(self.seed + 1 if seed is None else seed)
        pair_docs, pair_toks = self._pairs([doc], grow_vocab=False)
        doc_vecs = (rng.random((1, self.dims)) - 0.5) / self.dims
        self._run_epochs(doc_vecs, self.tok_vecs.copy(), pair_docs, pair_toks, rng, self.epochs)
        return doc_vecs[0]


def doc_embed_train(corpus: Sequence[WlDocument], dims: int = DEFAULT_DIMS,
                    epochs: int = DEFAULT_EPOCHS, lr: float = DEFAULT_LR,
                    negatives: int = DEFAULT_NEGATIVES, seed: int = 0
                    ) -> dict[tuple, np.ndarray]:
    return DbowModel(dims, epochs, lr, negatives, seed).fit(corpus)


# Dense graphs make the edge dual explode quadratically (a near-complete
# 150-node graph dualizes to >10^6 edges), so the line-graph variant falls
# back to the original graph once the dual would cross this edge budget.
# The budget is sized so single sparse snapshots dualize while multi-bucket
# union supergraphs — whose duals are both huge and dominated by density
# rather than structure — fall back.
LINE_GRAPH_EDGE_LIMIT = 8_000


def _line_graph_edge_count(g: StaticGraph) -> int:
    deg: dict = {}
    for u, v in g.edges:
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    return sum(d * (d - 1) // 2 for d in deg.values())


def graph_document(g: StaticGraph, method: str, iterations: int, graph_id: tuple) -> WlDocument:
    """WL document for a graph; the line-graph variant falls back to the
    original graph when there are no edges to dualize or when the dual would
    be intractably large."""
    if (method == "wl_doc_line" and g.edge_count > 0
            and _line_graph_edge_count(g) <= LINE_GRAPH_EDGE_LIMIT):
        g = line_graph(g)
    return wl_features(g, iterations, graph_id)


def embed_hierarchy(
    hierarchy: SnapshotHierarchy,
    store: SnapshotStore,
    method: str = "fgsd",
    summary_types: Sequence[str] = SUMMARY_TYPES,
    bins: int = DEFAULT_BINS,
    hist_range: float = DEFAULT_HIST_RANGE,
    dims: int = DEFAULT_DIMS,
    epochs: int = DEFAULT_EPOCHS,
    lr: float = DEFAULT_LR,
    wl_iterations: int = DEFAULT_WL_ITERATIONS,
    negatives: int = DEFAULT_NEGATIVES,
    seed: int = 0,
) -> list[EmbeddingRecord]:
    """One EmbeddingRecord per (non-singleton snapshot x summary type).

    Empty summary graphs map to the all-zeros sentinel vector; ANN indexing
    skips those.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    intervals = hierarchy.non_singleton_intervals()
    records: list[EmbeddingRecord] = []
    dim = bins if method == "fgsd" else dims
    if method == "fgsd":
        for iv in intervals:
            snap = store.get_interval(iv)
            for kind in summary_types:
                g = snap.summary(kind)
                vec = np.zeros(dim) if g.node_count == 0 else fgsd_embed(g, bins, hist_range)
                records.append(EmbeddingRecord(iv.level, iv.index_in_level, kind, vec, method))
    else:
        corpus: list[WlDocument] = []
        empties: list[tuple] = []
        for iv in intervals:
            snap = store.get_interval(iv)
            for kind in summary_types:
                g = snap.summary(kind)
                gid = (iv.level, iv.index_in_level, kind)
                if g.node_count == 0:
                    empties.append(gid)
                else:
                    corpus.append(graph_document(g, method, wl_iterations, gid))
        vectors: dict[tuple, np.ndarray] = {}
        if corpus:
            vectors = doc_embed_train(corpus, dims, epochs, lr, negatives, seed)
        zero = np.zeros(dim)
        for iv in intervals:
            for kind in summary_types:
                gid = (iv.level, iv.index_in_level, kind)
                vec = vectors.get(gid, zero)
                records.append(EmbeddingRecord(iv.level, iv.index_in_level, kind, vec, method))
    return records
