"""Per-level k-nearest-neighbor indices: a navigable small-world layered
graph for large levels, exact linear scan for small ones."""

from __future__ import annotations

import pickle
import struct
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._kernels import (_greedy_descent, euclidean_sq_batch, hnsw_build,
                       hnsw_search_layer)
from .embed import EmbeddingRecord
from .hierarchy import Interval

BRUTE_FORCE_THRESHOLD = 64
DEFAULT_M = 16
DEFAULT_EF_CONSTRUCTION = 200
DEFAULT_EF_SEARCH = 64

_INDEX_MAGIC = b"MSSI"
_INDEX_VERSION = 1


class IndexLoadError(Exception):
    pass


@dataclass
class KnnResult:
    neighbors: list[tuple[int, int, str, float]]  # (level, k, summary_type, distance)
    query_meta: dict = field(default_factory=dict)


class LevelIndex:
    """ANN index over the embedding records of one hierarchy level.

    Vectors are stored float32 so that persistence round-trips bit-exactly;
    distances are accumulated in float64. Small levels (< BRUTE_FORCE_THRESHOLD
    records) use exact scan.
    """

    def __init__(self, level: int, m: int = DEFAULT_M,
                 ef_construction: int = DEFAULT_EF_CONSTRUCTION,
                 ef_search: int = DEFAULT_EF_SEARCH, seed: int = 0):
        self.level = level
        self.m = m
        self.ef_construction = ef_construction
        self.ef_search = ef_search
        self.seed = seed
        self.vectors = np.empty((0, 0), dtype=np.float32)
        self.id_map: list[tuple[int, int, str]] = []
        self.brute_force = True
        # neighbors[layer, slot, :counts[layer, slot]] are the layer's links
        self.neighbors = np.empty((0, 0, 0), dtype=np.int32)
        self.counts = np.empty((0, 0), dtype=np.int32)
        self.node_levels = np.empty(0, dtype=np.int64)
        self.entry_point = -1
        self._v64: np.ndarray | None = None  # float64 view cache, not persisted
        self._visited: np.ndarray | None = None
        self._stamp = 0

    @property
    def v64(self) -> np.ndarray:
        if self._v64 is None or self._v64.shape != self.vectors.shape:
            self._v64 = self.vectors.astype(np.float64)
        return self._v64

    # -- construction ------------------------------------------------------

    @classmethod
    def build(cls, records: Sequence[EmbeddingRecord], m: int = DEFAULT_M,
              ef_construction: int = DEFAULT_EF_CONSTRUCTION,
              ef_search: int = DEFAULT_EF_SEARCH, seed: int = 0) -> "LevelIndex":
        records = [r for r in records if not r.is_zero]
        levels = {r.level for r in records}
        if len(levels) > 1:
            raise ValueError(f"records span hierarchy levels {sorted(levels)}")
        dims = {len(r.vector) for r in records}
        if len(dims) > 1:
            raise ValueError(f"mixed embedding dimensions {sorted(dims)}")
        idx = cls(levels.pop() if levels else -1, m, ef_construction, ef_search, seed)
        if not records:
            return idx
        idx.vectors = np.stack([r.vector for r in records]).astype(np.float32)
        idx.id_map = [r.key for r in records]
        idx.brute_force = len(records) < BRUTE_FORCE_THRESHOLD
        if not idx.brute_force:
            rng = np.random.default_rng(seed)
            ml = 1.0 / np.log(m)
            idx.node_levels = np.floor(
                -np.log(rng.random(len(records))) * ml).astype(np.int64)
            idx.node_levels[0] = max(idx.node_levels[0], idx.node_levels.max())
            idx.neighbors, idx.counts, idx.entry_point = hnsw_build(
                idx.v64, idx.node_levels, m, ef_construction)
        return idx

    # -- queries -----------------------------------------------------------

    def _check_query(self, query: np.ndarray) -> np.ndarray:
        query = np.asarray(query, dtype=np.float32).astype(np.float64)
        if query.shape[0] != self.vectors.shape[1]:
            raise ValueError(
                f"query dimension {query.shape[0]} != index dimension {self.vectors.shape[1]}")
        return query

    def search(self, query: np.ndarray, k: int, ef: int | None = None
               ) -> list[tuple[float, tuple[int, int, str]]]:
        """Up to k (euclidean distance, record key) pairs, ascending."""
        if len(self.id_map) == 0:
            return []
        if self.brute_force:
            return self.exact_search(query, k)
        query = self._check_query(query)
        ef_eff = max(self.ef_search, ef or 0, k)
        if self._visited is None or len(self._visited) != len(self.id_map):
            self._visited = np.zeros(len(self.id_map), dtype=np.int64)
            self._stamp = 0
        ep = self.entry_point
        for layer in range(int(self.node_levels[ep]), 0, -1):
            ep = _greedy_descent(self.v64, self.neighbors, self.counts, layer, query, ep)
        self._stamp += 1
        dists, slots = hnsw_search_layer(
            self.v64, self.neighbors, self.counts, 0, query, ep, ef_eff,
            self._visited, self._stamp)
        return [(float(np.sqrt(d)), self.id_map[int(s)])
                for d, s in zip(dists[:k], slots[:k])]

    def exact_search(self, query: np.ndarray, k: int
                     ) -> list[tuple[float, tuple[int, int, str]]]:
        if len(self.id_map) == 0:
            return []
        query = self._check_query(query)
        d = euclidean_sq_batch(self.v64, query)
        order = np.argsort(d, kind="stable")[:k]
        return [(float(np.sqrt(d[i])), self.id_map[i]) for i in order]

    def reachable_from_entry(self) -> bool:
        """Connectivity check: every record reachable on layer 0."""
        if self.brute_force or len(self.id_map) == 0:
            return True
        seen = np.zeros(len(self.id_map), dtype=bool)
        seen[self.entry_point] = True
        stack = [self.entry_point]
        while stack:
            cur = stack.pop()
            for i in range(self.counts[0, cur]):
                nxt = int(self.neighbors[0, cur, i])
                if not seen[nxt]:
                    seen[nxt] = True
                    stack.append(nxt)
        return bool(seen.all())


def knn(
    indices: dict[int, LevelIndex],
    query: np.ndarray,
    k: int,
    summary_filter: str | None = None,
    levels: Sequence[int] | None = None,
    time_range: tuple[int, int] | None = None,
    intervals: dict[tuple[int, int], Interval] | None = None,
) -> KnnResult:
    """Merge per-level searches into one ranked result list.

    Candidates are over-fetched (ef >= 4k) before filtering so that summary
    or time filters cannot starve the result list.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    selected = sorted(indices) if levels is None else [l for l in sorted(levels) if l in indices]
    if not selected:
        raise ValueError("no levels selected")
    if time_range is not None and intervals is None:
        raise ValueError("time_range filtering needs the interval table")
    fetch = 4 * k
    merged: list[tuple[float, tuple[int, int, str]]] = []
    for lvl in selected:
        for dist, key in indices[lvl].search(query, fetch, ef=4 * k):
            level, kk, kind = key
            if summary_filter and kind != summary_filter:
                continue
            if time_range is not None:
                iv = intervals.get((level, kk))
                if iv is None or iv.overlap(*time_range) == 0:
                    continue
            merged.append((dist, key))
    merged.sort(key=lambda pair: (pair[0], pair[1]))
    neighbors = [(lvl, kk, kind, d) for d, (lvl, kk, kind) in merged[:k]]
    return KnnResult(neighbors, {
        "k": k,
        "levels": selected,
        "summary_filter": summary_filter,
        "time_range": list(time_range) if time_range else None,
    })


def save_index(index: LevelIndex, path, content_hash: str = "") -> None:
    payload = pickle.dumps({
        "level": index.level,
        "m": index.m,
        "ef_construction": index.ef_construction,
        "ef_search": index.ef_search,
        "seed": index.seed,
        "vectors": index.vectors,
        "id_map": index.id_map,
        "brute_force": index.brute_force,
        "neighbors": index.neighbors,
        "counts": index.counts,
        "node_levels": index.node_levels,
        "entry_point": index.entry_point,
        "content_hash": content_hash,
    }, protocol=4)
    with open(path, "wb") as fh:
        fh.write(_INDEX_MAGIC)
        fh.write(struct.pack("<HQ", _INDEX_VERSION, len(payload)))
        fh.write(payload)


def load_index(path, expected_hash: str | None = None) -> LevelIndex:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _INDEX_MAGIC:
            raise IndexLoadError(f"bad magic bytes {magic!r}")
        header = fh.read(10)
        if len(header) < 10:
            raise IndexLoadError("truncated index header")
        version, size = struct.unpack("<HQ", header)
        if version != _INDEX_VERSION:
            raise IndexLoadError(f"unsupported index version {version}")
        payload = fh.read(size)
        if len(payload) < size:
            raise IndexLoadError("truncated index payload")
        data = pickle.loads(payload)
    if expected_hash is not None and data["content_hash"] != expected_hash:
        raise IndexLoadError("index content hash does not match embeddings")
    idx = LevelIndex(data["level"], data["m"], data["ef_construction"],
                     data["ef_search"], data["seed"])
    idx.vectors = data["vectors"]
    idx.id_map = data["id_map"]
    idx.brute_force = data["brute_force"]
    idx.neighbors = data["neighbors"]
    idx.counts = data["counts"]
    idx.node_levels = data["node_levels"]
    idx.entry_point = data["entry_point"]
    return idx
