"""Binary artifact persistence: graph container, interval table, embedding
matrix. All writers are byte-deterministic for identical inputs."""

from __future__ import annotations

import hashlib
import struct
from pathlib import Path

import numpy as np

from .embed import EmbeddingRecord
from .graphs import DynamicGraph, EdgeData, StaticGraph
from .hierarchy import Interval, SnapshotHierarchy
from .summarize import SUMMARY_TYPES

GRAPH_MAGIC = b"MSSG"
EMBED_MAGIC = b"MSSE"
FORMAT_VERSION = 1


class ContainerError(Exception):
    pass


def _write_str(fh, s: str):
    raw = s.encode("utf-8")
    fh.write(struct.pack("<I", len(raw)))
    fh.write(raw)


def _read_str(fh) -> str:
    (n,) = struct.unpack("<I", fh.read(4))
    return fh.read(n).decode("utf-8")


def save_dynamic_graph(dg: DynamicGraph, path) -> None:
    """MSSG container: magic, version, node dictionary, per-bucket edge blocks."""
    with open(path, "wb") as fh:
        fh.write(GRAPH_MAGIC)
        fh.write(struct.pack("<H", FORMAT_VERSION))
        fh.write(struct.pack("<qqI", dg.bucket_width, dg.origin, dg.length))
        fh.write(struct.pack("<I", len(dg.node_labels)))
        for label in dg.node_labels:
            _write_str(fh, label)
        for g in dg.graphs:
            nodes = sorted(g.nodes)
            fh.write(struct.pack("<I", len(nodes)))
            fh.write(np.asarray(nodes, dtype="<u4").tobytes())
            edges = sorted(g.edges.items())
            fh.write(struct.pack("<I", len(edges)))
            for (u, v), data in edges:
                fh.write(struct.pack("<IIdb", u, v, data.weight, data.sign))


def load_dynamic_graph(path) -> DynamicGraph:
    with open(path, "rb") as fh:
        if fh.read(4) != GRAPH_MAGIC:
            raise ContainerError(f"{path}: not a graph container")
        (version,) = struct.unpack("<H", fh.read(2))
        if version != FORMAT_VERSION:
            raise ContainerError(f"{path}: unsupported version {version}")
        bucket_width, origin, t_count = struct.unpack("<qqI", fh.read(20))
        (n_labels,) = struct.unpack("<I", fh.read(4))
        labels = [_read_str(fh) for _ in range(n_labels)]
        graphs = []
        for _ in range(t_count):
            (n_nodes,) = struct.unpack("<I", fh.read(4))
            nodes = np.frombuffer(fh.read(4 * n_nodes), dtype="<u4")
            g = StaticGraph(int(u) for u in nodes)
            (n_edges,) = struct.unpack("<I", fh.read(4))
            for _ in range(n_edges):
                u, v, w, s = struct.unpack("<IIdb", fh.read(17))
                g.edges[(int(u), int(v))] = EdgeData(w, s)
            graphs.append(g)
    return DynamicGraph(graphs, bucket_width, origin, labels)


def save_interval_table(hierarchy: SnapshotHierarchy, path) -> None:
    """Plain-text interval table, one `level k start end` row per interval."""
    lines = [f"{hierarchy.t_count}"]
    for iv in hierarchy.all_intervals():
        lines.append(f"{iv.level}\t{iv.index_in_level}\t{iv.start}\t{iv.end}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_interval_table(path) -> SnapshotHierarchy:
    lines = Path(path).read_text().splitlines()
    t_count = int(lines[0])
    hierarchy = SnapshotHierarchy(t_count)
    expected = {iv.key(): iv for iv in hierarchy.all_intervals()}
    for line in lines[1:]:
        level, k, start, end = (int(x) for x in line.split("\t"))
        iv = expected.get((level, k))
        if iv is None or iv.start != start or iv.end != end:
            raise ContainerError(f"{path}: interval table does not match hierarchy({t_count})")
    return hierarchy


_SUMMARY_CODE = {name: i for i, name in enumerate(SUMMARY_TYPES)}


def save_embeddings(records: list[EmbeddingRecord], method: str, path) -> None:
    """Embedding matrix file: header (method, D, count), index table, f32 rows."""
    dim = len(records[0].vector) if records else 0
    with open(path, "wb") as fh:
        fh.write(EMBED_MAGIC)
        fh.write(struct.pack("<H", FORMAT_VERSION))
        _write_str(fh, method)
        fh.write(struct.pack("<II", dim, len(records)))
        for r in records:
            fh.write(struct.pack("<IIB", r.level, r.index_in_level,
                                 _SUMMARY_CODE[r.summary_type]))
        mat = np.stack([r.vector for r in records]).astype("<f4") if records else np.empty((0, 0))
        fh.write(mat.tobytes(order="C"))


def load_embeddings(path) -> list[EmbeddingRecord]:
    with open(path, "rb") as fh:
        if fh.read(4) != EMBED_MAGIC:
            raise ContainerError(f"{path}: not an embedding file")
        (version,) = struct.unpack("<H", fh.read(2))
        if version != FORMAT_VERSION:
            raise ContainerError(f"{path}: unsupported version {version}")
        method = _read_str(fh)
        dim, count = struct.unpack("<II", fh.read(8))
        keys = []
        for _ in range(count):
            level, k, code = struct.unpack("<IIB", fh.read(9))
            keys.append((level, k, SUMMARY_TYPES[code]))
        mat = np.frombuffer(fh.read(4 * dim * count), dtype="<f4").reshape(count, dim)
    return [
        EmbeddingRecord(level, k, kind, mat[i].astype(np.float64), method)
        for i, (level, k, kind) in enumerate(keys)
    ]


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
