import json

import numpy as np
import pytest

from conftest import random_graph
from multiscale_snapshots import io as mio
from multiscale_snapshots.build import BuildError, cmd_build, load_manifest
from multiscale_snapshots.config import load_config
from multiscale_snapshots.embed import EmbeddingRecord
from multiscale_snapshots.graphs import (
    SIGN_NEGATIVE, DynamicGraph, TimestampedEdge, bucket_by_hour,
)
from multiscale_snapshots.hierarchy import build_hierarchy


def sample_dg(seed=0):
    rng = np.random.default_rng(seed)
    edges = []
    for b in range(4):
        for _ in range(15):
            u, v = rng.integers(0, 10, size=2)
            if u == v:
                continue
            sign = SIGN_NEGATIVE if rng.random() < 0.3 else 0
            edges.append(TimestampedEdge(f"n{u}", f"n{v}",
                                         b * 3600 + int(rng.integers(3600)),
                                         sign=sign))
    return bucket_by_hour(edges)


class TestGraphContainer:
    def test_round_trip(self, tmp_path):
        dg = sample_dg()
        p = tmp_path / "g.mssg"
        mio.save_dynamic_graph(dg, p)
        back = mio.load_dynamic_graph(p)
        assert back.bucket_width == dg.bucket_width
        assert back.origin == dg.origin
        assert back.node_labels == dg.node_labels
        assert all(a == b for a, b in zip(dg.graphs, back.graphs))

    def test_write_is_deterministic(self, tmp_path):
        dg = sample_dg()
        a, b = tmp_path / "a", tmp_path / "b"
        mio.save_dynamic_graph(dg, a)
        mio.save_dynamic_graph(dg, b)
        assert a.read_bytes() == b.read_bytes()

    def test_bad_magic_rejected(self, tmp_path):
        p = tmp_path / "junk"
        p.write_bytes(b"XXXX" + b"\0" * 30)
        with pytest.raises(mio.ContainerError):
            mio.load_dynamic_graph(p)

    def test_empty_buckets_survive(self, tmp_path):
        edges = [TimestampedEdge("a", "b", 0), TimestampedEdge("a", "b", 2 * 3600)]
        dg = bucket_by_hour(edges)
        p = tmp_path / "g.mssg"
        mio.save_dynamic_graph(dg, p)
        back = mio.load_dynamic_graph(p)
        assert back.length == 3 and back.graphs[1].node_count == 0


class TestIntervalTable:
    def test_round_trip(self, tmp_path):
        h = build_hierarchy(8)
        p = tmp_path / "iv.tsv"
        mio.save_interval_table(h, p)
        back = mio.load_interval_table(p)
        assert [iv.key() for iv in back.all_intervals()] == \
            [iv.key() for iv in h.all_intervals()]

    def test_tampered_table_rejected(self, tmp_path):
        h = build_hierarchy(8)
        p = tmp_path / "iv.tsv"
        mio.save_interval_table(h, p)
        lines = p.read_text().splitlines()
        lines[1] = "1\t0\t0\t5"
        p.write_text("\n".join(lines) + "\n")
        with pytest.raises(mio.ContainerError):
            mio.load_interval_table(p)


class TestEmbeddingFile:
    def records(self):
        rng = np.random.default_rng(1)
        return [
            EmbeddingRecord(2, i, kind, rng.normal(size=8).astype(np.float32).astype(np.float64), "fgsd")
            for i in range(4) for kind in ("union", "intersection", "disjoint")
        ]

    def test_round_trip(self, tmp_path):
        recs = self.records()
        p = tmp_path / "e.msse"
        mio.save_embeddings(recs, "fgsd", p)
        back = mio.load_embeddings(p)
        assert [r.key for r in back] == [r.key for r in recs]
        for a, b in zip(recs, back):
            assert np.array_equal(a.vector, b.vector)
            assert b.method == "fgsd"

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "e"
        p.write_bytes(b"ZZZZ" + b"\0" * 20)
        with pytest.raises(mio.ContainerError):
            mio.load_embeddings(p)


class TestBuild:
    def test_manifest_counts(self, artifact_dir):
        m = load_manifest(artifact_dir)
        assert m["counts"]["intervals"] == 23
        assert m["counts"]["embedded_snapshots"] == 15
        assert m["counts"]["embedding_records"] == 45

    def test_manifest_hashes_match_files(self, artifact_dir):
        m = load_manifest(artifact_dir)
        for name, digest in m["files"].items():
            assert mio.file_sha256(artifact_dir / name) == digest

    def test_rebuild_is_byte_identical(self, tmp_path, tiny8_path):
        outs = []
        for sub in ("a", "b"):
            cfg = load_config(env={}, overrides={
                "input_path": str(tiny8_path),
                "output_dir": str(tmp_path / sub),
                "epochs": 40, "seed": 11,
            })
            out = cmd_build(cfg)
            outs.append((out / "manifest.json").read_bytes())
        assert outs[0] == outs[1]

    def test_missing_input_no_partial_output(self, tmp_path):
        target = tmp_path / "out"
        cfg = load_config(env={}, overrides={
            "input_path": str(tmp_path / "absent.tsv"),
            "output_dir": str(target),
        })
        with pytest.raises(BuildError):
            cmd_build(cfg)
        assert not target.exists()
        assert not list(tmp_path.glob(".build-*"))

    def test_layout_has_all_nodes(self, artifact_dir):
        lay = json.loads((artifact_dir / "layout.json").read_text())
        dg = mio.load_dynamic_graph(artifact_dir / "graph.mssg")
        assert set(lay["positions"]) == set(dg.node_labels)
