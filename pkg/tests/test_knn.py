import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multiscale_snapshots.embed import EmbeddingRecord
from multiscale_snapshots.hierarchy import build_hierarchy
from multiscale_snapshots.knn import (
    BRUTE_FORCE_THRESHOLD, IndexLoadError, LevelIndex, knn, load_index,
    save_index,
)

SUMMARIES = ("union", "intersection", "disjoint")


def make_records(rng, count, dim=16, level=2):
    vecs = rng.normal(size=(count, dim))
    return [
        EmbeddingRecord(level, i, SUMMARIES[i % 3], vecs[i], "fgsd")
        for i in range(count)
    ]


def linear_scan(records, query, k):
    scored = sorted(
        ((float(np.sum((r.vector.astype(np.float32).astype(np.float64) - query) ** 2)), r.key)
         for r in records),
        key=lambda p: (p[0], p[1]))
    return [key for _, key in scored[:k]]


class TestLevelIndex:
    def test_small_level_is_brute_force(self):
        rng = np.random.default_rng(0)
        index = LevelIndex.build(make_records(rng, 20))
        assert index.brute_force

    def test_brute_force_equals_linear_scan(self):
        rng = np.random.default_rng(1)
        records = make_records(rng, BRUTE_FORCE_THRESHOLD - 1)
        index = LevelIndex.build(records)
        for _ in range(20):
            q = rng.normal(size=16)
            got = [key for _, key in index.search(q, 5)]
            assert got == linear_scan(records, q, 5)

    def test_zero_vectors_skipped(self):
        rng = np.random.default_rng(2)
        records = make_records(rng, 10) + [
            EmbeddingRecord(2, 99, "union", np.zeros(16), "fgsd")]
        index = LevelIndex.build(records)
        assert len(index.id_map) == 10

    def test_mixed_levels_rejected(self):
        rng = np.random.default_rng(3)
        records = make_records(rng, 5, level=2) + make_records(rng, 5, level=3)
        with pytest.raises(ValueError):
            LevelIndex.build(records)

    def test_self_query_distance_zero(self):
        rng = np.random.default_rng(4)
        records = make_records(rng, 200)
        index = LevelIndex.build(records)
        d, key = index.search(records[7].vector, 1)[0]
        assert key == records[7].key
        assert d == pytest.approx(0.0, abs=1e-5)

    def test_results_sorted_ascending(self):
        rng = np.random.default_rng(5)
        index = LevelIndex.build(make_records(rng, 300))
        dists = [d for d, _ in index.search(rng.normal(size=16), 20)]
        assert dists == sorted(dists)

    def test_graph_mode_recall_on_modest_set(self):
        rng = np.random.default_rng(6)
        records = make_records(rng, 500)
        index = LevelIndex.build(records)
        hits = 0
        for _ in range(50):
            q = rng.normal(size=16)
            got = {key for _, key in index.search(q, 5)}
            exact = set(linear_scan(records, q, 5))
            hits += len(got & exact)
        assert hits / (50 * 5) >= 0.85


class TestPersistence:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(7)
        index = LevelIndex.build(make_records(rng, 150))
        p = tmp_path / "ix.mssi"
        save_index(index, p)
        loaded = load_index(p)
        assert np.array_equal(loaded.vectors, index.vectors)
        assert loaded.id_map == index.id_map
        q = rng.normal(size=16)
        assert index.search(q, 5) == loaded.search(q, 5)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "junk"
        p.write_bytes(b"NOPE" + b"\0" * 50)
        with pytest.raises(IndexLoadError):
            load_index(p)

    def test_truncation_detected(self, tmp_path):
        rng = np.random.default_rng(8)
        index = LevelIndex.build(make_records(rng, 80))
        p = tmp_path / "ix.mssi"
        save_index(index, p)
        p.write_bytes(p.read_bytes()[:-20])
        with pytest.raises(IndexLoadError):
            load_index(p)

    def test_hash_mismatch_detected(self, tmp_path):
        rng = np.random.default_rng(9)
        index = LevelIndex.build(make_records(rng, 80))
        p = tmp_path / "ix.mssi"
        save_index(index, p)
        with pytest.raises(IndexLoadError):
            load_index(p, expected_hash="deadbeef")


class TestMultiLevelKnn:
    def build_indices(self, rng, per_level=100):
        return {
            lvl: LevelIndex.build(make_records(rng, per_level, level=lvl))
            for lvl in (2, 3)
        }

    def test_k_invalid(self):
        rng = np.random.default_rng(10)
        with pytest.raises(ValueError):
            knn(self.build_indices(rng), rng.normal(size=16), 0)

    def test_summary_filter(self):
        rng = np.random.default_rng(11)
        res = knn(self.build_indices(rng), rng.normal(size=16), 5,
                  summary_filter="disjoint")
        assert 0 < len(res.neighbors) <= 5
        assert all(kind == "disjoint" for _, _, kind, _ in res.neighbors)

    def test_level_restriction(self):
        rng = np.random.default_rng(12)
        res = knn(self.build_indices(rng), rng.normal(size=16), 5, levels=[3])
        assert all(lvl == 3 for lvl, _, _, _ in res.neighbors)

    def test_empty_level_selection_rejected(self):
        rng = np.random.default_rng(13)
        with pytest.raises(ValueError):
            knn(self.build_indices(rng), rng.normal(size=16), 5, levels=[9])

    def test_time_range_filter(self):
        rng = np.random.default_rng(14)
        h = build_hierarchy(64)
        intervals = {iv.key(): iv for iv in h.all_intervals()}
        # level-2 records indexed by their real interval positions
        records = [
            EmbeddingRecord(2, iv.index_in_level, "union", rng.normal(size=8), "fgsd")
            for iv in h.levels[1]
        ]
        indices = {2: LevelIndex.build(records)}
        res = knn(indices, rng.normal(size=8), 5, time_range=(0, 8),
                  intervals=intervals)
        for lvl, k, _, _ in res.neighbors:
            iv = intervals[(lvl, k)]
            assert iv.start < 8

    def test_merged_results_sorted(self):
        rng = np.random.default_rng(15)
        res = knn(self.build_indices(rng), rng.normal(size=16), 10)
        dists = [d for _, _, _, d in res.neighbors]
        assert dists == sorted(dists)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 8))
    @settings(max_examples=25, deadline=None)
    def test_brute_force_levels_match_oracle(self, seed, k):
        rng = np.random.default_rng(seed)
        records = make_records(rng, 40)
        indices = {2: LevelIndex.build(records)}
        q = rng.normal(size=16)
        got = [(lvl, kk, kind) for lvl, kk, kind, _ in
               knn(indices, q, k).neighbors]
        assert got == linear_scan(records, q, k)
