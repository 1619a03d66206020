"""Compare the jitted kernels against the pure-numpy fallback path.

The fallback is selected by setting MSS_NO_NUMBA before import, so this
script re-executes itself once with the flag to time both paths in clean
interpreters. Run: python3 benchmarks/bench_kernels.py
"""

import json
import os
import subprocess
import sys
import time

import numpy as np


def _bench() -> dict:
    from multiscale_snapshots import _kernels as K
    from multiscale_snapshots.embed import wl_features, DbowModel
    from multiscale_snapshots.graphs import StaticGraph
    from multiscale_snapshots.knn import LevelIndex
    from multiscale_snapshots.embed import EmbeddingRecord  # noqa: F401

    rng = np.random.default_rng(0)
    out = {"numba": bool(K.USE_NUMBA)}

    # triangle counting on a G(n, p) graph
    n, p = 800, 0.02
    draw = np.triu(rng.random((n, n)) < p, k=1)
    g = StaticGraph(range(n))
    for u, v in zip(*np.nonzero(draw)):
        g.add_edge(int(u), int(v))
    _, indptr, indices = g.csr()
    K.triangle_counts(indptr, indices)  # warm-up / JIT compile
    t0 = time.perf_counter()
    for _ in range(5):
        K.triangle_counts(indptr, indices)
    out["triangle_counts_s"] = (time.perf_counter() - t0) / 5

    # DBOW training epochs on a synthetic corpus
    docs = []
    for d in range(80):
        gg = StaticGraph(range(30))
        for u, v in zip(*np.nonzero(np.triu(rng.random((30, 30)) < 0.1, k=1))):
            gg.add_edge(int(u), int(v))
        docs.append(wl_features(gg, 2, (d,)))
    model = DbowModel(dims=64, epochs=1, seed=0)
    model.fit(docs)  # warm-up
    model = DbowModel(dims=64, epochs=5, seed=0)
    t0 = time.perf_counter()
    model.fit(docs)
    out["dbow_5_epochs_s"] = time.perf_counter() - t0

    # ANN index build + search
    vecs = rng.normal(size=(600, 64))
    recs = [EmbeddingRecord(2, i, "union", vecs[i], "fgsd") for i in range(len(vecs))]
    t0 = time.perf_counter()
    index = LevelIndex.build(recs, seed=0)
    out["hnsw_build_600_s"] = time.perf_counter() - t0
    queries = rng.normal(size=(100, 64))
    t0 = time.perf_counter()
    for q in queries:
        index.search(q, 5)
    out["hnsw_100_queries_s"] = time.perf_counter() - t0

    # force-directed layout steps
    pos = rng.normal(size=(500, 2))
    src, dst = np.nonzero(np.triu(rng.random((500, 500)) < 0.01, k=1))
    src, dst = src.astype(np.int64), dst.astype(np.int64)
    K.fr_step(pos.copy(), src, dst, 0.03, 0.1)  # warm-up
    t0 = time.perf_counter()
    for _ in range(10):
        K.fr_step(pos, src, dst, 0.03, 0.1)
    out["fr_10_steps_s"] = time.perf_counter() - t0
    return out


def main():
    if os.environ.get("_BENCH_CHILD"):
        print(json.dumps(_bench()))
        return
    rows = []
    for no_numba in ("", "1"):
        env = dict(os.environ, _BENCH_CHILD="1")
        if no_numba:
            env["MSS_NO_NUMBA"] = "1"
        else:
            env.pop("MSS_NO_NUMBA", None)
        res = subprocess.run([sys.executable, __file__], env=env,
                             capture_output=True, text=True, check=True)
        rows.append(json.loads(res.stdout.strip().splitlines()[-1]))
    keys = [k for k in rows[0] if k != "numba"]
    width = max(map(len, keys)) + 2
    print(f"{'kernel'.ljust(width)}{'numba':>12}{'fallback':>12}{'speedup':>10}")
    for k in keys:
        a, b = rows[0][k], rows[1][k]
        print(f"{k.ljust(width)}{a:>12.4f}{b:>12.4f}{b / a:>9.1f}x")


if __name__ == "__main__":
    main()
