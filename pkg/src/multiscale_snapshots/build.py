"""Artifact build orchestration.

``cmd_build`` ingests a delimited edge stream and writes a self-describing
artifact directory: graph container, interval table, summary-metrics cache,
embedding matrix, per-level ANN indices, global layout, and a manifest with
content hashes. Re-running with identical config and input produces a
byte-identical manifest. Output is staged in a temp directory and moved into
place only on success, so failures leave no partial artifact.
"""

from __future__ import annotations

import dataclasses
import json
import shutil
import tempfile
from pathlib import Path

from . import io as mio
from .config import BuildConfig
from .embed import embed_hierarchy
from .graphs import EdgeSchema, bucket_by_hour, parse_edge_stream
from .hierarchy import build_hierarchy
from .knn import LevelIndex, save_index
from .layout import global_layout
from .summarize import SnapshotStore, union_graph

MANIFEST_NAME = "manifest.json"


class BuildError(Exception):
    pass


def _edge_schema(cfg: BuildConfig) -> EdgeSchema:
    return EdgeSchema(
        source=cfg.source_col,
        target=cfg.target_col,
        timestamp=cfg.timestamp_col,
        sign=cfg.sign_col,
        delimiter=cfg.delimiter,
        has_header=cfg.has_header,
    )


def _config_dict(cfg: BuildConfig) -> dict:
    d = dataclasses.asdict(cfg)
    # serving knobs and filesystem locations are environment, not content
    for key in ("host", "port", "session_ttl", "output_dir"):
        d.pop(key)
    return d


def cmd_build(cfg: BuildConfig) -> Path:
    cfg.validate()
    in_path = Path(cfg.input_path)
    if not in_path.is_file():
        raise BuildError(f"input file not readable: {in_path}")

    with open(in_path, encoding="utf-8") as fh:
        parsed = parse_edge_stream(fh, _edge_schema(cfg))
    if not parsed.edges:
        raise BuildError(f"no valid edges in {in_path} ({len(parsed.errors)} bad lines)")

    dg = bucket_by_hour(parsed.edges, cfg.bucket_width)
    hierarchy = build_hierarchy(dg.length)
    store = SnapshotStore(hierarchy, dg.graphs)
    embedded = hierarchy.non_singleton_intervals()
    records = embed_hierarchy(
        hierarchy, store, method=cfg.method, bins=cfg.hist_bins,
        hist_range=cfg.hist_range, dims=cfg.dims, epochs=cfg.epochs,
        wl_iterations=cfg.wl_iterations, seed=cfg.seed,
    )

    out_dir = Path(cfg.output_dir)
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=".build-", dir=out_dir.parent))
    try:
        mio.save_dynamic_graph(dg, stage / "graph.mssg")
        mio.save_interval_table(hierarchy, stage / "intervals.tsv")

        metrics_cache = {}
        for iv in embedded:
            snap = store.get_interval(iv)
            metrics_cache[f"{iv.level}/{iv.index_in_level}"] = {
                kind: snap.metrics[kind].as_dict() for kind in snap.metrics
            }
        (stage / "metrics.json").write_text(
            json.dumps(metrics_cache, sort_keys=True, indent=1) + "\n")

        mio.save_embeddings(records, cfg.method, stage / "embeddings.msse")

        index_files = []
        by_level: dict[int, list] = {}
        for r in records:
            by_level.setdefault(r.level, []).append(r)
        for level in sorted(by_level):
            live = [r for r in by_level[level] if not r.is_zero]
            if not live:
                continue
            index = LevelIndex.build(live, seed=cfg.seed)
            name = f"index_L{level}.mssi"
            save_index(index, stage / name)
            index_files.append(name)

        root = union_graph(dg.graphs)
        lay = global_layout(root, algorithm=cfg.layout_algorithm, seed=cfg.seed)
        positions = {dg.label_of(u): [round(x, 12), round(y, 12)]
                     for u, (x, y) in lay.positions.items()}
        (stage / "layout.json").write_text(json.dumps(
            {"algorithm": lay.algorithm, "seed": lay.seed, "positions": positions},
            sort_keys=True) + "\n")

        files = sorted(p.name for p in stage.iterdir())
        manifest = {
            "format_version": mio.FORMAT_VERSION,
            "config": _config_dict(cfg),
            "counts": {
                "buckets": dg.length,
                "edges_parsed": len(parsed.edges),
                "parse_errors": len(parsed.errors),
                "intervals": len(hierarchy.all_intervals()),
                "embedded_snapshots": len(embedded),
                "embedding_records": len(records),
                "indices": len(index_files),
            },
            "files": {name: mio.file_sha256(stage / name) for name in files},
        }
        (stage / MANIFEST_NAME).write_text(
            json.dumps(manifest, sort_keys=True, indent=1) + "\n")
    except BaseException:
        shutil.rmtree(stage, ignore_errors=True)
        raise

    if out_dir.exists():
        shutil.rmtree(out_dir)
    stage.rename(out_dir)
    return out_dir


def load_manifest(artifact_dir) -> dict:
    path = Path(artifact_dir) / MANIFEST_NAME
    if not path.is_file():
        raise BuildError(f"no manifest in {artifact_dir}")
    return json.loads(path.read_text())
