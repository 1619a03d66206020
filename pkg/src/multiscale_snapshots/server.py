"""HTTP/JSON API over a built artifact directory.

The artifact (graphs, hierarchy, embeddings, indices, layout) is loaded once
and treated as immutable; the only mutable state is the in-memory session
table holding per-session node filters and view state. Every response carries
``schema_version`` so UI clients can detect drift.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import io as mio
from .abstraction import ViewState, auto_abstract, metric_color
from .build import load_manifest
from .graphs import StaticGraph, graph_metrics
from .knn import load_index, knn
from .summarize import SUMMARY_TYPES, SnapshotStore, cluster_communities

SCHEMA_VERSION = 1
CLUSTER_NODE_TRIGGER = 100
DEFAULT_SESSION_TTL = 1800.0


class Session:
    def __init__(self, ttl: float):
        self.filter: set[str] | None = None  # None = unfiltered
        self.ttl = ttl
        self.touched = time.monotonic()
        self.lock = threading.Lock()

    def expired(self) -> bool:
        return time.monotonic() - self.touched > self.ttl


class SessionTable:
    def __init__(self, ttl: float = DEFAULT_SESSION_TTL):
        self.ttl = ttl
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def get_or_create(self, sid: str | None) -> tuple[str, Session]:
        with self._lock:
            for key in [k for k, s in self._sessions.items() if s.expired()]:
                del self._sessions[key]
            if sid and sid in self._sessions:
                s = self._sessions[sid]
                s.touched = time.monotonic()
                return sid, s
            sid = sid or uuid.uuid4().hex
            s = self._sessions.setdefault(sid, Session(self.ttl))
            return sid, s


class Artifact:
    """Immutable served state loaded from a build output directory."""

    def __init__(self, artifact_dir):
        d = Path(artifact_dir)
        self.manifest = load_manifest(d)
        self.dynamic_graph = mio.load_dynamic_graph(d / "graph.mssg")
        self.hierarchy = mio.load_interval_table(d / "intervals.tsv")
        self.store = SnapshotStore(self.hierarchy, self.dynamic_graph.graphs)
        self.records = mio.load_embeddings(d / "embeddings.msse")
        self.record_by_key = {r.key: r for r in self.records}
        self.indices = {}
        for name in self.manifest["files"]:
            if name.startswith("index_L") and name.endswith(".mssi"):
                idx = load_index(d / name)
                self.indices[idx.level] = idx
        self.layout = json.loads((d / "layout.json").read_text())
        self.metrics_cache = json.loads((d / "metrics.json").read_text())
        self.interval_map = {iv.key(): iv for iv in self.hierarchy.all_intervals()}
        self.label_to_node = {
            label: i for i, label in enumerate(self.dynamic_graph.node_labels)
        }


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse({"error": {"message": message}, "schema_version": SCHEMA_VERSION},
                        status_code=status)


def _graph_payload(art: Artifact, g: StaticGraph) -> dict:
    positions = art.layout["positions"]
    nodes = []
    for u in sorted(g.nodes):
        label = art.dynamic_graph.label_of(u)
        xy = positions.get(label, [0.0, 0.0])
        nodes.append({"id": label, "x": xy[0], "y": xy[1]})
    edges = [
        {"source": art.dynamic_graph.label_of(u), "target": art.dynamic_graph.label_of(v),
         "weight": data.weight, "sign": data.sign}
        for (u, v), data in sorted(g.edges.items())
    ]
    return {"nodes": nodes, "edges": edges, "metrics": graph_metrics(g).as_dict()}


def _meta_payload(art: Artifact, g: StaticGraph) -> dict:
    part = cluster_communities(g)
    members = {
        str(c): sorted(art.dynamic_graph.label_of(u) for u in ms)
        for c, ms in part.members().items()
    }
    meta = part.meta_graph
    nodes = [{"id": str(c), "size": part.sizes[c]} for c in sorted(part.sizes)]
    edges = [
        {"source": str(u), "target": str(v), "weight": data.weight}
        for (u, v), data in sorted(meta.edges.items())
    ]
    return {"clustered": True, "nodes": nodes, "edges": edges, "members": members,
            "metrics": graph_metrics(g).as_dict()}


def create_app(artifact_dir, session_ttl: float = DEFAULT_SESSION_TTL) -> FastAPI:
    art = Artifact(artifact_dir)
    sessions = SessionTable(session_ttl)
    app = FastAPI(title="multiscale-snapshots")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )
    app.state.artifact = art
    app.state.sessions = sessions

    def filtered(g: StaticGraph, session: Session) -> StaticGraph:
        if session.filter is None:
            return g
        keep = {art.label_to_node[l] for l in session.filter if l in art.label_to_node}
        return g.subgraph(keep)

    @app.get("/api/hierarchy")
    def api_hierarchy():
        levels: dict[int, list] = {}
        for iv in art.hierarchy.all_intervals():
            levels.setdefault(iv.level, []).append(
                {"k": iv.index_in_level, "start": iv.start, "end": iv.end})
        return {
            "schema_version": SCHEMA_VERSION,
            "bucket_count": art.hierarchy.t_count,
            "bucket_width": art.dynamic_graph.bucket_width,
            "origin": art.dynamic_graph.origin,
            "summary_types": list(SUMMARY_TYPES),
            "levels": [{"level": lvl, "intervals": ivs}
                       for lvl, ivs in sorted(levels.items())],
        }

    @app.get("/api/snapshot/{level}/{k}")
    def api_snapshot(level: int, k: int, summary_type: str = "union",
                     cluster: bool = False, metaphor: str = "node_link",
                     session_id: str | None = None):
        iv = art.interval_map.get((level, k))
        if iv is None:
            return _error(404, f"no interval at level={level}, k={k}")
        if summary_type not in SUMMARY_TYPES:
            return _error(400, f"unknown summary_type {summary_type!r}")
        sid, session = sessions.get_or_create(session_id)
        with session.lock:
            if iv.width == 1:
                g = art.dynamic_graph.graphs[iv.start]
            else:
                g = art.store.get_interval(iv).summary(summary_type)
            g = filtered(g, session)
            if cluster or g.node_count > CLUSTER_NODE_TRIGGER:
                payload = _meta_payload(art, g)
            else:
                payload = _graph_payload(art, g)
            if metaphor == "animation":
                payload["frames"] = [
                    _graph_payload(art, filtered(art.dynamic_graph.graphs[t], session))
                    for t in range(iv.start, iv.end)
                ]
        payload.update({
            "schema_version": SCHEMA_VERSION, "session_id": sid,
            "level": level, "k": k, "start": iv.start, "end": iv.end,
            "summary_type": summary_type,
        })
        return payload

    @app.get("/api/metrics/{level}/{k}")
    def api_metrics(level: int, k: int):
        iv = art.interval_map.get((level, k))
        if iv is None:
            return _error(404, f"no interval at level={level}, k={k}")
        cached = art.metrics_cache.get(f"{level}/{k}")
        if cached is None:  # singleton buckets are not in the build cache
            snap = art.store.get_interval(iv)
            cached = {kind: snap.metrics[kind].as_dict() for kind in snap.metrics}
        return {"schema_version": SCHEMA_VERSION, "level": level, "k": k,
                "start": iv.start, "end": iv.end, "metrics": cached}

    @app.post("/api/knn")
    async def api_knn(request: Request):
        body = await request.json()
        k = int(body.get("k", 5))
        if "vector" in body:
            query = np.asarray(body["vector"], dtype=np.float64)
        else:
            key = (int(body.get("level", -1)), int(body.get("k_index", -1)),
                   body.get("summary_type", "union"))
            rec = art.record_by_key.get(key)
            if rec is None:
                return _error(404, f"no embedding record for {key}")
            query = rec.vector
        time_range = body.get("time_range")
        try:
            result = knn(
                art.indices, query, k,
                summary_filter=body.get("summary_filter"),
                levels=body.get("levels"),
                time_range=tuple(time_range) if time_range else None,
                intervals=art.interval_map,
            )
        except ValueError as e:
            return _error(400, str(e))
        neighbors = []
        for lvl, kk, kind, dist in result.neighbors:
            iv = art.interval_map[(lvl, kk)]
            neighbors.append({"level": lvl, "k": kk, "summary_type": kind,
                              "distance": dist, "start": iv.start, "end": iv.end})
        return {"schema_version": SCHEMA_VERSION, "neighbors": neighbors,
                "query": result.query_meta}

    @app.post("/api/filter")
    async def api_filter(request: Request):
        body = await request.json()
        sid, session = sessions.get_or_create(body.get("session_id"))
        nodes = body.get("nodes")
        with session.lock:
            if nodes is None:
                session.filter = None
            else:
                incoming = set(map(str, nodes))
                session.filter = (incoming if session.filter is None
                                  else session.filter & incoming)
            current = None if session.filter is None else sorted(session.filter)
        return {"schema_version": SCHEMA_VERSION, "session_id": sid, "filter": current}

    @app.post("/api/abstract")
    async def api_abstract(request: Request):
        body = await request.json()
        try:
            state = ViewState.from_json(body, art.hierarchy)
            out = auto_abstract(state, art.hierarchy)
        except (KeyError, ValueError) as e:
            return _error(400, f"invalid view state: {e}")
        payload = out.to_json()
        metric = out.color_metric
        values = {}
        for view in payload["visible"]:
            entry = art.metrics_cache.get(f"{view['level']}/{view['k']}")
            if entry and view["summary_type"] in entry:
                values[(view["level"], view["k"])] = float(
                    entry[view["summary_type"]].get(metric, 0.0))
        lo = min(values.values(), default=0.0)
        hi = max(values.values(), default=0.0)
        for view in payload["visible"]:
            v = values.get((view["level"], view["k"]))
            view["color"] = metric_color(v, lo, hi) if v is not None else None
        payload["schema_version"] = SCHEMA_VERSION
        return payload

    @app.get("/api/layout")
    def api_layout():
        return {"schema_version": SCHEMA_VERSION, **art.layout}

    @app.get("/api/session")
    def api_session(session_id: str | None = None):
        sid, session = sessions.get_or_create(session_id)
        with session.lock:
            current = None if session.filter is None else sorted(session.filter)
        return {"schema_version": SCHEMA_VERSION, "session_id": sid,
                "filter": current, "ttl": session.ttl}

    return app
