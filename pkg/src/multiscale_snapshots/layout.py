"""Deterministic global graph layouts (force-directed and stress-based)."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from ._kernels import fr_step
from .graphs import StaticGraph

ALGORITHMS = ("fruchterman_reingold", "kamada_kawai")


@dataclass
class LayoutResult:
    positions: dict  # node-id -> (x, y)
    algorithm: str
    seed: int


def _edge_arrays(g: StaticGraph, order: list) -> tuple[np.ndarray, np.ndarray]:
    idx = {u: i for i, u in enumerate(order)}
    src = np.fromiter((idx[u] for u, _ in g.edges), dtype=np.int64, count=g.edge_count)
    dst = np.fromiter((idx[v] for _, v in g.edges), dtype=np.int64, count=g.edge_count)
    return src, dst


def fruchterman_reingold(g: StaticGraph, seed: int = 0, iterations: int = 100) -> LayoutResult:
    order = sorted(g.nodes, key=str)
    n = len(order)
    rng = np.random.default_rng(seed)
    pos = rng.random((n, 2)) - 0.5
    if n > 1:
        src, dst = _edge_arrays(g, order)
        k = float(np.sqrt(1.0 / n))  # ideal edge length for a unit canvas
        for it in range(iterations):
            temp = 0.1 * (1.0 - it / iterations)
            fr_step(pos, src, dst, k, temp)
    pos -= pos.mean(axis=0)
    return LayoutResult({u: (float(x), float(y)) for u, (x, y) in zip(order, pos)},
                        "fruchterman_reingold", seed)


def _bfs_distances(g: StaticGraph, order: list) -> np.ndarray:
    idx = {u: i for i, u in enumerate(order)}
    n = len(order)
    adj = [[] for _ in range(n)]
    for u, v in g.edges:
        adj[idx[u]].append(idx[v])
        adj[idx[v]].append(idx[u])
    dist = np.full((n, n), -1.0)
    for s in range(n):
        dist[s, s] = 0.0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if dist[s, v] < 0:
                    dist[s, v] = dist[s, u] + 1
                    queue.append(v)
    finite_max = dist.max()
    dist[dist < 0] = (finite_max if finite_max > 0 else 1.0) * 2.0  # disconnected pairs
    return dist


def kamada_kawai(g: StaticGraph, seed: int = 0) -> LayoutResult:
    """Stress-minimizing layout over BFS graph distances."""
    order = sorted(g.nodes, key=str)
    n = len(order)
    rng = np.random.default_rng(seed)
    pos = rng.random((n, 2)) - 0.5
    if n > 1:
        d = _bfs_distances(g, order)
        d /= d.max()
        iu = np.triu_indices(n, k=1)
        target = d[iu]
        weight = 1.0 / target**2

        def stress(flat):
            p = flat.reshape(n, 2)
            diff = p[iu[0]] - p[iu[1]]
            lengths = np.sqrt((diff**2).sum(axis=1) + 1e-12)
            err = lengths - target
            grad = np.zeros((n, 2))
            coef = (2 * weight * err / lengths)[:, None] * diff
            np.add.at(grad, iu[0], coef)
            np.add.at(grad, iu[1], -coef)
            return float((weight * err**2).sum()), grad.ravel()

        res = optimize.minimize(stress, pos.ravel(), jac=True, method="L-BFGS-B",
                                options={"maxiter": 300})
        pos = res.x.reshape(n, 2)
    pos -= pos.mean(axis=0)
    return LayoutResult({u: (float(x), float(y)) for u, (x, y) in zip(order, pos)},
                        "kamada_kawai", seed)


def global_layout(g: StaticGraph, algorithm: str = "fruchterman_reingold",
                  seed: int = 0) -> LayoutResult:
    """Layout computed once on the root union graph and reused by every view."""
    if g.node_count == 0:
        raise ValueError("cannot lay out an empty graph")
    if algorithm == "fruchterman_reingold":
        result = fruchterman_reingold(g, seed)
    elif algorithm == "kamada_kawai":
        result = kamada_kawai(g, seed)
    else:
        raise ValueError(f"unknown layout algorithm {algorithm!r}")
    for xy in result.positions.values():
        if not all(np.isfinite(xy)):
            raise AssertionError("non-finite layout coordinate")
    return result
