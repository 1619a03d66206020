import math

import numpy as np
import pytest

from conftest import random_graph
from multiscale_snapshots.graphs import StaticGraph
from multiscale_snapshots.layout import fruchterman_reingold, global_layout


def test_empty_graph_rejected():
    with pytest.raises(ValueError):
        global_layout(StaticGraph())


def test_unknown_algorithm_rejected():
    with pytest.raises(ValueError):
        global_layout(StaticGraph([0]), algorithm="spring")


def test_single_node_at_center():
    res = global_layout(StaticGraph([7]), seed=2)
    assert res.positions[7] == (0.0, 0.0)


def test_two_nodes_symmetric_at_ideal_length():
    g = StaticGraph()
    g.add_edge(0, 1)
    res = fruchterman_reingold(g, seed=1)
    (x0, y0), (x1, y1) = res.positions[0], res.positions[1]
    assert x0 == pytest.approx(-x1) and y0 == pytest.approx(-y1)
    sep = math.hypot(x0 - x1, y0 - y1)
    ideal = math.sqrt(1.0 / 2)  # k = sqrt(area / n)
    assert abs(sep - ideal) / ideal < 0.10


@pytest.mark.parametrize("algorithm", ["fruchterman_reingold", "kamada_kawai"])
def test_deterministic_under_seed(algorithm):
    g = random_graph(np.random.default_rng(0), 15, 0.25)
    a = global_layout(g, algorithm=algorithm, seed=4)
    b = global_layout(g, algorithm=algorithm, seed=4)
    assert a.positions == b.positions


@pytest.mark.parametrize("algorithm", ["fruchterman_reingold", "kamada_kawai"])
def test_every_node_has_finite_position(algorithm):
    g = random_graph(np.random.default_rng(3), 20, 0.15)
    g.nodes.add(99)  # isolated node
    res = global_layout(g, algorithm=algorithm, seed=0)
    assert set(res.positions) == g.nodes
    for x, y in res.positions.values():
        assert math.isfinite(x) and math.isfinite(y)


def test_centered():
    g = random_graph(np.random.default_rng(5), 12, 0.3)
    res = global_layout(g, seed=1)
    xs = [p[0] for p in res.positions.values()]
    ys = [p[1] for p in res.positions.values()]
    assert abs(sum(xs)) < 1e-6 and abs(sum(ys)) < 1e-6
