import os
from pathlib import Path

import numpy as np
import pytest

from multiscale_snapshots.build import cmd_build
from multiscale_snapshots.config import load_config
from multiscale_snapshots.graphs import StaticGraph

FIXTURES = Path(__file__).parent / "fixtures"


def random_graph(rng: np.random.Generator, n: int, p: float = 0.3) -> StaticGraph:
    g = StaticGraph(range(n))
    draw = np.triu(rng.random((n, n)) < p, k=1)
    for u, v in zip(*np.nonzero(draw)):
        g.add_edge(int(u), int(v))
    return g


@pytest.fixture(scope="session")
def tiny8_path() -> Path:
    return FIXTURES / "tiny8.tsv"


@pytest.fixture(scope="session")
def artifact_dir(tmp_path_factory, tiny8_path):
    """One fixture artifact shared by the io/server tests."""
    out = tmp_path_factory.mktemp("artifact") / "tiny8"
    cfg = load_config(env={}, overrides={
        "input_path": str(tiny8_path), "output_dir": str(out),
        "epochs": 80, "seed": 7,
    })
    return cmd_build(cfg)
