import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from msgcot import Graph, pretrain, synthetic_citation_graph, synthetic_graph_collection
from msgcot.pretrain import PretrainConfig


@pytest.fixture
def toy_graph():
    """Six labeled nodes, two triangles joined by one edge."""
    rng = np.random.default_rng(7)
    return Graph(
        features=rng.random((6, 5)),
        edges=[(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5)],
        labels=[0, 0, 0, 1, 1, 1],
        name="toy6",
    )


@pytest.fixture(scope="session")
def synth_graph():
    return synthetic_citation_graph(num_nodes=90, feature_dim=48, num_classes=3, seed=3)


@pytest.fixture(scope="session")
def synth_collection():
    return synthetic_graph_collection(num_graphs=24, num_classes=2, feature_dim=5, seed=5)


@pytest.fixture(scope="session")
def synth_ckpt(synth_graph):
    return pretrain(
        synth_graph,
        PretrainConfig(epochs=40, batch=64, hidden=32, encoder_layers=2, seed=1),
    )


@pytest.fixture(scope="session")
def synth_collection_ckpt(synth_collection):
    return pretrain(
        synth_collection,
        PretrainConfig(epochs=30, batch=48, hidden=32, encoder_layers=2, seed=2),
    )
