import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msgcot import (
    Graph,
    load_citation_dataset,
    load_tu_dataset,
    normalize_adjacency,
    sample_task,
    synthetic_citation_graph,
    synthetic_graph_collection,
)
from msgcot.data import write_citation_dataset, write_tu_dataset
from msgcot.errors import DatasetFormatError, DatasetNotFoundError, SamplingError

from scalar_reference import ref_normalized_adjacency


# ---------------------------------------------------------------------------
# graph construction


def test_graph_drops_duplicate_edges_and_symmetrizes():
    g = Graph(features=np.eye(3), edges=[(1, 0), (0, 1), (1, 2)])
    assert g.num_edges == 2
    assert g.edges.tolist() == [[0, 1], [1, 2]]


def test_graph_rejects_self_loops_and_bad_endpoints():
    with pytest.raises(DatasetFormatError):
        Graph(features=np.eye(2), edges=[(0, 0)])
    with pytest.raises(DatasetFormatError):
        Graph(features=np.eye(2), edges=[(0, 5)])


def test_graph_arrays_are_write_protected():
    g = Graph(features=np.eye(2), edges=[(0, 1)])
    with pytest.raises(ValueError):
        g.features[0, 0] = 9.0


# ---------------------------------------------------------------------------
# adjacency normalization


def test_single_node_adjacency_is_identity():
    g = Graph(features=np.ones((1, 2)), edges=[])
    assert normalize_adjacency(g).matrix.toarray() == pytest.approx(np.array([[1.0]]))


def test_two_node_adjacency_all_half():
    g = Graph(features=np.ones((2, 2)), edges=[(0, 1)])
    assert normalize_adjacency(g).matrix.toarray() == pytest.approx(np.full((2, 2), 0.5))


def test_path_graph_center_entry_is_one_third():
    g = Graph(features=np.ones((3, 2)), edges=[(0, 1), (1, 2)])
    dense = normalize_adjacency(g).matrix.toarray()
    assert dense[1, 1] == pytest.approx(1 / 3)
    assert dense == pytest.approx(np.array(ref_normalized_adjacency(3, g.edges.tolist())))


def test_adjacency_matches_scalar_reference_on_toy(toy_graph):
    dense = normalize_adjacency(toy_graph).matrix.toarray()
    ref = np.array(ref_normalized_adjacency(toy_graph.num_nodes, toy_graph.edges.tolist()))
    assert dense == pytest.approx(ref, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_adjacency_symmetric_with_unit_spectrum(seed):
    g = synthetic_citation_graph(num_nodes=24, feature_dim=8, num_classes=3, seed=seed)
    dense = normalize_adjacency(g).matrix.toarray()
    assert np.abs(dense - dense.T).max() < 1e-12
    eigenvalues = np.linalg.eigvalsh(dense)
    assert eigenvalues.min() >= -1 - 1e-9 and eigenvalues.max() <= 1 + 1e-9
    assert dense.sum(axis=1).max() <= g.num_nodes


# ---------------------------------------------------------------------------
# loaders


def test_citation_round_trip(tmp_path, synth_graph):
    write_citation_dataset(synth_graph, tmp_path, "synth")
    loaded = load_citation_dataset(tmp_path, "synth")
    assert loaded.num_nodes == synth_graph.num_nodes
    assert loaded.feature_dim == synth_graph.feature_dim
    assert loaded.edges.tolist() == synth_graph.edges.tolist()
    assert loaded.labels.tolist() == synth_graph.labels.tolist()


def test_citation_features_l1_normalized(tmp_path):
    g = Graph(features=[[2.0, 2.0], [0.0, 0.0]], edges=[(0, 1)], labels=[0, 1])
    write_citation_dataset(g, tmp_path, "norm")
    loaded = load_citation_dataset(tmp_path, "norm")
    assert np.abs(loaded.features[0]).sum() == pytest.approx(1.0)
    assert loaded.features[1].tolist() == [0.0, 0.0]  # zero rows stay zero


def test_citation_missing_file_names_it(tmp_path):
    with pytest.raises(DatasetNotFoundError, match="content"):
        load_citation_dataset(tmp_path, "absent")


def test_citation_unknown_edge_id(tmp_path):
    (tmp_path / "bad.content").write_text("a 1 0 c0\nb 0 1 c1\n")
    (tmp_path / "bad.cites").write_text("a zz\n")
    with pytest.raises(DatasetFormatError, match="zz"):
        load_citation_dataset(tmp_path, "bad")
    lenient = load_citation_dataset(tmp_path, "bad", strict=False)
    assert lenient.num_edges == 0


def test_citation_empty_edge_file(tmp_path):
    (tmp_path / "tiny.content").write_text("a 1 0 c0\nb 0 1 c1\nc 1 1 c0\n")
    (tmp_path / "tiny.cites").write_text("")
    g = load_citation_dataset(tmp_path, "tiny")
    assert g.num_nodes == 3 and g.num_edges == 0


def test_tu_round_trip(tmp_path, synth_collection):
    write_tu_dataset(synth_collection, tmp_path, "SYN")
    loaded = load_tu_dataset(tmp_path, "SYN")
    assert loaded.num_graphs == synth_collection.num_graphs
    assert loaded.feature_dim == synth_collection.feature_dim
    assert loaded.graph_labels.tolist() == synth_collection.graph_labels.tolist()
    for a, b in zip(loaded.graphs, synth_collection.graphs):
        assert a.edges.tolist() == b.edges.tolist()
        assert a.features.tolist() == b.features.tolist()


def test_tu_single_graph(tmp_path):
    (tmp_path / "ONE_A.txt").write_text("1, 2\n2, 1\n")
    (tmp_path / "ONE_graph_indicator.txt").write_text("1\n1\n")
    (tmp_path / "ONE_graph_labels.txt").write_text("1\n")
    (tmp_path / "ONE_node_labels.txt").write_text("0\n1\n")
    coll = load_tu_dataset(tmp_path, "ONE")
    assert coll.num_graphs == 1
    assert coll.graphs[0].num_edges == 1
    assert coll.feature_dim == 2


def test_tu_rejects_cross_graph_edges(tmp_path):
    (tmp_path / "X_A.txt").write_text("1, 3\n3, 1\n")
    (tmp_path / "X_graph_indicator.txt").write_text("1\n1\n2\n")
    (tmp_path / "X_graph_labels.txt").write_text("1\n2\n")
    with pytest.raises(DatasetFormatError, match="crosses"):
        load_tu_dataset(tmp_path, "X")


def test_tu_rejects_gapped_graph_ids(tmp_path):
    (tmp_path / "G_A.txt").write_text("")
    (tmp_path / "G_graph_indicator.txt").write_text("1\n3\n")
    (tmp_path / "G_graph_labels.txt").write_text("1\n2\n3\n")
    with pytest.raises(DatasetFormatError):
        load_tu_dataset(tmp_path, "G")


# ---------------------------------------------------------------------------
# task sampling


def test_node_task_shape(synth_graph):
    task = sample_task(synth_graph, k=2, seed=0)
    assert task.level == "node"
    assert len(task.train_items) == 2 * synth_graph.num_classes
    for c in range(synth_graph.num_classes):
        assert sum(1 for _, cls in task.train_items if cls == c) == 2
    train = set(task.train_ids.tolist())
    assert train.isdisjoint(task.test_ids.tolist())
    assert len(task.test_items) == min(1000, synth_graph.num_nodes - len(train))


def test_graph_task_uses_all_remaining(synth_collection):
    task = sample_task(synth_collection, k=1, seed=0)
    assert task.level == "graph"
    assert len(task.train_items) == synth_collection.num_classes
    assert len(task.test_items) == synth_collection.num_graphs - synth_collection.num_classes


def test_sampling_is_deterministic(synth_graph):
    a = sample_task(synth_graph, k=1, seed=42)
    b = sample_task(synth_graph, k=1, seed=42)
    assert a == b


def test_distinct_seeds_vary_train_sets(synth_graph):
    trains = {sample_task(synth_graph, k=1, seed=s).train_items for s in range(100)}
    assert len(trains) >= 2


def test_sampling_error_names_class(synth_graph):
    with pytest.raises(SamplingError, match=r"class \d+ has only"):
        sample_task(synth_graph, k=10**6, seed=0)


def test_labels_correct_in_test_items(synth_collection):
    task = sample_task(synth_collection, k=1, seed=3)
    for gid, cls in task.test_items:
        assert synth_collection.graph_labels[gid] == cls
