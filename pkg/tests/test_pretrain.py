import math

import numpy as np
import pytest

from msgcot import (
    Graph,
    load_checkpoint,
    lp_loss,
    pretrain,
    sample_lp_batch,
    save_checkpoint,
)
from msgcot.errors import CheckpointError, SamplingError, TrainingError
from msgcot.pretrain import PretrainConfig, dataset_fingerprint

from msgcot import autodiff as ad


# ---------------------------------------------------------------------------
# triple sampling


def test_path_graph_forces_the_only_negative():
    g = Graph(features=np.ones((3, 2)), edges=[(0, 1), (1, 2)])
    for _ in range(5):
        for a, p, n in sample_lp_batch(g, batch=8, seed=11):
            if a == 0:
                assert p == 1 and n == 2
            if a == 2:
                assert p == 1 and n == 0


def test_positives_are_true_edges_negatives_are_not(synth_graph):
    edge_set = {tuple(e) for e in synth_graph.edges.tolist()}
    for a, p, n in sample_lp_batch(synth_graph, batch=64, seed=0):
        assert (min(a, p), max(a, p)) in edge_set
        assert (min(a, n), max(a, n)) not in edge_set
        assert n != a


def test_batch_is_deterministic(synth_graph):
    assert sample_lp_batch(synth_graph, 32, seed=5) == sample_lp_batch(synth_graph, 32, seed=5)


def test_complete_graph_has_no_negatives():
    g = Graph(features=np.ones((3, 2)), edges=[(0, 1), (0, 2), (1, 2)])
    with pytest.raises(SamplingError, match="complete"):
        sample_lp_batch(g, 4, seed=0)


def test_edgeless_graph_rejected():
    g = Graph(features=np.ones((3, 2)), edges=[])
    with pytest.raises(SamplingError):
        sample_lp_batch(g, 4, seed=0)


# ---------------------------------------------------------------------------
# loss values (scalar arithmetic oracles)


def test_lp_loss_antipodal_negative():
    h = np.array([[1.0, 0.0], [1.0, 0.0], [-1.0, 0.0]])
    value = lp_loss(h, [(0, 1, 2)], temperature=1.0).item()
    assert value == pytest.approx(-math.log(math.e / (math.e + math.exp(-1))))
    assert value == pytest.approx(0.126928, abs=1e-6)


def test_lp_loss_identical_pos_neg_is_ln2():
    h = np.array([[1.0, 1.0], [2.0, 0.0], [2.0, 0.0]])
    assert lp_loss(h, [(0, 1, 2)]).item() == pytest.approx(math.log(2.0))


def test_lp_loss_zero_norm_embedding_counts_as_similarity_zero():
    h = np.array([[1.0, 0.0], [0.0, 0.0], [-1.0, 0.0]])
    # sim(a,p)=0 (zero row), sim(a,n)=-1 -> softplus(-1)
    assert lp_loss(h, [(0, 1, 2)]).item() == pytest.approx(math.log(1 + math.exp(-1.0)))


def test_lp_loss_bounds(synth_graph):
    rng = np.random.default_rng(0)
    h = rng.standard_normal((synth_graph.num_nodes, 16))
    triples = sample_lp_batch(synth_graph, 128, seed=1)
    for tau in (0.5, 1.0, 2.0):
        value = lp_loss(h, triples, temperature=tau).item()
        assert 0.0 <= value <= math.log(1 + math.exp(2.0 / tau))


def test_lp_loss_random_embeddings_near_ln2():
    rng = np.random.default_rng(3)
    h = rng.standard_normal((400, 256))
    triples = [(i, i + 1, i + 2) for i in range(0, 390, 3)]
    assert lp_loss(h, triples).item() == pytest.approx(math.log(2.0), abs=0.1)


def test_lp_loss_gradient(synth_graph):
    triples = sample_lp_batch(synth_graph, 16, seed=2)[:6]
    h = np.random.default_rng(0).standard_normal((synth_graph.num_nodes, 5))
    err = ad.grad_check(lambda p: lp_loss(p[0], triples, 0.7), [h], eps=1e-5)
    assert err < 1e-5


# ---------------------------------------------------------------------------
# training


def test_pretrain_improves_loss(synth_ckpt):
    assert synth_ckpt.loss_history[-1] < synth_ckpt.loss_history[0]


def test_pretrain_two_node_graph_approaches_infimum():
    g = Graph(features=np.eye(3), edges=[(0, 1)], name="pair")
    ckpt = pretrain(g, PretrainConfig(epochs=60, batch=4, hidden=8, encoder_layers=2, seed=0))
    assert ckpt.loss_history[-1] < ckpt.loss_history[0]


def test_pretrain_deterministic(synth_graph, tmp_path):
    cfg = PretrainConfig(epochs=5, batch=16, hidden=16, encoder_layers=2, seed=9)
    a, b = pretrain(synth_graph, cfg), pretrain(synth_graph, cfg)
    save_checkpoint(a, tmp_path / "a.ckpt")
    save_checkpoint(b, tmp_path / "b.ckpt")
    assert (tmp_path / "a.ckpt").read_bytes() == (tmp_path / "b.ckpt").read_bytes()


def test_pretrain_collection_pools_edges(synth_collection, synth_collection_ckpt):
    ckpt = synth_collection_ckpt
    assert ckpt.loss_history[-1] < ckpt.loss_history[0]
    assert ckpt.fingerprint["num_nodes"] == synth_collection.total_nodes


@pytest.mark.filterwarnings("ignore:invalid value:RuntimeWarning")
@pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
def test_pretrain_detects_divergence(synth_graph):
    with pytest.raises(TrainingError) as err:
        pretrain(synth_graph, PretrainConfig(epochs=5, lr=1e30, hidden=8, encoder_layers=2))
    assert err.value.epoch is not None


# ---------------------------------------------------------------------------
# persistence


def test_checkpoint_round_trip_is_byte_identical(synth_ckpt, tmp_path):
    first = tmp_path / "one.ckpt"
    second = tmp_path / "two.ckpt"
    save_checkpoint(synth_ckpt, first)
    save_checkpoint(load_checkpoint(first), second)
    assert first.read_bytes() == second.read_bytes()


def test_checkpoint_layers_round_trip_bitwise(synth_ckpt, tmp_path):
    path = tmp_path / "enc.ckpt"
    save_checkpoint(synth_ckpt, path)
    loaded = load_checkpoint(path)
    assert loaded.dims == synth_ckpt.dims
    for a, b in zip(loaded.params.layers, synth_ckpt.params.layers):
        assert a.tobytes() == b.tobytes()


def test_truncated_checkpoint_rejected(synth_ckpt, tmp_path):
    path = tmp_path / "enc.ckpt"
    save_checkpoint(synth_ckpt, path)
    blob = path.read_bytes()
    path.write_bytes(blob[: len(blob) - 100])
    with pytest.raises(CheckpointError, match="truncated"):
        load_checkpoint(path)


def test_version_mismatch_rejected(synth_ckpt, tmp_path):
    path = tmp_path / "enc.ckpt"
    save_checkpoint(synth_ckpt, path)
    blob = path.read_bytes().replace(b"version=1", b"version=9")
    path.write_bytes(blob)
    with pytest.raises(CheckpointError, match="version"):
        load_checkpoint(path)


def test_fingerprint_mismatch_rejected(synth_ckpt, synth_collection, tmp_path):
    path = tmp_path / "enc.ckpt"
    save_checkpoint(synth_ckpt, path)
    with pytest.raises(CheckpointError, match="fingerprint"):
        load_checkpoint(path, data=synth_collection)


def test_fingerprint_tracks_content(synth_graph):
    fp = dataset_fingerprint(synth_graph)
    assert fp["num_nodes"] == synth_graph.num_nodes
    other = Graph(
        features=synth_graph.features * 2.0,
        edges=synth_graph.edges,
        labels=synth_graph.labels,
        name=synth_graph.name,
    )
    assert dataset_fingerprint(other)["hash"] != fp["hash"]
