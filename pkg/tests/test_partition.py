import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msgcot import (
    Graph,
    build_partition_pool,
    coarse_schedule,
    heavy_edge_matching,
    synthetic_citation_graph,
    synthetic_graph_collection,
)
from msgcot.errors import ConfigError, ShapeError
from msgcot.partition import PartitionPool


def path_graph(n):
    return Graph(features=np.eye(n), edges=[(i, i + 1) for i in range(n - 1)])


# ---------------------------------------------------------------------------
# schedule


def test_schedule_guards_float_fuzz():
    # 0.2 * 10 evaluates above 2.0 in binary floating point
    assert coarse_schedule(10, 0.2, 1) == [2]
    assert coarse_schedule(10, 0.1, 1) == [1]
    assert coarse_schedule(4, 0.5, 2) == [2, 1]


def test_schedule_rejects_bad_ratio():
    with pytest.raises(ConfigError):
        coarse_schedule(10, 0.0, 1)
    with pytest.raises(ConfigError):
        coarse_schedule(10, 1.0, 1)


# ---------------------------------------------------------------------------
# heavy-edge matching


def test_target_equals_n_is_identity():
    g = path_graph(4)
    assert np.array_equal(heavy_edge_matching(g, 4), np.eye(4))


def test_target_one_is_all_ones_column():
    g = path_graph(4)
    assert np.array_equal(heavy_edge_matching(g, 1), np.ones((4, 1)))


def test_path_four_pairs_up_neighbors():
    # sorted edge order (0,1),(1,2),(2,3): match (0,1), skip (1,2), match (2,3)
    s = heavy_edge_matching(path_graph(4), 2)
    assert np.array_equal(s, np.array([[1, 0], [1, 0], [0, 1], [0, 1]], dtype=float))


def test_matching_bounds_checked():
    g = path_graph(3)
    with pytest.raises(ShapeError):
        heavy_edge_matching(g, 0)
    with pytest.raises(ShapeError):
        heavy_edge_matching(g, 4)


def test_isolated_nodes_survive_via_fallback():
    g = Graph(features=np.eye(5), edges=[(0, 1), (1, 2)])  # nodes 3, 4 isolated
    s = heavy_edge_matching(g, 2)
    assert s.shape == (5, 2)
    assert (s.sum(axis=1) == 1).all() and (s.sum(axis=0) >= 1).all()


def test_components_preserved_when_target_allows():
    # two triangles, no shared edge
    g = Graph(
        features=np.eye(6),
        edges=[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)],
    )
    s = heavy_edge_matching(g, 2)
    clusters = s.argmax(axis=1)
    assert clusters[0] == clusters[1] == clusters[2]
    assert clusters[3] == clusters[4] == clusters[5]
    assert clusters[0] != clusters[3]


def test_forced_cross_component_merge():
    g = Graph(features=np.eye(4), edges=[(0, 1), (2, 3)])
    s = heavy_edge_matching(g, 1)
    assert s.shape == (4, 1) and (s == 1).all()


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), target=st.integers(1, 12))
def test_matching_always_exact_and_onehot(seed, target):
    g = synthetic_citation_graph(num_nodes=12, feature_dim=4, num_classes=2, seed=seed)
    s = heavy_edge_matching(g, target)
    assert s.shape == (12, target)
    assert np.isin(s, (0.0, 1.0)).all()
    assert (s.sum(axis=1) == 1).all()
    assert (s.sum(axis=0) >= 1).all()  # no empty cluster


def test_matching_deterministic(synth_graph):
    a = heavy_edge_matching(synth_graph, 9)
    b = heavy_edge_matching(synth_graph, 9)
    assert np.array_equal(a, b)


# ---------------------------------------------------------------------------
# pools


def test_pool_shapes_follow_schedule():
    pool = build_partition_pool(path_graph(4), ratio=0.5, levels=1)
    assert [s.shape for s in pool.assignments] == [(4, 2)]
    pool2 = build_partition_pool(path_graph(10), ratio=0.2, levels=2)
    assert [s.shape for s in pool2.assignments] == [(10, 2), (2, 1)]


def test_pool_validates_one_hot_rows():
    with pytest.raises(ShapeError):
        PartitionPool(assignments=(np.array([[0.5, 0.5]]),))
    with pytest.raises(ShapeError):
        PartitionPool(assignments=(np.array([[1.0, 0.0], [1.0, 0.0]]),))  # empty cluster


def test_pool_per_graph_for_collections(synth_collection):
    pools = build_partition_pool(synth_collection, ratio=0.3, levels=2)
    assert len(pools) == synth_collection.num_graphs
    for g, pool in zip(synth_collection.graphs, pools):
        assert pool.counts() == coarse_schedule(g.num_nodes, 0.3, 2)


def test_pool_deterministic(synth_graph):
    a = build_partition_pool(synth_graph, ratio=0.2, levels=2)
    b = build_partition_pool(synth_graph, ratio=0.2, levels=2)
    for s, t in zip(a.assignments, b.assignments):
        assert np.array_equal(s, t)
