import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import point_sets, rel_close
from rpquant import geometry_stats as gs
from rpquant import rptree
from rpquant.random_projection import Direction
from rpquant.errors import CorruptInput, DegenerateCell, DimensionMismatch, InvalidParam, SchemaMismatch


def _leaf_members(tree, X):
    ids = rptree.route_many(tree, X)
    return {leaf.leaf_id: X[ids == leaf.leaf_id] for leaf in tree.leaves}


def test_choose_rule_two_points():
    rule, out = rptree.choose_rule([[0.0, 0.0], [3.0, 1.0]], rng=0)
    assert isinstance(rule, rptree.ProjectionRule)
    assert out.p == 0.5 and out.n_left == out.n_right == 1


def test_choose_rule_outlier_takes_distance_split():
    X = np.zeros((100, 3))
    X[-1, 0] = 100.0
    stats = rptree.cell_stats(X)
    assert stats.delta_sq == pytest.approx(1e4)
    assert stats.delta_a_sq == pytest.approx(gs.avg_sq_diameter_pairwise(X))
    assert stats.delta_sq > 10 * stats.delta_a_sq
    rule, out = rptree.choose_rule(X, c=10, rng=0)
    assert isinstance(rule, rptree.DistanceRule)
    lhs = out.p * out.child_delta_sq[0] + (1 - out.p) * out.child_delta_sq[1]
    assert lhs <= (0.5 + 2 / 10) * out.parent_delta_sq


def test_choose_rule_identical_points():
    with pytest.raises(DegenerateCell):
        rptree.choose_rule(np.ones((5, 2)))


def test_choose_rule_param_checks():
    with pytest.raises(InvalidParam):
        rptree.choose_rule([[0.0], [1.0]], c=4.0)
    with pytest.raises(InvalidParam):
        rptree.choose_rule([[0.0]])


def test_tied_projections_fall_back_to_distance(monkeypatch):
    X = np.array([[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
    orth = np.array([0.0, 1.0])
    monkeypatch.setattr(rptree, "sample_direction", lambda *a, **k: Direction(orth))
    params = rptree.TreeParams(c=1e9)
    stats = rptree.cell_stats(X)
    rule, mask = rptree._split_cell(X, stats, params, None)
    assert isinstance(rule, rptree.DistanceRule)
    assert mask.sum() == 3
    # Along a shared direction the projected distances tie as well.
    with pytest.raises(DegenerateCell):
        rptree._split_cell(X, stats, params, None, level_direction=orth)


def test_small_input_single_leaf():
    X = np.random.default_rng(0).standard_normal((5, 3))
    tree = rptree.make_tree(X)
    assert tree.n_leaves == 1
    assert np.allclose(tree.leaves[0].codeword, X.mean(axis=0))
    assert rptree.route(tree, np.zeros(3))[0] == 0
    assert rptree.quantization_error(tree, X) == pytest.approx(gs.avg_sq_diameter(X) / 2)


def test_full_depth_on_separated_points():
    L = 4
    X = np.array([[10.0 * i, (i * 7) % 3] for i in range(2**L)])
    tree = rptree.make_tree(X, min_size=1, max_levels=L, seed=1)
    assert tree.n_leaves == 2**L
    assert all(leaf.count == 1 for leaf in tree.leaves)
    assert rptree.quantization_error(tree, X) == 0.0


def test_four_point_error():
    X = np.array([[0.0], [2.0], [10.0], [12.0]])
    tree = rptree.make_tree(X, min_size=3, max_levels=1, seed=0)
    assert tree.n_leaves == 2
    assert rptree.quantization_error(tree, X) == pytest.approx(1.0)


def test_projection_routing_predicate():
    rule = rptree.ProjectionRule(np.array([1.0, 0.0]), 0.5)
    tree = rptree.RpTree(
        rptree.Internal(rule,
                        rptree.Leaf(np.array([0.0, 0.0]), 1, 1, 0.0, "small"),
                        rptree.Leaf(np.array([1.0, 0.0]), 1, 1, 0.0, "small"),
                        2, np.array([0.5, 0.0]), 0, 0.5),
        rptree.TreeParams(max_levels=1), 2, 2)
    assert rptree.route(tree, [0.2, 9.0])[0] == 0
    assert rptree.route(tree, [0.5, 9.0])[0] == 0
    assert rptree.route(tree, [0.7, 9.0])[0] == 1
    with pytest.raises(DimensionMismatch):
        rptree.route(tree, [1.0, 2.0, 3.0])


def test_tree_invariants(rng):
    X = rng.standard_normal((3000, 12)) @ rng.standard_normal((12, 12))
    tree = rptree.make_tree(X, seed=4)
    assert sum(leaf.count for leaf in tree.leaves) == X.shape[0]
    members = _leaf_members(tree, X)
    for leaf in tree.leaves:
        pts = members[leaf.leaf_id]
        assert pts.shape[0] == leaf.count
        assert np.allclose(pts.mean(axis=0), leaf.codeword, rtol=0, atol=1e-12)
        assert leaf.depth <= tree.params.max_levels
        assert leaf.count < tree.params.min_size or leaf.depth == tree.params.max_levels \
            or leaf.reason == "degenerate"
    err = rptree.quantization_error(tree, X)
    halves = sum(leaf.count * leaf.stats.delta_a_sq for leaf in tree.leaves) / (2 * X.shape[0])
    assert rel_close(err, halves)
    for node in tree.internal_nodes():
        s = node.stats
        assert s.delta_a_sq <= s.delta_sq * (1 + 1e-12)
        if s.delta_exact:
            d = np.sqrt(s.delta_sq)
            assert s.radius <= d * (1 + 1e-12) and d <= 2 * s.radius * (1 + 1e-12)
        if node.outcome.split_kind == "projection" and isinstance(node.rule, rptree.ProjectionRule):
            assert abs(node.outcome.p - 0.5) <= 1 / (2 * node.count) + 1e-12


def test_split_report_checks(rng):
    X = np.vstack([rng.standard_normal((400, 6)), rng.standard_normal((5, 6)) * 50])
    tree = rptree.make_tree(X, seed=2)
    report = rptree.split_quality_report(tree)
    assert report and all(ch.decrease_ok for ch in report)
    dist = [ch for ch in report if ch.distance_bound_ok is not None]
    assert dist and all(ch.distance_bound_ok for ch in dist)
    assert all(ch.diameter_monotone_ok for ch in report if ch.diameter_monotone_ok is not None)
    with pytest.raises(InvalidParam):
        rptree.split_quality_report(rptree.make_tree(X, seed=2, retain_stats=False))


def test_identical_child_means_zero_decrease():
    X = np.array([[-1.0, 0.0], [1.0, 0.0], [-2.0, 5.0], [2.0, 5.0]])
    rule = rptree.ProjectionRule(np.array([0.0, 1.0]), 1.0)
    mask = rule.evaluate(X)
    out = rptree._outcome(rule, X, mask, rptree.cell_stats(X), rptree.cell_stats(X[mask]),
                          rptree.cell_stats(X[~mask]))
    assert out.decrease == pytest.approx(2 * 0.25 * 25)
    X2 = np.array([[-1.0, 0.0], [1.0, 0.0], [-2.0, 0.0], [2.0, 0.0]])
    rule = rptree.DistanceRule(np.zeros(2), 1.0)
    mask = rule.evaluate(X2)
    out = rptree._outcome(rule, X2, mask, rptree.cell_stats(X2), rptree.cell_stats(X2[mask]),
                          rptree.cell_stats(X2[~mask]))
    assert out.decrease == 0.0


def test_median_decrease_trend_with_dimension():
    from rpquant.datagen_eval import ManifoldSpec, generate

    def median_decrease(d):
        X = generate(ManifoldSpec("linear-subspace", d, 60, 4000, 0.0, 3))
        rep = rptree.split_quality_report(rptree.make_tree(X, seed=1))
        vals = [ch.relative_decrease for ch in rep if ch.outcome.split_kind == "projection"]
        return float(np.median(vals))

    lo, hi = median_decrease(2), median_decrease(10)
    assert hi > 0.01
    assert lo > hi


def test_routing_matches_build_partition(rng):
    X = rng.standard_normal((2000, 30)) * rng.uniform(0.1, 10, 30)
    tree = rptree.make_tree(X, seed=9, min_size=4)
    batch = rptree.route_many(tree, X)
    rows = np.array([rptree.route(tree, x)[0] for x in X])
    assert np.array_equal(batch, rows)
    shuffled = rng.permutation(X.shape[0])
    assert np.array_equal(rptree.route_many(tree, X[shuffled]), batch[shuffled])
    for leaf in tree.leaves:
        assert (batch == leaf.leaf_id).sum() == leaf.count


def test_shared_per_level_directions(rng):
    X = rng.standard_normal((1500, 10))
    X[:20] *= 40
    tree = rptree.make_tree(X, seed=5, shared_per_level=True)
    assert len(tree.level_directions) == tree.params.max_levels
    for node in tree.internal_nodes():
        if isinstance(node.rule, rptree.ProjectionRule):
            assert np.array_equal(node.rule.direction, tree.level_directions[node.depth])
    kinds = {type(n.rule) for n in tree.internal_nodes()}
    assert rptree.ProjectedDistanceRule in kinds
    assert sum(leaf.count for leaf in tree.leaves) == X.shape[0]
    assert np.array_equal(rptree.route_many(tree, X), [rptree.route(tree, x)[0] for x in X])


def test_mean_threshold_variant(rng):
    X = rng.standard_normal((800, 5))
    tree = rptree.make_tree(X, threshold="mean", seed=0)
    assert sum(leaf.count for leaf in tree.leaves) == 800
    assert all(ch.decrease_ok for ch in rptree.split_quality_report(tree))


def test_parallel_build_identical(rng):
    X = rng.standard_normal((3000, 8))
    a = rptree.serialize(rptree.make_tree(X, seed=11))
    for jobs in (2, 3, 7):
        assert rptree.serialize(rptree.make_tree(X, seed=11, n_jobs=jobs)) == a


def test_seed_changes_tree(rng):
    X = rng.standard_normal((500, 8))
    assert rptree.serialize(rptree.make_tree(X, seed=1)) != rptree.serialize(rptree.make_tree(X, seed=2))


def _structure(node):
    d = rptree._node_to_dict(node)
    return json.dumps(d, sort_keys=True)


def test_serialization_round_trip(rng, tmp_path):
    X = rng.standard_normal((700, 6))
    X[:5] *= 30
    for shared in (False, True):
        tree = rptree.make_tree(X, seed=3, shared_per_level=shared)
        data = rptree.serialize(tree)
        back = rptree.deserialize(data)
        assert rptree.serialize(back) == data
        assert _structure(back.root) == _structure(tree.root)
        assert back.params == tree.params and back.dim == tree.dim
        Q = rng.standard_normal((2000, 6)) * 3
        assert np.array_equal(rptree.route_many(back, Q), rptree.route_many(tree, Q))
    rptree.save_tree(tree, tmp_path / "t.json")
    assert rptree.serialize(rptree.load_tree(tmp_path / "t.json")) == data


def test_deserialize_errors(rng):
    data = rptree.serialize(rptree.make_tree(rng.standard_normal((100, 3)), seed=0))
    with pytest.raises(CorruptInput):
        rptree.deserialize(data[: len(data) // 2])
    with pytest.raises(CorruptInput):
        rptree.deserialize(b"\xff\xfe")
    doc = json.loads(data)
    doc["version"] = 99
    with pytest.raises(SchemaMismatch):
        rptree.deserialize(json.dumps(doc))
    doc = json.loads(data)
    del doc["root"]["kind"]
    with pytest.raises(CorruptInput):
        rptree.deserialize(json.dumps(doc))
    with pytest.raises(SchemaMismatch):
        rptree.deserialize(b"[1, 2]")


def test_golden_tree():
    """A fixed tree built on fixed data routes the same everywhere."""
    X = np.array([[i * 0.37 % 1.0, (i * i) * 0.11 % 1.0, i / 40] for i in range(40)])
    tree = rptree.make_tree(X, seed=2024, min_size=4)
    ids = rptree.route_many(tree, X).tolist()
    back = rptree.deserialize(rptree.serialize(tree))
    assert rptree.route_many(back, X).tolist() == ids
    assert sorted(set(ids)) == list(range(tree.n_leaves))


def test_truncate_and_frontier(rng):
    X = rng.standard_normal((1000, 4))
    tree = rptree.make_tree(X, seed=6, min_size=2)
    errs = [tree.training_error(L) for L in range(tree.params.max_levels + 1)]
    assert errs[0] == pytest.approx(gs.avg_sq_diameter(X) / 2)
    assert all(a >= b - 1e-12 for a, b in zip(errs, errs[1:]))
    for L in (0, 2, 5):
        cut = rptree.truncate(tree, L)
        assert cut.n_leaves == len(tree.frontier(L))
        assert rptree.quantization_error(cut, X) == pytest.approx(errs[L], rel=1e-9)


def test_scaling_scales_error(rng):
    X = rng.standard_normal((400, 5))
    tree = rptree.make_tree(X, seed=8)
    s = 4.0  # a power of two scales every float exactly, so the replayed partition must match

    def scale_node(node):
        if isinstance(node, rptree.Leaf):
            return rptree.Leaf(node.codeword * s, node.count, node.depth, node.sse * s * s, node.reason)
        r = node.rule
        if isinstance(r, rptree.ProjectionRule):
            r = rptree.ProjectionRule(r.direction, r.threshold * s)
        else:
            r = rptree.DistanceRule(r.center * s, r.radius_threshold * s)
        return rptree.Internal(r, scale_node(node.left), scale_node(node.right), node.count,
                               node.mean * s, node.depth, node.sse * s * s)

    scaled = rptree.RpTree(scale_node(tree.root), tree.params, tree.dim, tree.n_train)
    assert np.array_equal(rptree.route_many(scaled, X * s), rptree.route_many(tree, X))
    assert rptree.quantization_error(scaled, X * s) == pytest.approx(
        s * s * rptree.quantization_error(tree, X), rel=1e-12)


@given(point_sets(min_n=2, max_n=60), st.integers(0, 1000))
def test_partition_and_decrease_properties(X, seed):
    tree = rptree.make_tree(X, seed=seed, min_size=1, max_levels=4)
    assert sum(leaf.count for leaf in tree.leaves) == X.shape[0]
    ids = rptree.route_many(tree, X)
    for leaf in tree.leaves:
        assert (ids == leaf.leaf_id).sum() == leaf.count
    for ch in rptree.split_quality_report(tree):
        assert ch.decrease_ok
        if ch.distance_bound_ok is not None:
            assert ch.distance_bound_ok
        if ch.diameter_monotone_ok is not None:
            assert ch.diameter_monotone_ok
