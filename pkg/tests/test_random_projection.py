import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import point_sets
from rpquant import random_projection as rp
from rpquant.errors import (
    DimensionMismatch, InvalidParam, NonOrthonormalBasis, NotApplicable, NotPSD, ZeroVector,
)


def test_rng_seed_streams():
    a = rp.RngSeed(7, (1, 2)).generator().standard_normal(5)
    b = rp.RngSeed(7, (1, 2)).generator().standard_normal(5)
    c = rp.RngSeed(7, (1, 3)).generator().standard_normal(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert rp.RngSeed(7).child(4).path == (4,)


def test_sample_direction_examples():
    for seed in range(20):
        v = rp.sample_direction(1, "unit-sphere", seed).vector
        assert v.tolist() in ([1.0], [-1.0])
    u = rp.sample_direction(50, "unit-sphere", 3).vector
    assert abs(np.linalg.norm(u) - 1) <= 1e-12
    assert np.array_equal(rp.sample_direction(10, rng=rp.RngSeed(1)).vector,
                          rp.sample_direction(10, rng=rp.RngSeed(1)).vector)
    with pytest.raises(InvalidParam):
        rp.sample_direction(0)


def test_gaussian_direction_variance():
    gen = np.random.default_rng(0)
    V = np.array([rp.sample_direction(1000, rng=gen).vector for _ in range(10_000)])
    var = V.var(axis=0).mean()
    assert 0.9 / 1000 <= var <= 1.1 / 1000


def test_project_examples():
    assert rp.project([[1, 0], [0, 1]], [1, 0]).values.tolist() == [1.0, 0.0]
    assert rp.project([[3, 4]], [0.6, 0.8]).values[0] == pytest.approx(5.0)
    assert rp.project(np.random.default_rng(0).standard_normal((5, 3)), np.zeros(3)).values.tolist() == [0.0] * 5
    with pytest.raises(DimensionMismatch):
        rp.project([[1, 2]], [1, 2, 3])


@given(point_sets(min_n=2, max_n=2), st.floats(-5, 5), st.integers(0, 1000))
def test_projection_linear(P, c, seed):
    x, y = P
    U = rp.sample_direction(P.shape[1], rng=seed)
    px, py = rp.project([x], U).values[0], rp.project([y], U).values[0]
    assert rp.project([x + y], U).values[0] == pytest.approx(px + py, abs=1e-12 * (1 + abs(px) + abs(py)) * 10)
    assert rp.project([c * x], U).values[0] == pytest.approx(c * px, abs=1e-12 * (1 + abs(c * px)) * 10)


@given(point_sets(min_n=3, max_n=30), st.floats(0.1, 100), st.integers(0, 1000))
def test_median_partition_scale_invariant(X, c, seed):
    v = rp.sample_direction(X.shape[1], rng=seed).vector
    k = (X.shape[0] + 1) // 2 - 1
    p1 = rp.project_rows(X, v)
    p2 = rp.project_rows(X, c * v)
    m1, m2 = np.partition(p1, k)[k], np.partition(p2, k)[k]
    assert np.array_equal(p1 <= m1, p2 <= m2)


def test_project_rows_batch_independent(rng):
    X = rng.standard_normal((500, 37))
    v = rng.standard_normal(37)
    batch = rp.project_rows(X, v)
    single = np.array([rp.project_rows(X[i:i + 1], v)[0] for i in range(500)])
    assert np.array_equal(batch, single)


def test_length_tails():
    x = np.arange(1.0, 11.0)
    small, large = rp.length_tail_probabilities(x, 0.0, 2.0, rng=1)
    assert small.estimate == 0.0
    assert large.holds and large.bound == pytest.approx(math.exp(-2))
    small, _ = rp.length_tail_probabilities(x, 0.5, 2.0, rng=2)
    assert small.holds
    assert small.estimate == pytest.approx(0.3829, abs=5 * small.stderr)
    with pytest.raises(ZeroVector):
        rp.length_tail_probabilities(np.zeros(3), 0.5, 2.0)


def _unit_ball(gen, n, D):
    g = gen.standard_normal((n, D))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * gen.random((n, 1)) ** (1.0 / D)


def test_central_interval_and_median():
    gen = np.random.default_rng(3)
    S = _unit_ball(gen, 300, 20)
    x0 = np.zeros(20)
    assert rp.central_interval_fraction(S, x0, 0.1, 0.1, rng=4).holds
    assert rp.central_interval_fraction(np.zeros((1, 20)), x0, 0.1, 0.1, rng=4).estimate == 0.0
    assert rp.median_deviation(S, x0, 0.1, rng=5).holds
    with pytest.raises(InvalidParam):
        rp.central_interval_fraction(S, x0, 0.5, 0.5)


def test_subspace_shrinkage_examples():
    D = 40
    full = rp.subspace_max_shrinkage(np.eye(D), 0.05, rng=0, draws=200)
    assert np.all(full.probe_max <= full.sup + 1e-12)
    assert abs(full.sup.mean() - 1.0) < 0.05
    e1 = np.eye(D)[:, :1]
    one = rp.subspace_max_shrinkage(e1, 0.05, rng=1, draws=4000)
    assert abs(one.sup.mean() - 1.0 / D) < 5 * one.sup.std() / math.sqrt(4000)
    H = np.linalg.qr(np.random.default_rng(2).standard_normal((100, 5)))[0]
    r = rp.subspace_max_shrinkage(H, 0.05, rng=3)
    assert r.holds and r.bound == pytest.approx(8 * (5 + math.log(20)) / 100)
    with pytest.raises(NonOrthonormalBasis):
        rp.subspace_max_shrinkage(2 * e1, 0.05)


def test_quadratic_form_examples():
    low, _ = rp.quadratic_form_tails(np.eye(30), 0.25, 6.0, rng=0, trials=20_000)
    assert low.holds
    A = np.zeros((50, 50))
    A[0, 0] = 1.0
    _, high = rp.quadratic_form_tails(A, 0.25, 6.0, rng=1)
    assert high.holds and high.bound == pytest.approx(math.exp(-1))
    assert high.estimate == pytest.approx(0.0143, abs=5 * high.stderr)
    with pytest.raises(NotApplicable):
        rp.quadratic_form_tails(np.zeros((3, 3)), 0.25, 6.0)
    with pytest.raises(NotPSD):
        rp.quadratic_form_tails(np.diag([1.0, -1.0]), 0.25, 6.0)


def test_quadratic_form_mean():
    gen = np.random.default_rng(8)
    B = gen.standard_normal((10, 10))
    A = B @ B.T
    U = gen.standard_normal((50_000, 10)) / math.sqrt(10)
    q = np.einsum("ij,jk,ik->i", U, A, U)
    assert abs(q.mean() - np.trace(A) / 10) <= 5 * q.std() / math.sqrt(q.size)


def test_projected_avg_diameter_examples():
    two = rp.projected_avg_diameter_bound([[0.0] * 10, [1.0] * 10], rng=0)
    assert two.success_rate >= 0.1
    flat = rp.projected_avg_diameter_bound(np.ones((5, 4)), trials=50, rng=0)
    assert flat.success_rate == 1.0
    S = np.random.default_rng(1).standard_normal((200, 50))
    r = rp.projected_avg_diameter_bound(S, trials=10_000, rng=2)
    assert 0.9 <= r.mean_ratio <= 1.1


def test_tail_profile_examples():
    gen = np.random.default_rng(4)
    S = _unit_ball(gen, 300, 30)
    prof = rp.tail_fraction_profile(S, 0.2, K=4, rng=5)
    assert prof.overall.holds
    vacuous = prof.bounds >= 1.0
    assert np.all(prof.exceedance[vacuous] == 0.0)
    single = rp.tail_fraction_profile(np.zeros((1, 5)), 0.2, K=4, trials=20, rng=0)
    assert single.overall.estimate == 0.0
