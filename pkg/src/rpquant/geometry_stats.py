"""Exact statistics of finite point sets.

All functions take an ``(n, D)`` array-like of points.  One-dimensional input
of length ``n`` is read as ``n`` points on the line.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptySet, InvalidParam, NotAPartition

EXACT_DIAMETER_MAX_N = 2048
LOCAL_DIM_MAX_CENTERS = 512
TOL_EIG = 1e-9

_GRAM_BLOCK = 1024


def as_points(S) -> np.ndarray:
    """Validate and return ``S`` as a float ``(n, D)`` array."""
    X = np.asarray(S, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise InvalidParam(f"expected a 2-d point array, got shape {X.shape}")
    if X.shape[0] == 0:
        raise EmptySet("point set is empty")
    if X.shape[1] == 0:
        raise InvalidParam("points must have dimension >= 1")
    if not np.all(np.isfinite(X)):
        raise InvalidParam("point coordinates must be finite")
    return X


def mean(S) -> np.ndarray:
    return as_points(S).mean(axis=0)


def sq_dist_to(X: np.ndarray, center: np.ndarray) -> np.ndarray:
    """Row-wise squared distance to ``center``.

    Each row is reduced independently, so the value for a point does not depend
    on which other points are in the batch.  Tree routing relies on this.
    """
    diff = X - center
    return np.sum(diff * diff, axis=1)


def avg_sq_diameter(S) -> float:
    """Average squared interpoint distance, via ``(2/n) * sum ||x - mean||^2``."""
    X = as_points(S)
    return 2.0 * float(np.mean(sq_dist_to(X, X.mean(axis=0))))


def avg_sq_diameter_pairwise(S) -> float:
    """O(n^2 D) reference form ``(1/n^2) * sum_{x,y} ||x - y||^2``."""
    X = as_points(S)
    total = 0.0
    for x in X:
        total += float(np.sum((X - x) ** 2))
    return total / X.shape[0] ** 2


def _exact_diameter(X: np.ndarray) -> float:
    n = X.shape[0]
    if n == 1:
        return 0.0
    Y = X - X.mean(axis=0)
    sq = np.sum(Y * Y, axis=1)
    best, bi, bj = -1.0, 0, 0
    for start in range(0, n, _GRAM_BLOCK):
        block = Y[start:start + _GRAM_BLOCK]
        d2 = sq[start:start + _GRAM_BLOCK, None] + sq[None, :] - 2.0 * (block @ Y.T)
        k = int(np.argmax(d2))
        i, j = divmod(k, n)
        if d2[i, j] > best:
            best, bi, bj = float(d2[i, j]), start + i, j
    # The Gram expansion loses a few ulps; recompute the winning pair directly.
    return float(np.sqrt(np.sum((X[bi] - X[bj]) ** 2)))


def diameter(S, mode: str = "auto") -> tuple[float, bool]:
    """Diameter of ``S`` and whether it is exact.

    ``mode="exact"`` computes the largest pairwise distance.  ``"approx"``
    returns ``2 * max ||x - mean||``, which lies in ``[diam, 2 * diam]``.
    ``"auto"`` is exact up to ``EXACT_DIAMETER_MAX_N`` points.
    """
    X = as_points(S)
    if mode == "auto":
        mode = "exact" if X.shape[0] <= EXACT_DIAMETER_MAX_N else "approx"
    if mode == "exact":
        return _exact_diameter(X), True
    if mode == "approx":
        r2 = sq_dist_to(X, X.mean(axis=0))
        return 2.0 * float(np.sqrt(r2.max())), False
    raise InvalidParam(f"unknown diameter mode {mode!r}")


@dataclass(frozen=True)
class SetStats:
    mean: np.ndarray
    avg_sq_diameter: float
    diameter: float
    diameter_is_exact: bool


def set_stats(S, mode: str = "auto") -> SetStats:
    X = as_points(S)
    diam, exact = diameter(X, mode)
    return SetStats(X.mean(axis=0), avg_sq_diameter(X), diam, exact)


def _multiset_key(X: np.ndarray) -> np.ndarray:
    order = np.lexsort(X.T[::-1])
    return X[order]


def split_decrease(S, S1, S2) -> tuple[float, float]:
    """Both sides of the split-decrease identity.

    ``lhs`` is the drop in average squared diameter from ``S`` to the
    size-weighted children; ``rhs`` is ``(2|S1||S2|/|S|^2) ||mean(S1) - mean(S2)||^2``.
    """
    X, A, B = as_points(S), as_points(S1), as_points(S2)
    if not (X.shape[1] == A.shape[1] == B.shape[1]):
        raise NotAPartition("dimension mismatch between set and parts")
    if A.shape[0] + B.shape[0] != X.shape[0] or not np.array_equal(
        _multiset_key(X), _multiset_key(np.vstack([A, B]))
    ):
        raise NotAPartition("S1 and S2 do not partition S")
    n, n1, n2 = X.shape[0], A.shape[0], B.shape[0]
    lhs = avg_sq_diameter(X) - (n1 / n) * avg_sq_diameter(A) - (n2 / n) * avg_sq_diameter(B)
    gap = A.mean(axis=0) - B.mean(axis=0)
    rhs = 2.0 * n1 * n2 / n**2 * float(gap @ gap)
    return lhs, rhs


def covariance(S) -> np.ndarray:
    """Population covariance (normalized by n)."""
    X = as_points(S)
    Y = X - X.mean(axis=0)
    C = (Y.T @ Y) / X.shape[0]
    return 0.5 * (C + C.T)


@dataclass(frozen=True)
class LocalCovStats:
    """Eigen-spectrum of the covariance of one ball."""

    eigenvalues: np.ndarray
    trace: float
    n_points: int

    def d_for_eps(self, eps: float) -> int:
        """Smallest d whose top-d eigenvalues carry at least (1 - eps) of the trace."""
        if self.trace <= 0.0:
            return 0
        cum = np.cumsum(self.eigenvalues)
        target = (1.0 - eps) * cum[-1]
        return int(np.searchsorted(cum, target, side="left")) + 1


def spectrum(S) -> LocalCovStats:
    X = as_points(S)
    ev = np.linalg.eigvalsh(covariance(X))[::-1]
    tr = float(max(ev.sum(), 0.0))
    ev = np.where(ev < TOL_EIG * tr, 0.0, ev)
    return LocalCovStats(ev, float(ev.sum()), X.shape[0])


@dataclass(frozen=True)
class LocalCovResult:
    centers: np.ndarray
    balls: list
    dims: np.ndarray
    d_hat: int


def local_cov_dimension(S, r: float, eps: float, centers=None, rng=None) -> LocalCovResult:
    """Worst-case local covariance dimension over balls ``B(c, r)``, ``c`` in a sample of ``S``.

    ``centers`` may be ``None`` (all points when n <= 512, otherwise 512
    sampled without replacement), an int count, or an explicit index array.
    Balls holding fewer than two points count as dimension 0.
    """
    X = as_points(S)
    if not r > 0:
        raise InvalidParam("radius must be positive")
    if not 0.0 < eps < 1.0:
        raise InvalidParam("eps must lie in (0, 1)")
    n = X.shape[0]
    if n < 2:
        raise InvalidParam("need at least two points")
    if centers is None:
        centers = n if n <= LOCAL_DIM_MAX_CENTERS else LOCAL_DIM_MAX_CENTERS
    if np.isscalar(centers):
        count = int(centers)
        if count >= n:
            idx = np.arange(n)
        else:
            rng = np.random.default_rng(rng)
            idx = np.sort(rng.choice(n, size=count, replace=False))
    else:
        idx = np.asarray(centers, dtype=int)

    balls, dims = [], []
    r2 = r * r
    for i in idx:
        inside = X[sq_dist_to(X, X[i]) <= r2] if np.isfinite(r) else X
        if inside.shape[0] < 2:
            stats = LocalCovStats(np.zeros(X.shape[1]), 0.0, inside.shape[0])
        else:
            stats = spectrum(inside)
        balls.append(stats)
        dims.append(stats.d_for_eps(eps))
    dims = np.asarray(dims, dtype=int)
    return LocalCovResult(idx, balls, dims, int(dims.max()) if dims.size else 0)


def bias_variance_check(S, z) -> dict:
    """Both sides of the two bias-variance identities under the uniform law on ``S``.

    ``"a"``: ``E||X - z||^2`` vs ``E||X - EX||^2 + ||z - EX||^2``.
    ``"b"``: ``E||X - Y||^2`` vs ``2 E||X - EX||^2`` for independent ``X, Y``.
    Everything is summed directly, without the centered shortcuts.
    """
    X = as_points(S)
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.shape[0] != X.shape[1]:
        raise InvalidParam("z has the wrong dimension")
    mu = X.mean(axis=0)
    var = float(np.mean(np.sum((X - mu) ** 2, axis=1)))
    a_lhs = float(np.mean(np.sum((X - z) ** 2, axis=1)))
    a_rhs = var + float(np.sum((z - mu) ** 2))
    b_lhs = avg_sq_diameter_pairwise(X)
    return {"a": (a_lhs, a_rhs), "b": (b_lhs, 2.0 * var)}
