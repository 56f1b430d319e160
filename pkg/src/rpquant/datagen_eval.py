"""Synthetic manifold data, a Lloyd's k-means baseline, exact k-means by enumeration,
and the error-vs-codebook-size experiment."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import InvalidParam, TooLarge
from .geometry_stats import as_points, sq_dist_to
from .random_projection import RngSeed, as_generator
from .rptree import TreeParams, make_tree

KINDS = ("linear-subspace", "d-sphere", "swiss-roll")
_ALIASES = {"subspace": "linear-subspace", "sphere": "d-sphere", "swissroll": "swiss-roll"}

BRUTE_K2_MAX_N = 24
BRUTE_GENERAL_MAX_N = 12
SLOPE_ERROR_FLOOR = 1e-12


@dataclass(frozen=True)
class ManifoldSpec:
    kind: str
    d: int
    D: int
    n: int
    noise_sigma: float = 0.0
    seed: int = 0

    def validate(self) -> "ManifoldSpec":
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise InvalidParam(f"unknown manifold kind {self.kind!r}")
        if self.n < 1:
            raise InvalidParam("n must be >= 1")
        if not self.noise_sigma >= 0:
            raise InvalidParam("noise_sigma must be >= 0")
        if kind == "linear-subspace" and not 1 <= self.d <= self.D:
            raise InvalidParam("linear-subspace needs 1 <= d <= D")
        if kind == "d-sphere" and not (self.d >= 1 and self.d + 1 <= self.D):
            raise InvalidParam("d-sphere needs d + 1 <= D")
        if kind == "swiss-roll" and not (self.d == 2 and self.D >= 3):
            raise InvalidParam("swiss-roll needs d = 2 and D >= 3")
        return replace(self, kind=kind)


def _frame(gen, D: int, k: int) -> np.ndarray:
    """Random D x k matrix with orthonormal columns."""
    Q, R = np.linalg.qr(gen.standard_normal((D, k)))
    return Q * np.sign(np.diag(R))


def generate(spec: ManifoldSpec, rng=None) -> np.ndarray:
    """Sample ``spec.n`` points near a ``d``-dimensional manifold in ``R^D``.

    The intrinsic coordinates, the embedding frame and the ambient noise each
    draw from their own stream, so the coordinates depend only on the seed and
    ``(kind, d, n)``, not on ``D``.  ``rng`` overrides ``spec.seed`` when given
    as an int.
    """
    spec = spec.validate()
    seed = spec.seed if rng is None else rng
    coords_gen, frame_gen, noise_gen = (RngSeed(seed, (k,)).generator() for k in range(3))
    n, d, D = spec.n, spec.d, spec.D
    if spec.kind == "linear-subspace":
        Z = coords_gen.standard_normal((n, d))
    elif spec.kind == "d-sphere":
        Z = coords_gen.standard_normal((n, d + 1))
        Z /= np.linalg.norm(Z, axis=1, keepdims=True)
    else:
        u, v = coords_gen.random(n), coords_gen.random(n)
        t = 1.5 * np.pi * (1.0 + 2.0 * u)
        Z = np.column_stack([t * np.cos(t), 21.0 * v, t * np.sin(t)])
    X = Z @ _frame(frame_gen, D, Z.shape[1]).T
    if spec.noise_sigma > 0:
        X = X + spec.noise_sigma * noise_gen.standard_normal((n, D))
    return X


# --- k-means ----------------------------------------------------------------

@dataclass(frozen=True)
class KMeansResult:
    centers: np.ndarray
    assignment: np.ndarray
    cost: float
    history: tuple
    iterations: int


def _assign(X, centers):
    d2 = np.stack([sq_dist_to(X, c) for c in centers], axis=1)
    a = np.argmin(d2, axis=1)
    return a, d2[np.arange(X.shape[0]), a]


def lloyd_kmeans(S, k: int, iters: int = 100, rng=None, init=None, tol: float = 1e-9) -> KMeansResult:
    """Lloyd's algorithm from ``k`` data points chosen uniformly without replacement.

    ``cost`` is the mean squared distance to the nearest center.  An empty
    cluster is reseeded at the point farthest from its current center.
    """
    X = as_points(S)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise InvalidParam("need 1 <= k <= n")
    if iters < 1:
        raise InvalidParam("iters must be >= 1")
    if init is not None:
        centers = np.array(as_points(init), dtype=float)
        if centers.shape != (k, X.shape[1]):
            raise InvalidParam("init must have shape (k, D)")
    else:
        gen = as_generator(rng)
        centers = X[np.sort(gen.choice(n, size=k, replace=False))].copy()

    assignment, d2 = _assign(X, centers)
    history = [float(d2.mean())]
    it = 0
    for it in range(1, iters + 1):
        for j in range(k):
            members = assignment == j
            if members.any():
                centers[j] = X[members].mean(axis=0)
            else:
                far = int(np.argmax(d2))
                centers[j] = X[far]
                assignment[far] = j
                d2[far] = 0.0
        assignment, d2 = _assign(X, centers)
        cost = float(d2.mean())
        prev = history[-1]
        history.append(cost)
        if prev - cost <= tol * max(prev, np.finfo(float).tiny):
            break
    return KMeansResult(centers, assignment, history[-1], tuple(history), it)


def pairwise_cost(X: np.ndarray, labels: np.ndarray) -> float:
    """``sum_j (1/(2|C_j|)) sum_{i,i' in C_j} ||x_i - x_i'||^2`` over ordered pairs."""
    total = 0.0
    for j in np.unique(labels):
        C = X[labels == j]
        diff = C[:, None, :] - C[None, :, :]
        total += float(np.sum(diff * diff)) / (2 * C.shape[0])
    return total


def centroid_cost(X: np.ndarray, labels: np.ndarray) -> float:
    """``sum_j sum_{i in C_j} ||x_i - mean(C_j)||^2``."""
    total = 0.0
    for j in np.unique(labels):
        C = X[labels == j]
        total += float(np.sum(sq_dist_to(C, C.mean(axis=0))))
    return total


def _brute_k2(X: np.ndarray):
    n = X.shape[0]
    diff = X[:, None, :] - X[None, :, :]
    W = np.sum(diff * diff, axis=2)
    best_cost, best_mask = np.inf, 0
    # Point 0 always lies in the first cluster; masks enumerate membership of points 1..n-1.
    n_free = n - 1
    bits = np.arange(n_free)
    chunk = 1 << min(n_free, 14)
    for start in range(0, 1 << n_free, chunk):
        masks = np.arange(start, min(start + chunk, 1 << n_free))
        M = np.zeros((masks.size, n))
        M[:, 0] = 1.0
        M[:, 1:] = (masks[:, None] >> bits) & 1
        N = 1.0 - M
        n1, n2 = M.sum(axis=1), N.sum(axis=1)
        s1 = np.einsum("ij,ij->i", M @ W, M)
        s2 = np.einsum("ij,ij->i", N @ W, N)
        with np.errstate(divide="ignore", invalid="ignore"):
            cost = s1 / (2 * n1) + np.where(n2 > 0, s2 / (2 * np.maximum(n2, 1)), np.inf)
        i = int(np.argmin(cost))
        if cost[i] < best_cost:
            best_cost, best_mask = float(cost[i]), int(masks[i])
    labels = np.ones(n, dtype=int)
    labels[0] = 0
    labels[1:][((best_mask >> bits) & 1).astype(bool)] = 0
    return labels, best_cost


def _restricted_growth(n: int, k: int):
    """All labelings of n items into exactly k nonempty unlabeled blocks."""
    a = [0] * n

    def rec(i, used):
        if i == n:
            if used == k:
                yield list(a)
            return
        if n - i < k - used:
            return
        for v in range(min(used + 1, k)):
            a[i] = v
            yield from rec(i + 1, max(used, v + 1))

    yield from rec(1, 1) if n else iter(())


def brute_force_kmeans(S, k: int):
    """Exact k-means optimum by enumerating partitions; returns ``(labels, total_cost)``.

    The cost is the total (not per point) pairwise form.  ``k = 2`` is allowed
    up to 24 points; other ``k`` up to 12.
    """
    X = as_points(S)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise InvalidParam("need 1 <= k <= n")
    if k == n:
        return np.arange(n), 0.0
    if k == 1:
        labels = np.zeros(n, dtype=int)
        return labels, pairwise_cost(X, labels)
    if k == 2:
        if n > BRUTE_K2_MAX_N:
            raise TooLarge(f"k=2 enumeration is capped at n <= {BRUTE_K2_MAX_N}")
        return _brute_k2(X)
    if n > BRUTE_GENERAL_MAX_N:
        raise TooLarge(f"partition enumeration is capped at n <= {BRUTE_GENERAL_MAX_N}")
    best, best_labels = np.inf, None
    for labels in _restricted_growth(n, k):
        lab = np.asarray(labels)
        cost = pairwise_cost(X, lab)
        if cost < best:
            best, best_labels = cost, lab
    return best_labels, best


# --- error vs k ---------------------------------------------------------------

@dataclass(frozen=True)
class ErrorCurve:
    points: tuple
    slope_estimate: float
    per_tree: tuple

    @property
    def ks(self) -> np.ndarray:
        return np.array([k for k, _ in self.points])

    @property
    def errors(self) -> np.ndarray:
        return np.array([e for _, e in self.points])


def fit_slope(ks, errors) -> float:
    """OLS slope of log2(error) against log2(k), ignoring errors below the float floor."""
    ks, errors = np.asarray(ks, dtype=float), np.asarray(errors, dtype=float)
    keep = errors >= SLOPE_ERROR_FLOOR
    if keep.sum() < 2:
        return float("nan")
    x, y = np.log2(ks[keep]), np.log2(errors[keep])
    return float(np.polyfit(x, y, 1)[0])


def error_vs_k(S, levels: int, trees_per_point: int = 8, params: Optional[TreeParams] = None,
               seed: int = 0) -> ErrorCurve:
    """Training error of depth-L truncations for L = 1..levels, averaged over trees.

    Tree ``t`` draws its randomness from stream ``(t,)`` under ``seed``.
    ``per_tree`` holds each tree's ``(k, error)`` list for L = 0..levels.
    """
    if levels < 1:
        raise InvalidParam("levels must be >= 1")
    if trees_per_point < 1:
        raise InvalidParam("trees_per_point must be >= 1")
    X = as_points(S)
    params = params or TreeParams()
    params = replace(params, max_levels=levels, seed=seed, retain_stats=False)
    per_tree = []
    for t in range(trees_per_point):
        tree = make_tree(X, replace(params, stream=tuple(params.stream) + (t,)))
        per_tree.append(tuple((len(tree.frontier(L)), tree.training_error(L)) for L in range(levels + 1)))
    ks = np.array([[row[L][0] for row in per_tree] for L in range(1, levels + 1)], dtype=float).mean(axis=1)
    errs = np.array([[row[L][1] for row in per_tree] for L in range(1, levels + 1)]).mean(axis=1)
    points = tuple((float(k), float(e)) for k, e in zip(ks, errs))
    return ErrorCurve(points, fit_slope(ks, errs), tuple(per_tree))
