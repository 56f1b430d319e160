"""Random directions, 1-d projections, and Monte-Carlo checks of projection tail bounds.

Every ``*_tails`` / ``*_fraction`` / ``*_bound`` routine samples fresh Gaussian
directions ``U ~ N(0, I/D)`` and reports empirical frequencies along with the
analytic bound they are meant to respect.  ``stderr`` fields are binomial
standard errors of the empirical frequency, so ``estimate <= bound + 3 * stderr``
is the intended pass condition.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidParam,
    NonOrthonormalBasis,
    NotApplicable,
    NotPSD,
    ZeroVector,
)
from .geometry_stats import TOL_EIG, as_points

SCALAR_TRIALS = 100_000
SET_TRIALS = 1_000
_CHUNK = 1 << 14


@dataclass(frozen=True)
class RngSeed:
    """A seed plus a stream path; child ``i`` of a stream extends the path by ``i``."""

    seed: int
    path: tuple = ()

    def child(self, i: int) -> "RngSeed":
        return RngSeed(self.seed, self.path + (int(i),))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=tuple(self.path))
        return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngSeed):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class Direction:
    vector: np.ndarray
    kind: str = "gaussian"


def sample_direction(D: int, kind: str = "gaussian", rng=None) -> Direction:
    """Gaussian ``N(0, I/D)`` or uniform unit-sphere direction in ``R^D``."""
    if D < 1:
        raise InvalidParam("dimension must be >= 1")
    gen = as_generator(rng)
    v = gen.standard_normal(D)
    if kind == "gaussian":
        return Direction(v / math.sqrt(D), kind)
    if kind == "unit-sphere":
        norm = np.linalg.norm(v)
        while norm == 0.0:
            v = gen.standard_normal(D)
            norm = np.linalg.norm(v)
        return Direction(v / norm, kind)
    raise InvalidParam(f"unknown direction kind {kind!r}")


def project_rows(X: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``X @ v`` with each row reduced on its own (batch-independent rounding)."""
    return np.sum(X * v, axis=1)


@dataclass(frozen=True)
class ProjectedSet:
    values: np.ndarray
    direction: Direction


def project(S, U) -> ProjectedSet:
    X = as_points(S)
    d = U if isinstance(U, Direction) else Direction(np.asarray(U, dtype=float).reshape(-1), "raw")
    if d.vector.shape[0] != X.shape[1]:
        raise DimensionMismatch(f"direction has dim {d.vector.shape[0]}, points have {X.shape[1]}")
    return ProjectedSet(project_rows(X, d.vector), d)


def binomial_stderr(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / trials)


def _gaussian_batches(D: int, trials: int, gen: np.random.Generator):
    scale = 1.0 / math.sqrt(D)
    done = 0
    while done < trials:
        b = min(_CHUNK, trials - done)
        yield gen.standard_normal((b, D)) * scale
        done += b


@dataclass(frozen=True)
class TailCheck:
    estimate: float
    bound: float
    stderr: float

    @property
    def holds(self) -> bool:
        return self.estimate <= self.bound + 3.0 * self.stderr


def length_tail_probabilities(x, alpha: float, beta: float, trials: int = SCALAR_TRIALS, rng=None):
    """Empirical ``P[|U.x| <= alpha ||x||/sqrt(D)]`` and ``P[|U.x| >= beta ||x||/sqrt(D)]``.

    Returns ``(small, large)`` as :class:`TailCheck` with bounds
    ``sqrt(2/pi) * alpha`` and ``(2/beta) exp(-beta^2/2)``.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        raise ZeroVector("x must be nonzero")
    if trials < 1:
        raise InvalidParam("trials must be >= 1")
    D = x.shape[0]
    gen = as_generator(rng)
    lo = alpha * norm / math.sqrt(D)
    hi = beta * norm / math.sqrt(D)
    n_small = n_large = 0
    for U in _gaussian_batches(D, trials, gen):
        p = np.abs(U @ x)
        n_small += int(np.count_nonzero(p <= lo)) if alpha > 0 else 0
        n_large += int(np.count_nonzero(p >= hi))
    ps, pl = n_small / trials, n_large / trials
    small = TailCheck(ps, math.sqrt(2.0 / math.pi) * alpha, binomial_stderr(ps, trials))
    large = TailCheck(pl, (2.0 / beta) * math.exp(-beta * beta / 2.0), binomial_stderr(pl, trials))
    return small, large


def _radius_about(X: np.ndarray, x0: np.ndarray) -> float:
    return float(np.sqrt(np.max(np.sum((X - x0) ** 2, axis=1))))


def _projection_batches(X: np.ndarray, trials: int, gen: np.random.Generator):
    """Yield ``(U, X @ U.T)`` blocks of Gaussian directions."""
    D = X.shape[1]
    step = max(1, min(_CHUNK, (1 << 22) // max(X.shape[0], 1)))
    done = 0
    while done < trials:
        b = min(step, trials - done)
        U = gen.standard_normal((b, D)) / math.sqrt(D)
        yield U, X @ U.T
        done += b


def central_interval_fraction(S, x0, delta: float, eps: float, trials: int = SET_TRIALS, rng=None) -> TailCheck:
    """How often more than an ``eps`` fraction of ``U.S`` lands far from ``U.x0``.

    "Far" means beyond ``sqrt(2 ln(1/(delta*eps))) * Delta/sqrt(D)`` where
    ``Delta`` is the radius of ``S`` about ``x0``.  The bound is ``delta``.
    """
    X = as_points(S)
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if not (0 < delta <= 1 and 0 < eps <= 1) or delta * eps > math.exp(-2):
        raise InvalidParam("need 0 < delta, eps <= 1 and delta*eps <= 1/e^2")
    D = X.shape[1]
    radius = _radius_about(X, x0)
    width = math.sqrt(2.0 * math.log(1.0 / (delta * eps))) * radius / math.sqrt(D)
    gen = as_generator(rng)
    Y = X - x0
    failures = 0
    for _, P in _projection_batches(Y, trials, gen):
        far = np.mean(np.abs(P) > width, axis=0) if width > 0 else np.zeros(P.shape[1])
        failures += int(np.count_nonzero(far > eps))
    rate = failures / trials
    return TailCheck(rate, delta, binomial_stderr(rate, trials))


def median_deviation(S, x0, delta: float, trials: int = SET_TRIALS, rng=None) -> TailCheck:
    """How often ``|median(U.S) - U.x0|`` exceeds ``(Delta/sqrt(D)) sqrt(2 ln(2/delta))``.

    Uses the lower median.  The bound on the failure frequency is ``delta``.
    """
    X = as_points(S)
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if not 0 < delta < 2 * math.exp(-2):
        raise InvalidParam("need 0 < delta < 2/e^2")
    D = X.shape[1]
    radius = _radius_about(X, x0)
    width = radius / math.sqrt(D) * math.sqrt(2.0 * math.log(2.0 / delta))
    k = (X.shape[0] + 1) // 2 - 1
    gen = as_generator(rng)
    failures = 0
    for _, P in _projection_batches(X - x0, trials, gen):
        med = np.partition(P, k, axis=0)[k]
        failures += int(np.count_nonzero(np.abs(med) > width))
    rate = failures / trials
    return TailCheck(rate, delta, binomial_stderr(rate, trials))


@dataclass(frozen=True)
class ShrinkageResult:
    sup: np.ndarray
    probe_max: np.ndarray
    quantile: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.quantile <= self.bound


def subspace_max_shrinkage(H, delta: float, rng=None, probes: int = 16, draws: int = SET_TRIALS,
                           kappa: float = 8.0) -> ShrinkageResult:
    """Largest squared shrinkage ``|x.U|^2 / ||x||^2`` over a subspace, per draw of ``U``.

    ``H`` is a ``D x d`` matrix with orthonormal columns.  The supremum over
    ``span(H)`` is attained at the normalized projection of ``U`` onto the
    subspace, so it equals ``||H^T U||^2`` exactly.  ``probe_max`` is the best of
    ``probes`` random unit vectors of the subspace and never exceeds ``sup``.
    ``quantile`` is the empirical ``(1 - delta)`` quantile of ``sup`` and
    ``bound`` is ``kappa * (d + ln(1/delta)) / D``.
    """
    H = np.asarray(H, dtype=float)
    if H.ndim == 1:
        H = H.reshape(-1, 1)
    D, d = H.shape
    if np.max(np.abs(H.T @ H - np.eye(d))) > 1e-9:
        raise NonOrthonormalBasis("columns of H are not orthonormal")
    if probes < 1:
        raise InvalidParam("probes must be >= 1")
    gen = as_generator(rng)
    sup = np.empty(draws)
    probe_max = np.empty(draws)
    for t in range(draws):
        U = gen.standard_normal(D) / math.sqrt(D)
        coords = H.T @ U
        sup[t] = float(coords @ coords)
        W = gen.standard_normal((probes, d))
        W /= np.linalg.norm(W, axis=1, keepdims=True)
        probe_max[t] = float(np.max((W @ coords) ** 2))
    q = float(np.quantile(sup, 1.0 - delta))
    return ShrinkageResult(sup, probe_max, q, kappa * (d + math.log(1.0 / delta)) / D)


def quadratic_form_tails(A, alpha: float, beta: float, trials: int = SCALAR_TRIALS, rng=None):
    """Empirical lower/upper tails of ``U^T A U`` relative to its mean ``trace(A)/n``.

    Returns ``(low, high)`` with bounds ``exp(-(1/2 - alpha)/2)`` and
    ``exp(-(beta - 2)/4)``.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidParam("A must be square")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise NotPSD("A is not symmetric")
    n = A.shape[0]
    ev = np.linalg.eigvalsh(A)
    tr = float(np.trace(A))
    if ev.min() < -TOL_EIG * max(abs(tr), 1.0):
        raise NotPSD(f"A has eigenvalue {ev.min():.3g}")
    if tr <= 0.0:
        raise NotApplicable("A has zero trace")
    gen = as_generator(rng)
    expected = tr / n
    n_low = n_high = 0
    for U in _gaussian_batches(n, trials, gen):
        q = np.einsum("ij,jk,ik->i", U, A, U)
        n_low += int(np.count_nonzero(q < alpha * expected))
        n_high += int(np.count_nonzero(q > beta * expected))
    pl, ph = n_low / trials, n_high / trials
    low = TailCheck(pl, math.exp(-(0.5 - alpha) / 2.0), binomial_stderr(pl, trials))
    high = TailCheck(ph, math.exp(-(beta - 2.0) / 4.0), binomial_stderr(ph, trials))
    return low, high


@dataclass(frozen=True)
class ProjectedDiameterCheck:
    success_rate: float
    success_stderr: float
    mean_ratio: float
    ratio_stderr: float
    ratios: np.ndarray = field(repr=False)

    @property
    def holds(self) -> bool:
        return self.success_rate >= 0.1 - 3.0 * self.success_stderr


def projected_avg_diameter_bound(S, trials: int = SET_TRIALS, rng=None) -> ProjectedDiameterCheck:
    """Frequency of ``Delta_A^2(S.U) >= Delta_A^2(S) / (4D)`` and the mean of ``D Delta_A^2(S.U) / Delta_A^2(S)``.

    The second quantity has expectation exactly 1.  Sets with zero average
    diameter satisfy the inequality for every ``U`` and report ratio 1.
    """
    X = as_points(S)
    n, D = X.shape
    if n < 2:
        raise InvalidParam("need at least two points")
    Y = X - X.mean(axis=0)
    da2 = 2.0 * float(np.mean(np.sum(Y * Y, axis=1)))
    gen = as_generator(rng)
    if da2 == 0.0:
        return ProjectedDiameterCheck(1.0, 0.0, 1.0, 0.0, np.ones(trials))
    ratios = np.empty(trials)
    done = 0
    for _, P in _projection_batches(Y, trials, gen):
        # Y is centered, so 2 * mean(P^2) is the projected average squared diameter.
        proj = 2.0 * np.mean(P * P, axis=0)
        ratios[done:done + proj.shape[0]] = proj * D / da2
        done += proj.shape[0]
    rate = float(np.mean(ratios >= 0.25))
    return ProjectedDiameterCheck(
        rate,
        binomial_stderr(rate, trials),
        float(ratios.mean()),
        float(ratios.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0,
        ratios,
    )


@dataclass(frozen=True)
class TailProfile:
    ks: np.ndarray
    bounds: np.ndarray
    exceedance: np.ndarray
    overall: TailCheck


def tail_fraction_profile(S, delta: float, K: int = 6, trials: int = SET_TRIALS, rng=None) -> TailProfile:
    """Per-``k`` frequency that the fraction of ``|U.S| >= k Delta/sqrt(D)`` exceeds ``(2^k/delta) e^{-k^2/2}``.

    ``S`` is first translated to its mean and ``Delta`` is its radius about
    the origin.  ``overall`` counts draws of ``U`` failing for any ``k`` and is
    bounded by ``delta``.
    """
    X = as_points(S)
    D = X.shape[1]
    Y = X - X.mean(axis=0)
    radius = _radius_about(Y, np.zeros(D))
    ks = np.arange(1, K + 1)
    bounds = np.array([(2.0**k / delta) * math.exp(-k * k / 2.0) for k in ks])
    gen = as_generator(rng)
    per_k = np.zeros(K, dtype=int)
    any_fail = 0
    for _, P in _projection_batches(Y, trials, gen):
        A = np.abs(P)
        fails = np.zeros((K, P.shape[1]), dtype=bool)
        for j, k in enumerate(ks):
            edge = k * radius / math.sqrt(D)
            frac = np.mean(A >= edge, axis=0) if radius > 0 else np.zeros(P.shape[1])
            fails[j] = frac > bounds[j]
        per_k += fails.sum(axis=1)
        any_fail += int(np.count_nonzero(fails.any(axis=0)))
    rate = any_fail / trials
    return TailProfile(ks, bounds, per_k / trials, TailCheck(rate, delta, binomial_stderr(rate, trials)))
