"""Random projection trees.

A cell is split at the median of its projection on a random direction, unless
its squared diameter exceeds ``c`` times its average squared diameter, in which
case it is split at the median distance from its mean.  Leaves carry the mean
of their training points as codeword.

Randomness is keyed by node position: the node reached by the left/right path
``p`` draws its direction from ``RngSeed(seed, stream + (0,) + p)``, so a tree
is a pure function of (points, params) no matter how subtrees are scheduled.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .errors import CorruptInput, DegenerateCell, DimensionMismatch, EmptySet, InvalidParam, SchemaMismatch
from .geometry_stats import as_points, diameter, sq_dist_to
from .random_projection import RngSeed, project_rows, sample_direction

SCHEMA = "rpquant-tree"
SCHEMA_VERSION = 1


# --- rules -----------------------------------------------------------------

@dataclass(frozen=True)
class ProjectionRule:
    direction: np.ndarray
    threshold: float

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        return project_rows(X, self.direction) <= self.threshold


@dataclass(frozen=True)
class DistanceRule:
    center: np.ndarray
    radius_threshold: float

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        return np.sqrt(sq_dist_to(X, self.center)) <= self.radius_threshold


@dataclass(frozen=True)
class ProjectedDistanceRule:
    """Distance from the projected cell mean, measured along a shared level direction."""

    direction: np.ndarray
    center_value: float
    radius_threshold: float

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        return np.abs(project_rows(X, self.direction) - self.center_value) <= self.radius_threshold


SplitRule = Union[ProjectionRule, DistanceRule, ProjectedDistanceRule]


# --- nodes -----------------------------------------------------------------

@dataclass(frozen=True)
class CellStats:
    n_cell: int
    delta_sq: float
    delta_exact: bool
    delta_a_sq: float
    mean: np.ndarray
    radius: float


@dataclass(frozen=True)
class SplitOutcome:
    split_kind: str
    p: float
    n_left: int
    n_right: int
    parent_delta_a_sq: float
    parent_delta_sq: float
    child_delta_a_sq: tuple
    child_delta_sq: tuple
    diameters_exact: bool
    mu1: np.ndarray
    mu2: np.ndarray
    proj_mu1: Optional[float]
    proj_mu2: Optional[float]
    decrease: float


@dataclass
class Leaf:
    codeword: np.ndarray
    count: int
    depth: int
    sse: float
    reason: str
    stats: Optional[CellStats] = None
    leaf_id: int = -1

    @property
    def mean(self) -> np.ndarray:
        return self.codeword


@dataclass
class Internal:
    rule: SplitRule
    left: "Node"
    right: "Node"
    count: int
    mean: np.ndarray
    depth: int
    sse: float
    stats: Optional[CellStats] = None
    outcome: Optional[SplitOutcome] = None


Node = Union[Leaf, Internal]


@dataclass(frozen=True)
class TreeParams:
    c: float = 10.0
    min_size: int = 10
    max_levels: Optional[int] = None
    shared_per_level: bool = False
    seed: int = 0
    stream: tuple = ()
    threshold: str = "median"
    direction_kind: str = "gaussian"
    diameter_mode: str = "auto"
    retain_stats: bool = True
    n_jobs: int = 1

    def validate(self) -> None:
        if not self.c > 4:
            raise InvalidParam("c must exceed 4")
        if self.min_size < 1:
            raise InvalidParam("min_size must be >= 1")
        if self.max_levels is not None and self.max_levels < 0:
            raise InvalidParam("max_levels must be >= 0")
        if self.threshold not in ("median", "mean"):
            raise InvalidParam(f"unknown threshold {self.threshold!r}")
        if self.direction_kind not in ("gaussian", "unit-sphere"):
            raise InvalidParam(f"unknown direction kind {self.direction_kind!r}")
        if self.diameter_mode not in ("auto", "exact", "approx"):
            raise InvalidParam(f"unknown diameter mode {self.diameter_mode!r}")

    def resolved_levels(self, n: int) -> int:
        if self.max_levels is not None:
            return int(self.max_levels)
        return max(0, math.ceil(math.log2(n / self.min_size))) if n > self.min_size else 0


@dataclass
class RpTree:
    root: Node
    params: TreeParams
    dim: int
    n_train: int
    level_directions: Optional[list] = None
    leaves: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if not self.leaves:
            self.leaves = _number_leaves(self.root)

    @property
    def n_leaves(self) -> int:
        return len(self.leaves)

    @property
    def depth(self) -> int:
        return max(leaf.depth for leaf in self.leaves)

    def codebook(self) -> np.ndarray:
        return np.array([leaf.codeword for leaf in self.leaves])

    def internal_nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Internal):
                yield node
                stack.append(node.right)
                stack.append(node.left)

    def frontier(self, level: int) -> list:
        """Nodes that act as leaves once the tree is cut at depth ``level``."""
        out, stack = [], [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Leaf) or node.depth >= level:
                out.append(node)
            else:
                stack.append(node.right)
                stack.append(node.left)
        return out

    def training_error(self, level: Optional[int] = None) -> float:
        """Mean squared distance of training points to their cell mean at a depth cut."""
        nodes = self.leaves if level is None else self.frontier(level)
        return sum(node.sse for node in nodes) / self.n_train


def _number_leaves(root: Node) -> list:
    leaves, stack = [], [root]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf):
            node.leaf_id = len(leaves)
            leaves.append(node)
        else:
            stack.append(node.right)
            stack.append(node.left)
    return leaves


# --- splitting -------------------------------------------------------------

def _lower_median(values: np.ndarray) -> float:
    k = (values.shape[0] + 1) // 2 - 1
    return float(np.partition(values, k)[k])


def cell_stats(X: np.ndarray, diameter_mode: str = "auto") -> CellStats:
    mu = X.mean(axis=0)
    sq = sq_dist_to(X, mu)
    diam, exact = diameter(X, diameter_mode)
    return CellStats(X.shape[0], diam * diam, exact, 2.0 * float(sq.mean()), mu, float(np.sqrt(sq.max())))


def _split_cell(X, stats: CellStats, params: TreeParams, gen, level_direction=None):
    """Pick a rule for one cell; returns ``(rule, mask)`` with ``mask`` routing left."""
    if stats.delta_sq == 0.0:
        raise DegenerateCell("all points coincide")
    by_projection = stats.delta_sq <= params.c * stats.delta_a_sq
    if by_projection:
        if level_direction is not None:
            v = level_direction
        else:
            v = sample_direction(X.shape[1], params.direction_kind, gen).vector
        proj = project_rows(X, v)
        thr = _lower_median(proj) if params.threshold == "median" else float(proj.mean())
        mask = proj <= thr
        if not mask.all():
            return ProjectionRule(v, thr), mask
        # Every projection ties with the threshold: fall back to a distance split.
    if level_direction is not None:
        center_value = float(project_rows(stats.mean[None, :], level_direction)[0])
        dist = np.abs(project_rows(X, level_direction) - center_value)
        thr = _lower_median(dist)
        rule = ProjectedDistanceRule(level_direction, center_value, thr)
    else:
        dist = np.sqrt(sq_dist_to(X, stats.mean))
        thr = _lower_median(dist)
        rule = DistanceRule(stats.mean, thr)
    mask = dist <= thr
    if mask.all():
        raise DegenerateCell("no rule separates the cell")
    return rule, mask


def _outcome(rule, X, mask, parent: CellStats, left: CellStats, right: CellStats) -> SplitOutcome:
    n1, n2 = left.n_cell, right.n_cell
    p = n1 / (n1 + n2)
    gap = left.mean - right.mean
    proj1 = proj2 = None
    if isinstance(rule, ProjectionRule):
        proj = project_rows(X, rule.direction)
        proj1, proj2 = float(proj[mask].mean()), float(proj[~mask].mean())
    return SplitOutcome(
        split_kind="projection" if isinstance(rule, ProjectionRule) else "distance",
        p=p,
        n_left=n1,
        n_right=n2,
        parent_delta_a_sq=parent.delta_a_sq,
        parent_delta_sq=parent.delta_sq,
        child_delta_a_sq=(left.delta_a_sq, right.delta_a_sq),
        child_delta_sq=(left.delta_sq, right.delta_sq),
        diameters_exact=parent.delta_exact and left.delta_exact and right.delta_exact,
        mu1=left.mean,
        mu2=right.mean,
        proj_mu1=proj1,
        proj_mu2=proj2,
        decrease=2.0 * p * (1.0 - p) * float(gap @ gap),
    )


def choose_rule(S, c: float = 10.0, rng=None, **options):
    """Split one cell; returns ``(rule, outcome)``.

    ``options`` are any :class:`TreeParams` fields (``threshold``,
    ``direction_kind``, ``diameter_mode``).  Raises :class:`DegenerateCell`
    when the points cannot be separated.
    """
    X = as_points(S)
    if X.shape[0] < 2:
        raise InvalidParam("need at least two points to split")
    params = TreeParams(c=c, **options)
    params.validate()
    gen = rng if isinstance(rng, np.random.Generator) else (
        rng.generator() if isinstance(rng, RngSeed) else np.random.default_rng(rng))
    stats = cell_stats(X, params.diameter_mode)
    rule, mask = _split_cell(X, stats, params, gen)
    left = cell_stats(X[mask], params.diameter_mode)
    right = cell_stats(X[~mask], params.diameter_mode)
    return rule, _outcome(rule, X, mask, stats, left, right)


# --- building --------------------------------------------------------------

class _Builder:
    def __init__(self, X, params: TreeParams, max_levels: int):
        self.X = X
        self.params = params
        self.max_levels = max_levels
        self.node_base = tuple(params.stream) + (0,)
        self.level_directions = None
        if params.shared_per_level:
            self.level_directions = [
                sample_direction(X.shape[1], params.direction_kind,
                                 RngSeed(params.seed, tuple(params.stream) + (1, level))).vector
                for level in range(max_levels)
            ]
        self.pool = None
        self.par_depth = 0

    def leaf(self, X, depth, stats, reason):
        mu = stats.mean
        sse = 0.5 * stats.delta_a_sq * X.shape[0]
        return Leaf(mu, X.shape[0], depth, sse, reason, stats if self.params.retain_stats else None)

    def build(self, idx, depth, path, stats):
        X = self.X[idx]
        params = self.params
        if X.shape[0] < params.min_size:
            return self.leaf(X, depth, stats, "small")
        if depth >= self.max_levels:
            return self.leaf(X, depth, stats, "depth")
        gen = RngSeed(params.seed, self.node_base + path).generator()
        level_dir = self.level_directions[depth] if self.level_directions is not None else None
        try:
            rule, mask = _split_cell(X, stats, params, gen, level_dir)
        except DegenerateCell:
            return self.leaf(X, depth, stats, "degenerate")
        ls = cell_stats(X[mask], params.diameter_mode)
        rs = cell_stats(X[~mask], params.diameter_mode)
        outcome = _outcome(rule, X, mask, stats, ls, rs) if params.retain_stats else None
        li, ri = idx[mask], idx[~mask]
        if self.pool is not None and depth < self.par_depth:
            fut = self.pool.submit(self.build, ri, depth + 1, path + (1,), rs)
            left = self.build(li, depth + 1, path + (0,), ls)
            right = fut.result()
        else:
            left = self.build(li, depth + 1, path + (0,), ls)
            right = self.build(ri, depth + 1, path + (1,), rs)
        return Internal(
            rule, left, right, X.shape[0], stats.mean, depth,
            0.5 * stats.delta_a_sq * X.shape[0],
            stats if params.retain_stats else None, outcome,
        )


def make_tree(S, params: Optional[TreeParams] = None, **overrides) -> RpTree:
    """Build an RP tree over ``S``.  Keyword overrides replace fields of ``params``."""
    X = as_points(S)
    params = replace(params or TreeParams(), **overrides)
    params.validate()
    levels = params.resolved_levels(X.shape[0])
    params = replace(params, max_levels=levels)
    builder = _Builder(X, params, levels)
    root_stats = cell_stats(X, params.diameter_mode)
    idx = np.arange(X.shape[0])
    if params.n_jobs > 1:
        # 2^k - 1 submitted subtrees never exceed the worker count, so no task
        # waits on a queued one.
        builder.par_depth = int(math.floor(math.log2(params.n_jobs + 1)))
        with ThreadPoolExecutor(max_workers=params.n_jobs) as pool:
            builder.pool = pool
            root = builder.build(idx, 0, (), root_stats)
    else:
        root = builder.build(idx, 0, (), root_stats)
    return RpTree(root, params, X.shape[1], X.shape[0], builder.level_directions)


# --- routing and evaluation ------------------------------------------------

def route(tree: RpTree, x):
    """Leaf id and codeword for a single point."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != tree.dim:
        raise DimensionMismatch(f"point has dim {x.shape[0]}, tree has {tree.dim}")
    row = x[None, :]
    node = tree.root
    while isinstance(node, Internal):
        node = node.left if node.rule.evaluate(row)[0] else node.right
    return node.leaf_id, node.codeword


def route_many(tree: RpTree, S) -> np.ndarray:
    """Leaf id for every row of ``S``."""
    X = as_points(S)
    if X.shape[1] != tree.dim:
        raise DimensionMismatch(f"points have dim {X.shape[1]}, tree has {tree.dim}")
    out = np.empty(X.shape[0], dtype=int)
    stack = [(tree.root, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if isinstance(node, Leaf):
            out[idx] = node.leaf_id
            continue
        if idx.size == 0:
            continue
        mask = node.rule.evaluate(X[idx])
        stack.append((node.left, idx[mask]))
        stack.append((node.right, idx[~mask]))
    return out


def encode(tree: RpTree, S) -> np.ndarray:
    return route_many(tree, S)


def quantization_error(tree: RpTree, S) -> float:
    """Mean squared distance from each point to the codeword of the leaf it routes to."""
    X = as_points(S)
    ids = route_many(tree, X)
    codes = tree.codebook()[ids]
    return float(np.mean(np.sum((X - codes) ** 2, axis=1)))


def truncate(tree: RpTree, level: int) -> RpTree:
    """Copy of ``tree`` with every node at depth ``level`` turned into a leaf."""

    def cut(node):
        if isinstance(node, Leaf):
            return replace(node, leaf_id=-1)
        if node.depth >= level:
            return Leaf(node.mean, node.count, node.depth, node.sse, "depth", node.stats)
        return replace(node, left=cut(node.left), right=cut(node.right))

    return RpTree(cut(tree.root), replace(tree.params, max_levels=min(level, tree.params.max_levels)),
                  tree.dim, tree.n_train, tree.level_directions)


@dataclass(frozen=True)
class SplitCheck:
    depth: int
    outcome: SplitOutcome
    decrease_lhs: float
    decrease_rhs: float
    decrease_ok: bool
    distance_bound_lhs: Optional[float]
    distance_bound_rhs: Optional[float]
    distance_bound_ok: Optional[bool]
    diameter_monotone_ok: Optional[bool]
    relative_decrease: float


def split_quality_report(tree: RpTree, rtol: float = 1e-9) -> list:
    """Per-split checks of the average-diameter decrease identity and the distance-split bound.

    For distance splits with exact diameters, ``distance_bound_*`` compares the
    size-weighted child squared diameters to ``(1/2 + 2/c)`` times the parent's.
    """
    c = tree.params.c
    checks = []
    for node in tree.internal_nodes():
        o = node.outcome
        if o is None:
            raise InvalidParam("tree was built without retained statistics")
        p = o.p
        lhs = o.parent_delta_a_sq - p * o.child_delta_a_sq[0] - (1 - p) * o.child_delta_a_sq[1]
        rhs = o.decrease
        scale = max(abs(lhs), abs(rhs), o.parent_delta_a_sq * 1e-6, np.finfo(float).tiny)
        ok3 = abs(lhs - rhs) <= rtol * scale
        d_lhs = d_rhs = d_ok = mono = None
        if o.diameters_exact:
            w = p * math.sqrt(o.child_delta_sq[0]) + (1 - p) * math.sqrt(o.child_delta_sq[1])
            mono = w <= math.sqrt(o.parent_delta_sq) * (1 + 1e-12)
            if o.split_kind == "distance" and isinstance(node.rule, DistanceRule):
                d_lhs = p * o.child_delta_sq[0] + (1 - p) * o.child_delta_sq[1]
                d_rhs = (0.5 + 2.0 / c) * o.parent_delta_sq
                d_ok = d_lhs <= d_rhs * (1 + 1e-12)
        rel = o.decrease / o.parent_delta_a_sq if o.parent_delta_a_sq > 0 else 0.0
        checks.append(SplitCheck(node.depth, o, lhs, rhs, ok3, d_lhs, d_rhs, d_ok, mono, rel))
    return checks


# --- serialization ---------------------------------------------------------

def _f(x) -> float:
    return float(x)


def _vec(v) -> list:
    return [float(a) for a in np.asarray(v, dtype=float)]


def _rule_to_dict(rule: SplitRule) -> dict:
    if isinstance(rule, ProjectionRule):
        return {"type": "projection", "direction": _vec(rule.direction), "threshold": _f(rule.threshold)}
    if isinstance(rule, DistanceRule):
        return {"type": "distance", "center": _vec(rule.center), "radius_threshold": _f(rule.radius_threshold)}
    return {"type": "projected_distance", "direction": _vec(rule.direction),
            "center_value": _f(rule.center_value), "radius_threshold": _f(rule.radius_threshold)}


def _stats_to_dict(s: Optional[CellStats]):
    if s is None:
        return None
    return {"n_cell": s.n_cell, "delta_sq": _f(s.delta_sq), "delta_exact": s.delta_exact,
            "delta_a_sq": _f(s.delta_a_sq), "mean": _vec(s.mean), "radius": _f(s.radius)}


def _outcome_to_dict(o: Optional[SplitOutcome]):
    if o is None:
        return None
    return {
        "split_kind": o.split_kind, "p": _f(o.p), "n_left": o.n_left, "n_right": o.n_right,
        "parent_delta_a_sq": _f(o.parent_delta_a_sq), "parent_delta_sq": _f(o.parent_delta_sq),
        "child_delta_a_sq": [_f(v) for v in o.child_delta_a_sq],
        "child_delta_sq": [_f(v) for v in o.child_delta_sq],
        "diameters_exact": o.diameters_exact, "mu1": _vec(o.mu1), "mu2": _vec(o.mu2),
        "proj_mu1": None if o.proj_mu1 is None else _f(o.proj_mu1),
        "proj_mu2": None if o.proj_mu2 is None else _f(o.proj_mu2),
        "decrease": _f(o.decrease),
    }


def _node_to_dict(node: Node) -> dict:
    if isinstance(node, Leaf):
        return {"kind": "leaf", "depth": node.depth, "count": node.count, "codeword": _vec(node.codeword),
                "sse": _f(node.sse), "reason": node.reason, "stats": _stats_to_dict(node.stats)}
    return {"kind": "internal", "depth": node.depth, "count": node.count, "mean": _vec(node.mean),
            "sse": _f(node.sse), "rule": _rule_to_dict(node.rule), "stats": _stats_to_dict(node.stats),
            "outcome": _outcome_to_dict(node.outcome),
            "children": [_node_to_dict(node.left), _node_to_dict(node.right)]}


def tree_to_dict(tree: RpTree) -> dict:
    p = tree.params
    return {
        "schema": SCHEMA,
        "version": SCHEMA_VERSION,
        "dim": tree.dim,
        "n_train": tree.n_train,
        "params": {"c": _f(p.c), "min_size": p.min_size, "max_levels": p.max_levels,
                   "shared_per_level": p.shared_per_level, "seed": p.seed, "stream": list(p.stream),
                   "threshold": p.threshold, "direction_kind": p.direction_kind,
                   "diameter_mode": p.diameter_mode, "retain_stats": p.retain_stats},
        "level_directions": None if tree.level_directions is None else [_vec(v) for v in tree.level_directions],
        "root": _node_to_dict(tree.root),
    }


def serialize(tree: RpTree) -> bytes:
    text = json.dumps(tree_to_dict(tree), sort_keys=True, separators=(",", ":"), allow_nan=False)
    return (text + "\n").encode("utf-8")


def _arr(v) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.ndim != 1:
        raise CorruptInput("expected a flat number list")
    return a


def _rule_from_dict(d) -> SplitRule:
    t = d["type"]
    if t == "projection":
        return ProjectionRule(_arr(d["direction"]), float(d["threshold"]))
    if t == "distance":
        return DistanceRule(_arr(d["center"]), float(d["radius_threshold"]))
    if t == "projected_distance":
        return ProjectedDistanceRule(_arr(d["direction"]), float(d["center_value"]), float(d["radius_threshold"]))
    raise CorruptInput(f"unknown rule type {t!r}")


def _stats_from_dict(d):
    if d is None:
        return None
    return CellStats(int(d["n_cell"]), float(d["delta_sq"]), bool(d["delta_exact"]),
                     float(d["delta_a_sq"]), _arr(d["mean"]), float(d["radius"]))


def _outcome_from_dict(d):
    if d is None:
        return None
    return SplitOutcome(
        d["split_kind"], float(d["p"]), int(d["n_left"]), int(d["n_right"]),
        float(d["parent_delta_a_sq"]), float(d["parent_delta_sq"]),
        tuple(float(v) for v in d["child_delta_a_sq"]), tuple(float(v) for v in d["child_delta_sq"]),
        bool(d["diameters_exact"]), _arr(d["mu1"]), _arr(d["mu2"]),
        None if d["proj_mu1"] is None else float(d["proj_mu1"]),
        None if d["proj_mu2"] is None else float(d["proj_mu2"]),
        float(d["decrease"]),
    )


def _node_from_dict(d) -> Node:
    kind = d["kind"]
    if kind == "leaf":
        return Leaf(_arr(d["codeword"]), int(d["count"]), int(d["depth"]), float(d["sse"]),
                    str(d["reason"]), _stats_from_dict(d["stats"]))
    if kind == "internal":
        left, right = d["children"]
        return Internal(_rule_from_dict(d["rule"]), _node_from_dict(left), _node_from_dict(right),
                        int(d["count"]), _arr(d["mean"]), int(d["depth"]), float(d["sse"]),
                        _stats_from_dict(d["stats"]), _outcome_from_dict(d["outcome"]))
    raise CorruptInput(f"unknown node kind {kind!r}")


def tree_from_dict(doc: dict) -> RpTree:
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise SchemaMismatch("not an rpquant tree document")
    if doc.get("version") != SCHEMA_VERSION:
        raise SchemaMismatch(f"unsupported tree version {doc.get('version')!r}")
    try:
        p = doc["params"]
        params = TreeParams(
            c=float(p["c"]), min_size=int(p["min_size"]), max_levels=int(p["max_levels"]),
            shared_per_level=bool(p["shared_per_level"]), seed=int(p["seed"]), stream=tuple(p["stream"]),
            threshold=p["threshold"], direction_kind=p["direction_kind"],
            diameter_mode=p["diameter_mode"], retain_stats=bool(p["retain_stats"]),
        )
        levels = doc["level_directions"]
        tree = RpTree(_node_from_dict(doc["root"]), params, int(doc["dim"]), int(doc["n_train"]),
                      None if levels is None else [_arr(v) for v in levels])
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise CorruptInput(f"malformed tree document: {exc!r}") from None
    return tree


def deserialize(data: Union[bytes, str]) -> RpTree:
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptInput(f"invalid tree JSON: {exc}") from None
    return tree_from_dict(doc)


def save_tree(tree: RpTree, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize(tree))


def load_tree(path) -> RpTree:
    with open(path, "rb") as fh:
        return deserialize(fh.read())


__all__ = [
    "CellStats", "DistanceRule", "EmptySet", "Internal", "Leaf", "ProjectedDistanceRule", "ProjectionRule",
    "RpTree", "SplitCheck", "SplitOutcome", "TreeParams", "cell_stats", "choose_rule", "deserialize",
    "encode", "load_tree", "make_tree", "quantization_error", "route", "route_many", "save_tree",
    "serialize", "split_quality_report", "truncate",
]
