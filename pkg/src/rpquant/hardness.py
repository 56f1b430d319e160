"""Constructive reduction from restricted 3SAT to Euclidean 2-means.

Pipeline: a 3CNF formula in which every variable occurs at least twice is
rewritten so each variable occurs exactly three times (``to_three_occurrence``),
then turned into a not-all-equal 3SAT instance whose variable pairs co-occur in
a controlled way (``to_naesat_star``).  That instance yields a ``2n x 2n``
literal distance matrix ``D`` and threshold ``c`` such that a 2-clustering of
cost at most ``c`` exists iff the formula is NAE-satisfiable.  ``D`` is a
squared Euclidean distance matrix, realized by classical MDS.

Literal ``+v`` / ``-v`` (1-based ``v``) maps to matrix row ``v - 1`` / ``n + v - 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import (
    EmptyCluster,
    IncompleteAssignment,
    InvalidParam,
    NonzeroDiagonal,
    NotApplicable,
    NotEmbeddable,
    NotNaeSatisfying,
    NotSymmetric,
    ParseError,
    RestrictionViolated,
    StageError,
    StructureError,
    TooLarge,
    ValidationError,
)

SAT_MAX_VARS = 20
NAE_MAX_VARS = 24
BIPARTITION_MAX_N = 24
PSD_RTOL = 1e-9
MDS_DROP_RTOL = 1e-12
VERDICT_ATOL = 1e-9


# --- formulas --------------------------------------------------------------

@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(tuple(int(l) for l in c) for c in self.clauses))
        for ci, clause in enumerate(self.clauses):
            seen = set()
            for lit in clause:
                v = abs(lit)
                if lit == 0 or v > self.num_vars:
                    raise ValidationError("VariableOutOfRange", f"literal {lit} in clause {ci + 1}",
                                          clause=ci, variable=v)
                if v in seen:
                    raise ValidationError("DuplicateVariableInClause", f"variable {v} repeated in clause {ci + 1}",
                                          clause=ci, variable=v)
                seen.add(v)

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def occurrences(self) -> np.ndarray:
        """Occurrence count per variable (index 0 is variable 1), both polarities together."""
        counts = np.zeros(self.num_vars, dtype=int)
        for clause in self.clauses:
            for lit in clause:
                counts[abs(lit) - 1] += 1
        return counts

    def to_dimacs(self, comments: Sequence[str] = ()) -> str:
        lines = [f"c {c}" for c in comments]
        lines.append(f"p cnf {self.num_vars} {self.num_clauses}")
        lines.extend(" ".join(map(str, c)) + " 0" for c in self.clauses)
        return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF.  Clauses may span lines; a ``%`` line ends the clause list."""
    header = None
    clauses, current = [], []
    current_line = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if header is not None:
                raise ParseError("duplicate problem line", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"malformed problem line {line!r}", lineno)
            try:
                header = (int(parts[2]), int(parts[3]), lineno)
            except ValueError:
                raise ParseError(f"malformed problem line {line!r}", lineno) from None
            if header[0] < 0 or header[1] < 0:
                raise ParseError("negative counts in problem line", lineno)
            continue
        if header is None:
            raise ParseError("clause before problem line", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", lineno) from None
            if lit == 0:
                clauses.append((current, current_line or lineno))
                current, current_line = [], None
            else:
                if abs(lit) > header[0]:
                    raise ParseError(f"literal {lit} exceeds declared {header[0]} variables", lineno)
                if current_line is None:
                    current_line = lineno
                current.append(lit)
    if header is None:
        raise ParseError("missing problem line")
    if current:
        raise ParseError("last clause is not 0-terminated", current_line)
    if len(clauses) != header[1]:
        raise ParseError(f"header declares {header[1]} clauses, found {len(clauses)}", header[2])
    for lits, lineno in clauses:
        if not lits:
            raise ParseError("empty clause", lineno)
    return CnfFormula(header[0], [c for c, _ in clauses])


def validate_3sat_restricted(phi: CnfFormula) -> None:
    """Every clause has three literals and every variable occurs at least twice."""
    for ci, clause in enumerate(phi.clauses):
        if len(clause) != 3:
            raise ValidationError("WrongClauseSize", f"clause {ci + 1} has {len(clause)} literals", clause=ci)
    for v, k in enumerate(phi.occurrences(), start=1):
        if k < 2:
            raise ValidationError("RareVariable", f"variable {v} occurs {k} time(s)", variable=v)


@dataclass(frozen=True)
class ThreeOccurrence:
    formula: CnfFormula
    provenance: dict        # copy variable -> original variable
    copies: dict            # original variable -> tuple of copy variables


def to_three_occurrence(phi: CnfFormula) -> ThreeOccurrence:
    """Give each occurrence its own copy variable and tie copies together with an implication cycle."""
    validate_3sat_restricted(phi)
    counts = phi.occurrences()
    first = np.concatenate([[1], 1 + np.cumsum(counts)[:-1]]) if phi.num_vars else np.array([], int)
    used = np.zeros(phi.num_vars, dtype=int)
    clauses = []
    for clause in phi.clauses:
        new = []
        for lit in clause:
            v = abs(lit) - 1
            copy = int(first[v] + used[v])
            used[v] += 1
            new.append(copy if lit > 0 else -copy)
        clauses.append(tuple(new))
    copies, provenance = {}, {}
    for v in range(phi.num_vars):
        xs = tuple(range(int(first[v]), int(first[v] + counts[v])))
        copies[v + 1] = xs
        for x in xs:
            provenance[x] = v + 1
        for a, b in zip(xs, xs[1:] + xs[:1]):
            clauses.append((-a, b))
    return ThreeOccurrence(CnfFormula(int(counts.sum()), clauses), provenance, copies)


@dataclass(frozen=True)
class NaeStar:
    formula: CnfFormula
    base_vars: int          # variables 1..base_vars are those of the input formula
    s_vars: tuple
    f_vars: tuple
    f: int
    chain_omitted: bool     # True when there is a single f-variable and so no chain clause


def to_naesat_star(phi1: CnfFormula) -> NaeStar:
    """Rewrite a formula of 2- and 3-literal clauses as an exactly-3-literal NAE instance.

    New variables follow the input ones: ``s_1..s_m`` (one per 3-clause), then
    ``f_1..f_{m+m'}``, then ``f``.  Clauses are emitted in input order followed
    by the cycle ``(-f_i, f_{i+1}, f)``.
    """
    sizes = {len(c) for c in phi1.clauses}
    if not phi1.clauses:
        raise StructureError("formula has no clauses")
    if not sizes <= {2, 3}:
        raise StructureError(f"clause sizes must be 2 or 3, found {sorted(sizes - {2, 3})}")
    m = sum(1 for c in phi1.clauses if len(c) == 3)
    m2 = len(phi1.clauses) - m
    base = phi1.num_vars
    s_vars = tuple(range(base + 1, base + m + 1))
    f_vars = tuple(range(base + m + 1, base + m + m + m2 + 1))
    f = base + 2 * m + m2 + 1
    clauses = []
    j3 = j2 = 0
    for clause in phi1.clauses:
        if len(clause) == 3:
            a, b, g = clause
            s, fj = s_vars[j3], f_vars[j3]
            clauses.append((a, b, s))
            clauses.append((-s, g, fj))
            j3 += 1
        else:
            a, b = clause
            clauses.append((a, b, f_vars[m + j2]))
            j2 += 1
    M = len(f_vars)
    if M > 1:
        for i in range(M):
            clauses.append((-f_vars[i], f_vars[(i + 1) % M], f))
    return NaeStar(CnfFormula(f, clauses), base, s_vars, f_vars, f, chain_omitted=M == 1)


def cooccurrence(phi: CnfFormula) -> dict:
    """For each co-occurring variable pair ``(i, j)``, ``i < j``: clause indices by sign class.

    Class ``"same"`` collects clauses holding ``{x_i, x_j}`` or ``{-x_i, -x_j}``;
    ``"opposite"`` collects ``{-x_i, x_j}`` or ``{x_i, -x_j}``.
    """
    out = {}
    for ci, clause in enumerate(phi.clauses):
        for a_pos in range(len(clause)):
            for b_pos in range(a_pos + 1, len(clause)):
                a, b = clause[a_pos], clause[b_pos]
                key = (min(abs(a), abs(b)), max(abs(a), abs(b)))
                cls = "same" if (a > 0) == (b > 0) else "opposite"
                out.setdefault(key, {"same": [], "opposite": []})[cls].append(ci)
    return out


def restriction_violations(phi: CnfFormula) -> list:
    """Clauses that break the NAE co-occurrence restriction, as ``(pair, class, clause indices)``."""
    bad = []
    for ci, clause in enumerate(phi.clauses):
        if len(clause) != 3:
            bad.append(((), "size", [ci]))
    for pair, classes in sorted(cooccurrence(phi).items()):
        for cls in ("same", "opposite"):
            if len(classes[cls]) > 1:
                bad.append((pair, cls, classes[cls]))
    return bad


def _clause_true_counts(phi: CnfFormula, A: np.ndarray) -> list:
    """Per clause, number of true literals for each row of the boolean assignment matrix ``A``."""
    out = []
    for clause in phi.clauses:
        cnt = np.zeros(A.shape[0], dtype=np.int8)
        for lit in clause:
            col = A[:, abs(lit) - 1]
            cnt += col if lit > 0 else ~col
        out.append(cnt)
    return out


def _as_assignment(phi: CnfFormula, assignment) -> np.ndarray:
    if isinstance(assignment, dict):
        missing = [v for v in range(1, phi.num_vars + 1) if v not in assignment]
        if missing:
            raise IncompleteAssignment(f"no value for variables {missing[:5]}")
        return np.array([bool(assignment[v]) for v in range(1, phi.num_vars + 1)])
    a = [None if x is None else bool(x) for x in assignment]
    if len(a) != phi.num_vars or any(x is None for x in a):
        raise IncompleteAssignment(f"need {phi.num_vars} values, got {len(a)}")
    return np.array(a, dtype=bool)


def sat_check(phi: CnfFormula, assignment) -> bool:
    A = _as_assignment(phi, assignment)[None, :]
    return all(bool(c[0] >= 1) for c in _clause_true_counts(phi, A))


def naesat_check(phi: CnfFormula, assignment) -> bool:
    """True iff every clause has at least one true and at least one false literal."""
    A = _as_assignment(phi, assignment)[None, :]
    return all(1 <= int(c[0]) <= len(cl) - 1 for c, cl in zip(_clause_true_counts(phi, A), phi.clauses))


def _exhaustive(phi: CnfFormula, nae: bool, cap: int):
    n = phi.num_vars
    if n > cap:
        raise TooLarge(f"exhaustive search is capped at {cap} variables")
    bits = np.arange(n, dtype=np.int64)
    chunk = 1 << 16
    for start in range(0, 1 << n, chunk):
        codes = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        A = ((codes[:, None] >> bits) & 1).astype(bool)
        ok = np.ones(codes.size, dtype=bool)
        for cnt, clause in zip(_clause_true_counts(phi, A), phi.clauses):
            ok &= (cnt >= 1) & (cnt <= len(clause) - 1) if nae else cnt >= 1
        hit = np.flatnonzero(ok)
        if hit.size:
            return tuple(bool(x) for x in A[hit[0]])
    return None


def sat_bruteforce(phi: CnfFormula):
    """First satisfying assignment in binary-counting order, or ``None``."""
    return _exhaustive(phi, nae=False, cap=SAT_MAX_VARS)


def nae_bruteforce(phi: CnfFormula):
    return _exhaustive(phi, nae=True, cap=NAE_MAX_VARS)


def naestar_assignment(nae: NaeStar, base_assignment) -> tuple:
    """Extend a satisfying assignment of the 2/3-clause formula to an NAE assignment."""
    a = list(_as_assignment(CnfFormula(nae.base_vars, ()), base_assignment))
    s_vals = []
    # The 3-clauses appear in order; recover them from the emitted (a, b, s_j) clauses.
    for clause in nae.formula.clauses:
        if len(s_vals) == len(nae.s_vars):
            break
        if abs(clause[2]) in nae.s_vars and clause[2] > 0:
            x, y = clause[0], clause[1]
            vx = a[abs(x) - 1] if x > 0 else not a[abs(x) - 1]
            vy = a[abs(y) - 1] if y > 0 else not a[abs(y) - 1]
            s_vals.append(not vx and not vy)
    return tuple(a + s_vals + [False] * len(nae.f_vars) + [False])


# --- distance matrix -------------------------------------------------------

@dataclass(frozen=True)
class DistanceMatrix:
    entries: np.ndarray
    n: int
    m: int
    delta: float
    Delta: float
    delta_exact: Fraction = field(default=None, repr=False)
    Delta_exact: Fraction = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return self.entries.shape[0]

    def literal_index(self, lit: int) -> int:
        return abs(lit) - 1 + (0 if lit > 0 else self.n)

    def literal_of(self, index: int) -> int:
        return index + 1 if index < self.n else -(index - self.n + 1)


def build_distance_matrix(phi: CnfFormula) -> DistanceMatrix:
    """Literal distance matrix: 0 on the diagonal, ``1 + Delta`` for complements,
    ``1 + delta`` for related literals, 1 otherwise.

    Literals ``a, b`` are related when both occur in one clause or both
    negations do.  Raises :class:`RestrictionViolated` when some relation is
    produced by two different clauses.
    """
    if not phi.clauses:
        raise StructureError("formula has no clauses")
    bad = restriction_violations(phi)
    if bad:
        pair, cls, idx = bad[0]
        if cls == "size":
            raise RestrictionViolated(f"clause {idx[0] + 1} does not have exactly three literals")
        raise RestrictionViolated(
            f"variables {pair} co-occur with {cls} signs in clauses {[i + 1 for i in idx]}")
    n, m = phi.num_vars, phi.num_clauses
    delta = Fraction(1, 5 * m + 2 * n)
    Delta = 5 * delta * m
    if not (4 * delta * m < Delta <= 1 - 2 * delta * n):
        raise RestrictionViolated("delta/Delta constraint fails")
    N = 2 * n
    D = np.ones((N, N))
    idx = np.arange(n)
    D[idx, idx + n] = D[idx + n, idx] = 1.0 + float(Delta)
    dm = DistanceMatrix(D, n, m, float(delta), float(Delta), delta, Delta)
    for clause in phi.clauses:
        for i in range(3):
            for j in range(i + 1, 3):
                a, b = clause[i], clause[j]
                for x, y in ((a, b), (-a, -b)):
                    p, q = dm.literal_index(x), dm.literal_index(y)
                    D[p, q] = D[q, p] = 1.0 + float(delta)
    np.fill_diagonal(D, 0.0)
    D.setflags(write=False)
    return dm


def cost_threshold(dm_or_phi) -> float:
    """``n - 1 + 2 delta m / n``."""
    if isinstance(dm_or_phi, DistanceMatrix):
        n, m, delta = dm_or_phi.n, dm_or_phi.m, dm_or_phi.delta_exact
    else:
        n, m = dm_or_phi.num_vars, dm_or_phi.num_clauses
        if m == 0:
            return float(n - 1)
        delta = Fraction(1, 5 * m + 2 * n)
    return float(n - 1 + 2 * delta * m / n)


# --- clusterings -----------------------------------------------------------

@dataclass(frozen=True)
class Clustering2:
    c1: tuple
    c2: tuple
    cost: float

    def labels(self, N: int) -> np.ndarray:
        lab = np.ones(N, dtype=int)
        lab[list(self.c1)] = 0
        return lab


def _entries(D) -> np.ndarray:
    return D.entries if isinstance(D, DistanceMatrix) else np.asarray(D, dtype=float)


def _parts(partition, N):
    if isinstance(partition, Clustering2):
        c1, c2 = partition.c1, partition.c2
    elif len(partition) == 2 and not np.isscalar(partition[0]):
        c1, c2 = partition
    else:
        lab = np.asarray(partition)
        if lab.shape != (N,):
            raise InvalidParam("labels must have one entry per point")
        c1, c2 = np.flatnonzero(lab == 0), np.flatnonzero(lab != 0)
    c1, c2 = np.asarray(c1, dtype=int), np.asarray(c2, dtype=int)
    if c1.size == 0 or c2.size == 0:
        raise EmptyCluster("both clusters must be nonempty")
    if c1.size + c2.size != N or np.unique(np.concatenate([c1, c2])).size != N:
        raise InvalidParam("clusters must partition all points")
    return c1, c2


def clustering_cost(D, partition) -> float:
    """``sum_j (1/(2|C_j|)) sum_{i,i' in C_j} D_ii'`` over ordered pairs."""
    E = _entries(D)
    total = 0.0
    for C in _parts(partition, E.shape[0]):
        total += float(E[np.ix_(C, C)].sum()) / (2 * C.size)
    return total


def assignment_to_clustering(phi: CnfFormula, assignment, D: Optional[DistanceMatrix] = None) -> Clustering2:
    """Cluster 1 holds the literals made true by ``assignment``, cluster 2 the false ones."""
    a = _as_assignment(phi, assignment)
    if not naesat_check(phi, a):
        raise NotNaeSatisfying("assignment leaves some clause all-true or all-false")
    D = D if D is not None else build_distance_matrix(phi)
    n = phi.num_vars
    idx = np.arange(n)
    c1 = np.where(a, idx, idx + n)
    c2 = np.where(a, idx + n, idx)
    c1, c2 = tuple(sorted(c1.tolist())), tuple(sorted(c2.tolist()))
    return Clustering2(c1, c2, clustering_cost(D, (c1, c2)))


def clustering_to_assignment(D: DistanceMatrix, clustering: Clustering2):
    """Assignment making cluster 1 true, or ``None`` if a cluster holds a literal and its negation."""
    c1 = set(clustering.c1)
    a = []
    for v in range(D.n):
        pos, neg = v in c1, (v + D.n) in c1
        if pos == neg:
            return None
        a.append(pos)
    return tuple(a)


def _bit_rows(k: int) -> np.ndarray:
    codes = np.arange(1 << k, dtype=np.int64)
    return ((codes[:, None] >> np.arange(k)) & 1).astype(float)


def bipartition_cost_blocks(D, high_chunk: int = 1 << 11):
    """Yield ``(masks, costs)`` covering every bipartition with point 0 in cluster 1.

    Bit ``j`` of a mask puts point ``j + 1`` in cluster 1.  The quadratic form
    for cluster 1 is split into a low-bit part, a high-bit part and a cross
    term, so each block is one matrix product.
    """
    E = _entries(D)
    N = E.shape[0]
    free = N - 1
    lo = (free + 1) // 2
    hi = free - lo
    P = np.arange(0, lo + 1)          # point 0 and the low points
    H = np.arange(lo + 1, N)
    A = np.hstack([np.ones((1 << lo, 1)), _bit_rows(lo)])
    r = E.sum(axis=1)
    T = float(r.sum())
    s_low = np.einsum("ij,ij->i", A @ E[np.ix_(P, P)], A)
    r_low = A @ r[P]
    n_low = A.sum(axis=1)
    EPH = A @ E[np.ix_(P, H)]
    EHH = E[np.ix_(H, H)]
    low_codes = np.arange(1 << lo, dtype=np.int64)
    for start in range(0, 1 << hi, high_chunk):
        codes = np.arange(start, min(start + high_chunk, 1 << hi), dtype=np.int64)
        B = ((codes[:, None] >> np.arange(hi)) & 1).astype(float)
        s_high = np.einsum("ij,ij->i", B @ EHH, B)
        S1 = s_low[:, None] + s_high[None, :] + 2.0 * (EPH @ B.T)
        S2 = T - 2.0 * (r_low[:, None] + (B @ r[H])[None, :]) + S1
        n1 = n_low[:, None] + B.sum(axis=1)[None, :]
        n2 = N - n1
        with np.errstate(divide="ignore", invalid="ignore"):
            cost = S1 / (2.0 * n1) + np.where(n2 > 0, S2 / (2.0 * np.maximum(n2, 1.0)), np.inf)
        masks = (codes[None, :] << lo) | low_codes[:, None]
        yield masks, cost


def _mask_to_clustering(D, mask: int) -> Clustering2:
    N = _entries(D).shape[0]
    in1 = [0] + [j + 1 for j in range(N - 1) if (mask >> j) & 1]
    c1 = tuple(in1)
    c2 = tuple(i for i in range(N) if i not in set(in1))
    return Clustering2(c1, c2, clustering_cost(D, (c1, c2)))


def brute_force_2clustering(D) -> Clustering2:
    """Exact generalized 2-means optimum over all ``2^(N-1) - 1`` bipartitions.

    Ties go to the smallest mask.  The returned cost is recomputed from the
    chosen partition.
    """
    E = _entries(D)
    N = E.shape[0]
    if N < 2:
        raise EmptyCluster("need at least two points")
    if N > BIPARTITION_MAX_N:
        raise TooLarge(f"bipartition enumeration is capped at N <= {BIPARTITION_MAX_N}")
    best_cost, best_mask = np.inf, -1
    for masks, cost in bipartition_cost_blocks(E):
        c = float(cost.min())
        if c < best_cost or (c == best_cost and int(masks[cost == c].min()) < best_mask):
            best_cost, best_mask = c, int(masks[cost == c].min())
    return _mask_to_clustering(D, best_mask)


def complement_free_optimum(dm: DistanceMatrix) -> Clustering2:
    """Exact optimum via a 0/1 program over assignments, certified by the mixed-cluster bound.

    Complement-free bipartitions are exactly assignments, with cost
    ``n - 1 + (1/n) sum_{same-cluster pairs} (D - 1)``.  Any bipartition
    putting a literal next to its negation costs at least
    ``n - 1 + min_complement_excess / (2n - 1)`` because all off-diagonal
    entries are at least 1.  When the best assignment is below that bound it is
    the global optimum; otherwise :class:`NotApplicable` is raised.
    """
    from scipy.optimize import Bounds, LinearConstraint, milp

    E, n = dm.entries, dm.n
    N = 2 * n
    off = E[~np.eye(N, dtype=bool)]
    if off.min() < 1.0:
        raise NotApplicable("some off-diagonal entry is below 1")
    excess = np.array([E[v, v + n] - 1.0 for v in range(n)])
    bound = n - 1 + float(excess.min()) / (2 * n - 1)

    # A literal pair and its complement pair always share a cluster together,
    # so weights are merged per (var_a, var_b, same-sign) key.
    weights = {}
    for p in range(N):
        for q in range(p + 1, N):
            w = E[p, q] - 1.0
            if q == p + n or w == 0.0:
                continue
            a, b = dm.literal_of(p), dm.literal_of(q)
            va, vb = abs(a) - 1, abs(b) - 1
            if va > vb:
                va, vb, a, b = vb, va, b, a
            key = (va, vb, (a > 0) == (b > 0))
            weights[key] = weights.get(key, 0.0) + w
    keys = sorted(weights)
    nz = n + len(keys)
    rows, lb = [], []
    for k, (va, vb, same) in enumerate(keys):
        # With literal values la = z_a and lb = z_b (same) or 1 - z_b (opposite),
        # s >= la + lb - 1 and s >= 1 - la - lb.
        sb, tb = (1.0, 0.0) if same else (-1.0, 1.0)
        r1 = np.zeros(nz)
        r1[n + k], r1[va], r1[vb] = 1.0, -1.0, -sb
        rows.append(r1)
        lb.append(tb - 1.0)
        r2 = np.zeros(nz)
        r2[n + k], r2[va], r2[vb] = 1.0, 1.0, sb
        rows.append(r2)
        lb.append(1.0 - tb)
    c = np.concatenate([np.zeros(n), [weights[k] for k in keys]])
    lower = np.zeros(nz)
    lower[0] = 1.0      # cluster 1 holds the positive literal of variable 1
    integrality = np.concatenate([np.ones(n), np.zeros(len(keys))])
    constraints = [LinearConstraint(np.array(rows), lb, np.inf)] if rows else []
    res = milp(c, constraints=constraints, integrality=integrality, bounds=Bounds(lower, np.ones(nz)),
               options={"mip_rel_gap": 0.0})
    if not res.success:
        raise NotApplicable(f"0/1 program failed: {res.message}")
    z = np.round(res.x[:n]).astype(bool)
    idx = np.arange(n)
    c1 = tuple(sorted(np.where(z, idx, idx + n).tolist()))
    c2 = tuple(sorted(np.where(z, idx + n, idx).tolist()))
    best = Clustering2(c1, c2, clustering_cost(dm, (c1, c2)))
    if best.cost > bound:
        raise NotApplicable("best assignment exceeds the mixed-cluster bound; optimum not certified")
    return best


# --- embedding -------------------------------------------------------------

def _check_square(E: np.ndarray):
    if E.ndim != 2 or E.shape[0] != E.shape[1]:
        raise NotSymmetric("matrix must be square")
    if not np.allclose(E, E.T, rtol=0, atol=1e-12 * max(1.0, float(np.abs(E).max(initial=0)))):
        raise NotSymmetric("matrix is not symmetric")
    if np.any(np.diag(E) != 0):
        raise NonzeroDiagonal("diagonal must be zero")


def centering(N: int) -> np.ndarray:
    return np.eye(N) - np.full((N, N), 1.0 / N)


def schoenberg_check(D, rtol: float = PSD_RTOL):
    """``(embeddable, eigenvalues of -HDH in descending order)``."""
    E = _entries(D)
    _check_square(E)
    H = centering(E.shape[0])
    G = -H @ E @ H
    ev = np.linalg.eigvalsh(0.5 * (G + G.T))[::-1]
    scale = float(np.abs(ev).max(initial=0.0))
    return bool(ev[-1] >= -rtol * scale), ev


def zero_sum_form_check(D, trials: int = 1000, rng=None, rtol: float = PSD_RTOL):
    """Randomized test of ``u^T D u <= 0`` for zero-sum ``u``; returns ``(holds, max normalized value)``."""
    E = _entries(D)
    _check_square(E)
    gen = np.random.default_rng(rng)
    U = gen.standard_normal((trials, E.shape[0]))
    U -= U.mean(axis=1, keepdims=True)
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    vals = np.einsum("ij,jk,ik->i", U, E, U)
    worst = float(vals.max())
    return worst <= rtol * max(1.0, float(np.abs(E).max())), worst


@dataclass(frozen=True)
class Embedding:
    points: np.ndarray
    gram_spectrum: np.ndarray

    def sq_distances(self) -> np.ndarray:
        X = self.points
        diff = X[:, None, :] - X[None, :, :]
        return np.sum(diff * diff, axis=2)


def embed_mds(D) -> Embedding:
    """Classical MDS: factor ``-(1/2) H D H = X X^T``; ``X`` is padded to N columns."""
    E = _entries(D)
    ok, _ = schoenberg_check(E)
    if not ok:
        raise NotEmbeddable("-HDH has a negative eigenvalue")
    N = E.shape[0]
    H = centering(N)
    B = -0.5 * (H @ E @ H)
    w, V = np.linalg.eigh(0.5 * (B + B.T))
    w, V = w[::-1], V[:, ::-1]
    keep = w > MDS_DROP_RTOL * max(float(w.max(initial=0.0)), 0.0)
    X = np.zeros((N, N))
    X[:, : int(keep.sum())] = V[:, keep] * np.sqrt(w[keep])
    return Embedding(X, w)


# --- pipeline --------------------------------------------------------------

@dataclass
class ReductionResult:
    phi: CnfFormula
    three_occurrence: Optional[ThreeOccurrence]
    nae: NaeStar
    distance: DistanceMatrix
    c_phi: float
    embedding: Embedding
    brute_force: Optional[Clustering2] = None
    method: Optional[str] = None
    verdict: Optional[str] = None

    @property
    def phi_prime(self) -> CnfFormula:
        return self.three_occurrence.formula if self.three_occurrence else self.phi

    @property
    def phi_double_prime(self) -> CnfFormula:
        return self.nae.formula

    def report(self) -> dict:
        d = self.distance
        return {
            "n": d.n,
            "m": d.m,
            "delta": d.delta,
            "Delta": d.Delta,
            "c_phi": self.c_phi,
            "N": d.N,
            "chain_omitted": self.nae.chain_omitted,
            "brute_force_cost": None if self.brute_force is None else self.brute_force.cost,
            "method": self.method,
            "verdict": self.verdict,
        }


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, StageError) and isinstance(exc, Exception):
            raise StageError(self.name, exc) from exc
        return False


def end_to_end_reduce(text: str, verify: bool = True, input_kind: str = "3sat") -> ReductionResult:
    """Run the whole reduction on DIMACS text.

    ``input_kind="3sat"`` expects a restricted 3SAT formula.  ``"2-3cnf"``
    skips validation and the occurrence rewrite and feeds a formula of 2- and
    3-literal clauses straight to the NAE construction; this keeps small
    instances within brute-force range.

    With ``verify``, the optimal 2-clustering is found by enumeration when
    ``N <= 24`` (``method="exhaustive"``) and otherwise by the certified 0/1
    program (``method="assignment-milp"``).  The verdict is ``"SAT"`` when the
    optimum is at most ``c(phi) + 1e-9``.  Errors are wrapped in
    :class:`StageError` naming the failing stage.
    """
    if input_kind not in ("3sat", "2-3cnf"):
        raise InvalidParam(f"unknown input kind {input_kind!r}")
    with _Stage("parse"):
        phi = parse_dimacs(text)
    three = None
    if input_kind == "3sat":
        with _Stage("validate"):
            validate_3sat_restricted(phi)
        with _Stage("three-occurrence"):
            three = to_three_occurrence(phi)
        phi1 = three.formula
    else:
        phi1 = phi
    with _Stage("nae-star"):
        nae = to_naesat_star(phi1)
    with _Stage("distance-matrix"):
        dm = build_distance_matrix(nae.formula)
        c = cost_threshold(dm)
    with _Stage("embedding"):
        emb = embed_mds(dm)
    result = ReductionResult(phi, three, nae, dm, c, emb)
    if verify:
        with _Stage("verify"):
            if dm.N <= BIPARTITION_MAX_N:
                result.brute_force, result.method = brute_force_2clustering(dm), "exhaustive"
            else:
                result.brute_force, result.method = complement_free_optimum(dm), "assignment-milp"
            result.verdict = "SAT" if result.brute_force.cost <= c + VERDICT_ATOL else "UNSAT"
    return result
