"""Partition of the dual space by flats, and dimension bookkeeping of the
incidence variety ``{(x_1..x_n, l) : l(x_i) = 0}`` restricted to a product
of subspaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fields import GF, FieldSpec
from .linalg import ExactMatrix, nullspace, subspace_intersection
from .polymatroid import (
    DualRealization,
    Flat,
    PolymatroidError,
    SubspaceTuple,
    dual_realization,
    flats_lattice,
    is_bk,
    is_irreducible,
    label,
)

MIN_SAMPLING_PRIME = 10007


class StrataViolation(AssertionError):
    """A computed quantity disagrees with the dimension formula it should satisfy."""


@dataclass
class DualOracle:
    """Rank oracle of the polymatroid read off a dual realization.

    ``rank(I) = n - dim(intersection of the annihilators in I)``.
    """

    dual: DualRealization
    _rank: dict = field(default_factory=dict)
    _closure: dict = field(default_factory=dict)
    _primal: list = field(default_factory=list)

    def __post_init__(self):
        # each annihilator's own annihilator spans the primal subspace
        for b in self.dual.subspaces:
            self._primal.append(nullspace(b) if b.rows else ExactMatrix.identity(b.cols, b.field))

    @property
    def size(self) -> int:
        return len(self.dual.subspaces)

    def rank(self, subset: frozenset) -> int:
        r = self._rank.get(subset)
        if r is None:
            r = self.dual.ambient_dim - self.dual.intersection(subset).rows
            self._rank[subset] = r
        return r

    def closure(self, subset: frozenset) -> frozenset:
        c = self._closure.get(subset)
        if c is None:
            r = self.rank(subset)
            c = frozenset(j for j in range(self.size)
                          if j in subset or self.rank(subset | {j}) == r)
            self._closure[subset] = c
        return c

    def members(self, x: Sequence) -> frozenset:
        """``{i : x annihilates L_i}``, i.e. the annihilators containing x."""
        f = self.dual.field
        out = []
        for i, P in enumerate(self._primal):
            if all(f.normalize(sum(a * b for a, b in zip(P.row(k), x))) == 0
                   for k in range(P.rows)):
                out.append(i)
        return frozenset(out)

    def member_masks(self, X: np.ndarray) -> np.ndarray:
        """Vectorized ``members`` over GF(p) for the rows of X, as bitmasks."""
        p = self.dual.field.modulus
        masks = np.zeros(X.shape[0], dtype=np.int64)
        if p >= 2**28:
            X = X.astype(object)
        for i, P in enumerate(self._primal):
            if P.rows == 0:
                masks |= 1 << i
                continue
            hit = ~np.any((X @ P.to_numpy().T) % p, axis=1)
            masks |= hit.astype(np.int64) << i
        return masks

    def flat(self, subset: frozenset) -> Flat:
        r = self.rank(subset)
        return Flat(subset, r, r - len(subset))


def _oracle(d) -> DualOracle:
    return d if isinstance(d, DualOracle) else DualOracle(d)


def classify_point(d, x: Sequence) -> Flat:
    """The flat ``{i : x in L_i^perp}`` of a dual point.

    Raises StrataViolation if the membership set is not closed.
    """
    o = _oracle(d)
    if len(x) != o.dual.ambient_dim:
        raise ValueError("dual vector has the wrong length")
    x = [o.dual.field(v) for v in x]
    members = o.members(x)
    if o.closure(members) != members:
        raise StrataViolation(f"membership set {label(members)} of {x} is not a flat")
    return o.flat(members)


def classify_points(d, X: np.ndarray) -> tuple[np.ndarray, list[dict]]:
    """Batch classification over GF(p).

    Returns the membership bitmask of every row and a list of violations
    (membership sets that are not flats).
    """
    o = _oracle(d)
    if not o.dual.field.is_prime:
        raise ValueError("batch classification needs a prime field")
    masks = o.member_masks(X)
    violations = []
    for m in np.unique(masks):
        s = frozenset(i for i in range(o.size) if int(m) >> i & 1)
        if o.closure(s) != s:
            violations.append({"members": label(s), "closure": label(o.closure(s)),
                               "count": int(np.sum(masks == m))})
    return masks, violations


def dual_over_prime(d: DualRealization, p: int) -> DualRealization:
    F = GF(p)
    if d.field == F:
        return d
    if d.field.is_prime:
        raise ValueError(f"dual realization lives over {d.field}, not GF({p})")
    return DualRealization(d.ambient_dim, F, tuple(b.with_field(F) for b in d.subspaces))


@dataclass(frozen=True)
class StratumSample:
    flat: Flat
    points: list
    trials: int
    hits: int
    seed: int
    prime: int
    diagnostic: str = ""

    @property
    def hit_rate(self) -> float:
        return self.hits / self.trials if self.trials else 0.0

    def to_json(self) -> dict:
        return {"flat": label(self.flat.members), "trials": self.trials, "hits": self.hits,
                "hit_rate": self.hit_rate, "seed": self.seed, "prime": self.prime,
                "diagnostic": self.diagnostic}


def sample_stratum(d, f: Flat | frozenset, p: int, trials: int, seed: int) -> StratumSample:
    """Uniform points of ``L_F^perp`` over GF(p) that classify exactly to F."""
    if p < MIN_SAMPLING_PRIME:
        raise ValueError(f"sampling prime must be at least {MIN_SAMPLING_PRIME}")
    dual = _oracle(d).dual
    o = DualOracle(dual_over_prime(dual, p))
    members = f.members if isinstance(f, Flat) else frozenset(f)
    B = o.dual.intersection(members)
    rng = np.random.default_rng(seed)
    n = o.dual.ambient_dim
    if B.rows:
        coeffs = rng.integers(0, p, size=(trials, B.rows))
        basis = B.to_numpy()
        if p >= 2**28:  # keep the products exact
            coeffs, basis = coeffs.astype(object), basis.astype(object)
        X = (coeffs @ basis) % p
    else:
        X = np.zeros((trials, n), dtype=np.int64)
    masks, _ = classify_points(o, X)
    target = sum(1 << i for i in members)
    keep = np.nonzero(masks == target)[0]
    points = [tuple(int(v) for v in X[k]) for k in keep]
    diag = "" if points else "no hits: the stratum may be empty mod p; resample with a larger prime"
    return StratumSample(o.flat(members), points, trials, len(points), seed, p, diag)


def fiber_dimension(t: SubspaceTuple, l: Sequence, oracle: DualOracle | None = None) -> int:
    """``sum_i dim(l^perp ∩ L_i)``, checked against ``dim L - m + |F|``."""
    F_ = t.field
    l = [F_(v) for v in l]
    if not any(l):
        raise ValueError("covector must be nonzero")
    o = oracle or DualOracle(dual_realization(t))
    kernel = nullspace(ExactMatrix.from_rows([l], F_))
    total = sum(subspace_intersection([kernel, L]).rows if L.rows else 0
                for L in t.subspaces)
    flat = classify_point(o, l)
    expected = t.total_dim - len(t) + len(flat.members)
    if total != expected:
        raise StrataViolation(
            f"fiber dimension {total} != dim L - m + |F| = {expected} for F = {label(flat.members)}")
    return total


def point_in_stratum(t: SubspaceTuple, flat: Flat, seed: int = 0,
                     oracle: DualOracle | None = None, attempts: int = 200) -> tuple:
    """A point of B_F in the tuple's own field (random combinations of L_F^perp)."""
    o = oracle or DualOracle(dual_realization(t))
    B = o.dual.intersection(flat.members)
    if B.rows == 0:
        raise ValueError(f"annihilator of flat {label(flat.members)} is zero")
    rng = np.random.default_rng(seed)
    F_ = t.field
    for k in range(attempts):
        bound = 5 * (k + 1)
        coeffs = [F_.random_element(rng, bound) for _ in range(B.rows)]
        x = tuple(F_.normalize(sum(c * B[r, j] for r, c in enumerate(coeffs)))
                  for j in range(B.cols))
        if any(x) and o.members(x) == flat.members:
            return x
    raise ValueError(f"no point found in the stratum of {label(flat.members)}")


@dataclass(frozen=True)
class StratumRow:
    flat: Flat
    dim_BF: int
    fiber_rank: int
    dim_QF: int
    expected_dim_QF: int

    def to_json(self) -> dict:
        return {"flat": label(self.flat.members), "rank": self.flat.rank,
                "defect": self.flat.defect, "dim_BF": self.dim_BF,
                "fiber_rank": self.fiber_rank, "dim_QF": self.dim_QF,
                "dim_L_minus_defect": self.expected_dim_QF}


@dataclass(frozen=True)
class StratumTable:
    dim_L: int
    ambient_dim: int
    rows: tuple[StratumRow, ...]

    def to_json(self) -> dict:
        return {"dim_L": self.dim_L, "ambient_dim": self.ambient_dim,
                "strata": [r.to_json() for r in self.rows]}


def stratum_dimensions(t: SubspaceTuple, seed: int = 0) -> StratumTable:
    """Base, fiber and total dimensions of every stratum with a nonzero point.

    Flats of rank n are skipped: their stratum is the origin alone.
    """
    if len(t) != t.ambient_dim:
        raise ValueError("stratum dimensions need as many subspaces as the ambient dimension")
    lattice = flats_lattice(t)
    o = DualOracle(dual_realization(t))
    rows = []
    for k, flat in enumerate(lattice.flats):
        if flat.rank == t.ambient_dim:
            continue
        dim_B = o.dual.intersection(flat.members).rows
        l = point_in_stratum(t, flat, seed=seed + k, oracle=o)
        fiber = fiber_dimension(t, l, oracle=o)
        dim_Q = dim_B + fiber
        expected = t.total_dim - flat.defect
        if dim_B != t.ambient_dim - flat.rank or dim_Q != expected:
            raise StrataViolation(
                f"flat {label(flat.members)}: dim B_F = {dim_B}, dim Q_F = {dim_Q}, "
                f"expected {t.ambient_dim - flat.rank} and {expected}")
        rows.append(StratumRow(flat, dim_B, fiber, dim_Q, expected))
    return StratumTable(t.total_dim, t.ambient_dim, tuple(rows))


def strata_projection_bound(t: SubspaceTuple, seed: int = 0) -> dict:
    """Check that only the bottom stratum can project onto a divisor of L.

    The projection of Q_F to the matrix space has dimension at most
    ``dim Q_F - 1``; for irreducible BK tuples this is below ``dim L - 1``
    for every nonempty proper flat.
    """
    ok, w = is_bk(t)
    if not ok:
        raise PolymatroidError(f"tuple is not BK; witness {label(w)}")
    ok, w = is_irreducible(t)
    if not ok:
        raise PolymatroidError(f"tuple is not irreducible; witness {label(w)}")
    table = stratum_dimensions(t, seed=seed)
    bottom = min(table.rows, key=lambda r: len(r.flat.members)).flat
    strata = []
    candidates = []
    for r in sorted(table.rows, key=lambda r: (-r.dim_QF, len(r.flat.members), sorted(r.flat.members))):
        bound = r.dim_QF - 1
        if r.flat.members and r.flat.defect <= 0:
            raise StrataViolation(f"proper flat {label(r.flat.members)} has defect {r.flat.defect}")
        if bound >= table.dim_L - 1:
            candidates.append(label(r.flat.members))
        strata.append({"flat": label(r.flat.members), "defect": r.flat.defect,
                       "dim_QF": r.dim_QF, "projection_bound": bound})
    if candidates != [label(bottom.members)]:
        raise StrataViolation(f"codimension-one candidates {candidates} are not just the bottom flat")
    return {"dim_L": table.dim_L, "candidate": label(bottom.members), "strata": strata}
