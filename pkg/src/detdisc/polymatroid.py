"""Polymatroids realized by tuples of subspaces.

Subsets of the ground set are ``frozenset``s of 0-based indices.  Reports
render them 1-based, as in the usual mathematical notation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .fields import QQ, FieldSpec, GF
from .linalg import ExactMatrix, nullspace, rank, row_basis, subspace_intersection, vstack

MAX_IRREDUCIBLE_GROUND = 20
MAX_LATTICE_GROUND = 16


class PolymatroidError(ValueError):
    pass


def label(subset: Iterable[int]) -> list[int]:
    """1-based sorted rendering of a subset."""
    return sorted(i + 1 for i in subset)


def subsets(m: int, proper: bool = False, nonempty: bool = False):
    """All subsets of range(m), by increasing size then lexicographically."""
    lo = 1 if nonempty else 0
    hi = m - 1 if proper else m
    for k in range(lo, hi + 1):
        for c in combinations(range(m), k):
            yield frozenset(c)


@dataclass(frozen=True)
class SubspaceTuple:
    ambient_dim: int
    field: FieldSpec
    subspaces: tuple[ExactMatrix, ...]
    _ranks: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        normalized = []
        for b in self.subspaces:
            if b.cols != self.ambient_dim:
                raise PolymatroidError(
                    f"generator matrix has {b.cols} columns, ambient dimension is {self.ambient_dim}")
            if b.field != self.field:
                b = b.with_field(self.field)
            normalized.append(row_basis(b) if b.rows else b)
        object.__setattr__(self, "subspaces", tuple(normalized))

    @classmethod
    def from_generators(cls, gens: Sequence[Sequence[Sequence]], ambient_dim: int,
                        field: FieldSpec = QQ) -> "SubspaceTuple":
        return cls(ambient_dim, field,
                   tuple(ExactMatrix.from_rows(g, field, cols=ambient_dim) for g in gens))

    def __len__(self):
        return len(self.subspaces)

    @property
    def dims(self) -> list[int]:
        return [b.rows for b in self.subspaces]

    @property
    def total_dim(self) -> int:
        """dim of the product L_1 x ... x L_m."""
        return sum(self.dims)

    def reduce_mod(self, p: int) -> "SubspaceTuple":
        """The same generators read over GF(p); ranks may drop for unlucky p."""
        F = GF(p)
        return SubspaceTuple(self.ambient_dim, F, tuple(b.with_field(F) for b in self.subspaces))

    def span(self, subset: Iterable[int]) -> ExactMatrix:
        members = [self.subspaces[i] for i in sorted(subset)]
        return row_basis(vstack(members, self.ambient_dim, self.field))

    def to_json(self) -> dict:
        from .fields import scalar_to_json
        return {
            "type": "subspace-tuple",
            "field": self.field.to_json(),
            "ambient_dim": self.ambient_dim,
            "subspaces": [[[scalar_to_json(x) for x in b.row(i)] for i in range(b.rows)]
                          for b in self.subspaces],
        }


def _check_subset(t: SubspaceTuple, subset) -> frozenset:
    s = frozenset(subset)
    bad = [i for i in s if not 0 <= i < len(t)]
    if bad:
        raise PolymatroidError(f"index {bad[0]} out of range for a ground set of size {len(t)}")
    return s


def rank_of(t: SubspaceTuple, subset: Iterable[int]) -> int:
    """dim of the sum of the subspaces indexed by ``subset``."""
    s = _check_subset(t, subset)
    r = t._ranks.get(s)
    if r is None:
        members = [t.subspaces[i] for i in sorted(s)]
        r = rank(vstack(members, t.ambient_dim, t.field)) if members else 0
        t._ranks[s] = r
    return r


def defect_of(t: SubspaceTuple, subset: Iterable[int]) -> int:
    s = _check_subset(t, subset)
    return rank_of(t, s) - len(s)


def _guard(t: SubspaceTuple, cap: int):
    if len(t) == 0:
        raise PolymatroidError("empty tuple")
    if len(t) > cap:
        raise PolymatroidError(
            f"exhaustive check infeasible: ground set {len(t)} exceeds {cap}")


def is_irreducible(t: SubspaceTuple) -> tuple[bool, frozenset | None]:
    """Every nonempty proper subset has positive defect; else a witness."""
    _guard(t, MAX_IRREDUCIBLE_GROUND)
    for s in subsets(len(t), proper=True, nonempty=True):
        if defect_of(t, s) <= 0:
            return False, s
    return True, None


def is_bk(t: SubspaceTuple) -> tuple[bool, frozenset | None]:
    """Total defect zero and no subset of negative defect; else a witness."""
    _guard(t, MAX_IRREDUCIBLE_GROUND)
    for s in subsets(len(t), nonempty=True):
        if defect_of(t, s) < 0:
            return False, s
    full = frozenset(range(len(t)))
    if defect_of(t, full) != 0:
        return False, full
    return True, None


@dataclass(frozen=True)
class Flat:
    members: frozenset
    rank: int
    defect: int

    @property
    def key(self) -> tuple:
        return tuple(sorted(self.members))

    def to_json(self) -> dict:
        return {"members": label(self.members), "rank": self.rank, "defect": self.defect}


def closure(t: SubspaceTuple, subset: Iterable[int]) -> Flat:
    s = _check_subset(t, subset)
    r = rank_of(t, s)
    members = frozenset(j for j in range(len(t)) if j in s or rank_of(t, s | {j}) == r)
    return Flat(members, r, r - len(members))


@dataclass(frozen=True)
class FlatLattice:
    flats: tuple[Flat, ...]
    order: tuple[tuple[int, int], ...]  # (i, j): flats[i] is strictly contained in flats[j]

    @property
    def bottom(self) -> Flat:
        return self.flats[0]

    @property
    def top(self) -> Flat:
        return self.flats[-1]

    def index(self, members: Iterable[int]) -> int:
        key = frozenset(members)
        for i, f in enumerate(self.flats):
            if f.members == key:
                return i
        raise KeyError(label(key))

    def __contains__(self, members) -> bool:
        key = frozenset(members)
        return any(f.members == key for f in self.flats)

    def __len__(self):
        return len(self.flats)

    def to_json(self) -> dict:
        return {"flats": [f.to_json() for f in self.flats],
                "order": [list(p) for p in self.order]}


def flats_lattice(t: SubspaceTuple) -> FlatLattice:
    if len(t) > MAX_LATTICE_GROUND:
        raise PolymatroidError(
            f"ground set {len(t)} exceeds {MAX_LATTICE_GROUND} for lattice enumeration")
    seen = {}
    for s in subsets(len(t)):
        f = closure(t, s)
        seen.setdefault(f.members, f)
    flats = tuple(sorted(seen.values(), key=lambda f: (f.rank, len(f.members), f.key)))
    order = tuple((i, j) for i, a in enumerate(flats) for j, b in enumerate(flats)
                  if i != j and a.members < b.members)
    return FlatLattice(flats, order)


@dataclass(frozen=True)
class DualRealization:
    """Annihilators of the subspaces inside the dual space."""

    ambient_dim: int
    field: FieldSpec
    subspaces: tuple[ExactMatrix, ...]

    def intersection(self, subset: Iterable[int]) -> ExactMatrix:
        return subspace_intersection([self.subspaces[i] for i in sorted(subset)],
                                     self.ambient_dim, self.field)


def dual_realization(t: SubspaceTuple) -> DualRealization:
    duals = []
    for b in t.subspaces:
        if b.rows == 0:
            duals.append(ExactMatrix.identity(t.ambient_dim, t.field))
        else:
            duals.append(nullspace(b))
    return DualRealization(t.ambient_dim, t.field, tuple(duals))


def verify_dual_equality(t: SubspaceTuple) -> dict:
    """Compare rk(I) with the codimension of the intersected annihilators, for all I."""
    if len(t) > MAX_LATTICE_GROUND:
        raise PolymatroidError(f"ground set {len(t)} exceeds {MAX_LATTICE_GROUND}")
    d = dual_realization(t)
    violations = []
    checked = 0
    for s in subsets(len(t)):
        primal = rank_of(t, s)
        dual = t.ambient_dim - d.intersection(s).rows
        checked += 1
        if primal != dual:
            violations.append({"subset": label(s), "rank": primal, "dual_rank": dual})
    return {"checked": checked, "violations": violations}


def check_rank_axioms(t: SubspaceTuple) -> list[str]:
    """Exhaustively test normalization, monotonicity and submodularity."""
    m = len(t)
    r = {}
    for mask in range(1 << m):
        r[mask] = rank_of(t, [i for i in range(m) if mask >> i & 1])
    problems = []
    if r[0] != 0:
        problems.append("rank of the empty set is nonzero")
    for a in range(1 << m):
        for b in range(1 << m):
            if a & b == a and r[a] > r[b]:
                problems.append(f"monotonicity fails for {a:b} within {b:b}")
            if r[a | b] + r[a & b] > r[a] + r[b]:
                problems.append(f"submodularity fails for {a:b}, {b:b}")
    return problems


def random_subspace_tuple(rng: np.random.Generator, m: int, n: int, field: FieldSpec = QQ,
                          bound: int = 3, pool: int | None = None) -> SubspaceTuple:
    """Random tuple of ``m`` subspaces of an ``n``-space with shared generators.

    Generators are drawn from a small pool of random vectors so that sums and
    intersections coincide often enough to give non-trivial flat lattices.
    """
    pool = pool if pool is not None else n + 1
    vecs = [[field.random_element(rng, bound) for _ in range(n)] for _ in range(pool)]
    gens = []
    for _ in range(m):
        k = int(rng.integers(0, n + 1))
        idx = rng.choice(pool, size=min(k, pool), replace=False)
        gens.append([vecs[i] for i in idx])
    return SubspaceTuple.from_generators(gens, n, field)
