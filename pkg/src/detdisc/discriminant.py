"""Square sparse polynomial systems: restricted determinants, the
singular-point polynomial ``G(c, x) = det || sum_a c_a x^a a ||``, linear vs
nonlinear tuple classification, univariate elimination, and tangent-rank
estimates of the discriminant's codimension.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from .fields import GF, QQ, ZZ, FieldSpec
from .irreducibility import DEFAULT_PRIME, IrreducibilityVerdict, irreducibility_verdict
from .linalg import (
    ExactMatrix,
    det as matrix_det,
    hermite_form,
    integer_inverse,
    nullspace_modp,
    rank,
    rank_modp,
    smith_form,
)
from .poly import (
    PolyMatrix,
    PolyRing,
    SparsePoly,
    bareiss_det,
    det_poly_matrix,
    evaluate,
    laurent_normalize,
    partial_derivative,
    specialize,
)
from .polymatroid import SubspaceTuple, is_bk, is_irreducible, label

MIN_Z_PRIME = 1_000_003
Z_RETRIES = 64
MAX_LIR_SET = 12
MAX_LIR_RANK = 6
MAX_UNIVARIATE_DEGREE = 8


class PreconditionError(ValueError):
    """Input tuple violates a hypothesis; ``witness`` is the offending subset."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class LatticePointTuple:
    ambient_rank: int
    sets: tuple[tuple[tuple[int, ...], ...], ...]

    def __post_init__(self):
        sets = []
        for k, A in enumerate(self.sets):
            pts = tuple(tuple(int(v) for v in a) for a in A)
            for a in pts:
                if len(a) != self.ambient_rank:
                    raise ValueError(f"set {k + 1}: point {a} has the wrong length")
            if len(set(pts)) != len(pts):
                raise ValueError(f"set {k + 1} has repeated points")
            if (0,) * self.ambient_rank not in pts:
                raise ValueError(f"set {k + 1} does not contain the origin")
            sets.append(pts)
        object.__setattr__(self, "sets", tuple(sets))

    def __len__(self):
        return len(self.sets)

    def origin_index(self, i: int) -> int:
        return self.sets[i].index((0,) * self.ambient_rank)

    def to_json(self) -> dict:
        return {"type": "lattice-tuple", "ambient_rank": self.ambient_rank,
                "sets": [[list(a) for a in A] for A in self.sets]}


def _point_matrix(A) -> ExactMatrix:
    n = len(A[0])
    return ExactMatrix.from_rows([list(a) for a in A], ZZ, cols=n)


@dataclass(frozen=True)
class TauBlock:
    """Integer matrices whose columns are the points of each set."""

    blocks: tuple[ExactMatrix, ...]
    ranks: tuple[int, ...]

    @property
    def matrix_space_dim(self) -> int:
        return sum(self.ranks)

    def apply(self, lambdas: Sequence[Sequence], field: FieldSpec) -> ExactMatrix:
        """Columns ``tau_A(lambda_A) = sum_a lambda_a * a``, as a square matrix."""
        cols = [b.with_field(field).apply(lam) for b, lam in zip(self.blocks, lambdas)]
        n = self.blocks[0].rows
        return ExactMatrix.from_rows([[cols[j][i] for j in range(len(cols))] for i in range(n)], field)


def tau_blocks(t: LatticePointTuple) -> TauBlock:
    blocks = tuple(_point_matrix(A).transpose() for A in t.sets)
    ranks = tuple(rank(b.with_field(QQ)) for b in blocks)
    return TauBlock(blocks, ranks)


def spans(t: LatticePointTuple) -> SubspaceTuple:
    """Rational spans of the sets, with bases taken from Hermite forms."""
    gens = []
    for A in t.sets:
        H, _ = hermite_form(_point_matrix(A))
        gens.append([r for r in H if any(r)])
    return SubspaceTuple.from_generators(gens, t.ambient_rank, QQ)


def coeff_name(i: int, j: int) -> str:
    return f"c{i + 1}_{j}"


def torus_name(k: int) -> str:
    return f"x{k + 1}"


@dataclass(frozen=True)
class DiscriminantInstance:
    tuple: LatticePointTuple
    ring: PolyRing
    ring_pi: PolyRing
    coeff_vars: tuple[str, ...]
    origin_vars: tuple[str, ...]
    torus_vars: tuple[str, ...]
    matrix: PolyMatrix
    G: SparsePoly
    G_pi: SparsePoly
    system: tuple[SparsePoly, ...]
    _modp: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    @property
    def coeff_space_dim(self) -> int:
        return len(self.coeff_vars)

    def to_json(self) -> dict:
        return {"coefficient_variables": list(self.coeff_vars),
                "eliminated": list(self.origin_vars),
                "torus_variables": list(self.torus_vars),
                "G": str(self.G), "G_pi": str(self.G_pi),
                "system": [str(f) for f in self.system]}


def build_instance(t: LatticePointTuple) -> DiscriminantInstance:
    n = t.ambient_rank
    if len(t) != n:
        raise PreconditionError(f"square systems only: {len(t)} sets in rank {n}")
    coeff = [coeff_name(i, j) for i, A in enumerate(t.sets) for j in range(len(A))]
    origin = [coeff_name(i, t.origin_index(i)) for i in range(len(t))]
    xs = [torus_name(k) for k in range(n)]
    ring = PolyRing(tuple(coeff + xs), QQ)
    ring_pi = PolyRing(tuple(v for v in coeff if v not in origin) + tuple(xs), QQ)
    columns, system = [], []
    for i, A in enumerate(t.sets):
        terms = [ring.monomial({coeff_name(i, j): 1, **{xs[k]: a[k] for k in range(n)}})
                 for j, a in enumerate(A)]
        column = [sum((term.scale(a[r]) for term, a in zip(terms, A)), ring.zero())
                  for r in range(n)]
        columns.append(column)
        system.append(sum(terms, ring.zero()))
    matrix = PolyMatrix.from_columns(columns)
    G = det_poly_matrix(matrix)
    subst = {}
    for i, A in enumerate(t.sets):
        o = t.origin_index(i)
        subst[coeff_name(i, o)] = -sum((ring_pi.var(coeff_name(i, j)) for j in range(len(A)) if j != o),
                                       ring_pi.zero())
    G_pi = specialize(G, subst, ring_pi)
    return DiscriminantInstance(t, ring, ring_pi, tuple(coeff), tuple(origin), tuple(xs),
                                matrix, G, G_pi, tuple(system))


def restricted_determinant(s: SubspaceTuple) -> SparsePoly:
    """det of the matrix whose i-th column is a generic vector of L_i."""
    n = s.ambient_dim
    if len(s) != n:
        raise PreconditionError(f"need {n} subspaces in dimension {n}, got {len(s)}")
    names = [f"u{i + 1}_{j + 1}" for i, b in enumerate(s.subspaces) for j in range(b.rows)]
    ring = PolyRing(tuple(names) or ("u",), s.field)
    columns = []
    for i, b in enumerate(s.subspaces):
        col = [ring.zero() for _ in range(n)]
        for j in range(b.rows):
            u = ring.var(f"u{i + 1}_{j + 1}")
            col = [c + u.scale(b[j, r]) for r, c in enumerate(col)]
        columns.append(col)
    return det_poly_matrix(PolyMatrix.from_columns(columns))


def theorem_a_check(s: SubspaceTuple, sections: int = 11, seed: int = 0,
                    prime: int | None = None) -> IrreducibilityVerdict:
    """Irreducibility verdict for the determinant restricted to L_1 x ... x L_n."""
    d = restricted_determinant(s)
    if prime is None:
        prime = s.field.modulus if s.field.is_prime else DEFAULT_PRIME
    return irreducibility_verdict(d, sections=sections, seed=seed, prime=prime)


def check_irreducible_bk(t: LatticePointTuple) -> SubspaceTuple:
    sp = spans(t)
    ok, w = is_bk(sp)
    if not ok:
        raise PreconditionError(f"not a BK tuple; witness subset {label(w)}", w)
    ok, w = is_irreducible(sp)
    if not ok:
        raise PreconditionError(f"not irreducible; witness subset {label(w)}", w)
    return sp


def theorem_b_check(t: LatticePointTuple, sections: int = 11, seed: int = 0,
                    prime: int = DEFAULT_PRIME) -> IrreducibilityVerdict:
    """Irreducibility verdict for G after the constant-coefficient substitution."""
    check_irreducible_bk(t)
    inst = build_instance(t)
    return irreducibility_verdict(inst.G_pi, sections=sections, seed=seed, prime=prime, torus=True)


# --- linear / nonlinear classification --------------------------------------

@dataclass(frozen=True)
class TupleClassification:
    kind: str  # "lir" or "nir"
    unimodular: tuple[tuple[int, ...], ...] | None = None
    shifts: tuple[tuple[int, ...], ...] | None = None
    evidence: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "lir":
            out["unimodular"] = [list(r) for r in self.unimodular]
            out["shifts"] = [list(s) for s in self.shifts]
        else:
            out["evidence"] = self.evidence
        return out


def _complete_basis(D: list[tuple[int, ...]], n: int) -> list[list[int]] | None:
    """Extend primitive independent vectors to a basis of Z^n, or None."""
    if not D:
        return [[int(i == j) for j in range(n)] for i in range(n)]
    M = ExactMatrix.from_rows([list(d) for d in D], ZZ, cols=n)
    S, L, R = smith_form(M)
    diag = [S[i][i] for i in range(len(D))]
    if any(abs(v) != 1 for v in diag):
        return None
    Rinv = integer_inverse(ExactMatrix.from_rows(R, ZZ, cols=n))
    return [list(d) for d in D] + [list(Rinv.row(i)) for i in range(len(D), n)]


def _maps_into_simplices(U: ExactMatrix, t: LatticePointTuple, shifts) -> bool:
    n = t.ambient_rank
    allowed = {(0,) * n} | {tuple(int(i == j) for j in range(n)) for i in range(n)}
    for A, b in zip(t.sets, shifts):
        for a in A:
            if U.apply([x - y for x, y in zip(a, b)]) not in allowed:
                return False
    return True


def classify_lir(t: LatticePointTuple) -> TupleClassification:
    """Search base points b_i in A_i so that the differences A_i - b_i use at
    most n distinct nonzero vectors forming part of a lattice basis."""
    n = t.ambient_rank
    if n > MAX_LIR_RANK or any(len(A) > MAX_LIR_SET for A in t.sets):
        raise ValueError(f"classification limited to rank <= {MAX_LIR_RANK} "
                         f"and sets of size <= {MAX_LIR_SET}")
    sizes = [len(A) for A in t.sets]
    refuted = Counter()
    total = int(np.prod(sizes)) if sizes else 1

    def remaining(i):
        return int(np.prod(sizes[i:])) if i < len(sizes) else 1

    def search(i, bases, D):
        if i == len(t.sets):
            basis = _complete_basis(D, n)
            if basis is None:
                refuted["not a primitive system"] += 1
                return None
            U = integer_inverse(ExactMatrix.from_rows(basis, ZZ, cols=n).transpose())
            return U, list(bases)
        for b in t.sets[i]:
            newD = list(D)
            for a in t.sets[i]:
                d = tuple(x - y for x, y in zip(a, b))
                if any(d) and d not in newD:
                    newD.append(d)
            if len(newD) > n:
                refuted["more than n difference vectors"] += remaining(i + 1)
                continue
            if newD and rank(ExactMatrix.from_rows([list(v) for v in newD], QQ, cols=n)) < len(newD):
                refuted["dependent difference vectors"] += remaining(i + 1)
                continue
            found = search(i + 1, bases + [b], newD)
            if found:
                return found
        return None

    found = search(0, [], [])
    if found:
        U, shifts = found
        if not _maps_into_simplices(U, t, shifts) or abs(matrix_det(U.with_field(QQ))) != 1:
            raise AssertionError("lir witness failed re-verification")
        return TupleClassification("lir", tuple(tuple(U.row(i)) for i in range(n)),
                                   tuple(tuple(b) for b in shifts))
    return TupleClassification("nir", evidence={"base_point_choices": total,
                                                "refuted": dict(sorted(refuted.items()))})


# --- univariate elimination --------------------------------------------------

def _cname(a: int) -> str:
    return f"c{a}" if a >= 0 else f"cm{-a}"


def sylvester_matrix(F: Sequence[SparsePoly], H: Sequence[SparsePoly]) -> list[list[SparsePoly]]:
    """Sylvester matrix from coefficient lists given low -> high degree."""
    d, e = len(F) - 1, len(H) - 1
    ring = F[0].ring
    size = d + e
    rows = []
    for k in range(e):
        row = [ring.zero()] * size
        for i, c in enumerate(reversed(F)):
            row[k + i] = c
        rows.append(row)
    for k in range(d):
        row = [ring.zero()] * size
        for i, c in enumerate(reversed(H)):
            row[k + i] = c
        rows.append(row)
    return rows


def _primitive_up_to_sign(p: SparsePoly) -> SparsePoly:
    from math import gcd
    if p.is_zero():
        return p
    g = 0
    for c in p.terms.values():
        g = gcd(g, int(c))
    p = p.scale(Fraction(1, g))
    return p if p.leading_term()[1] > 0 else -p


def univariate_discriminant(a_set: Sequence) -> SparsePoly:
    """Primitive discriminantal polynomial of ``sum_a c_a x^a`` (one variable).

    Sylvester resultant of the polynomial and its torus derivative ``x f'``
    (both shifted to nonnegative exponents), with the powers of the extreme
    coefficients removed.
    """
    pts = []
    for a in a_set:
        if isinstance(a, (tuple, list)):
            if len(a) != 1:
                raise ValueError("univariate elimination needs points in Z^1")
            a = a[0]
        pts.append(int(a))
    if 0 not in pts or len(set(pts)) != len(pts):
        raise ValueError("points must be distinct and include 0")
    pts.sort()
    lo, hi = pts[0], pts[-1]
    if hi - lo > MAX_UNIVARIATE_DEGREE:
        raise ValueError(f"degree {hi - lo} exceeds {MAX_UNIVARIATE_DEGREE}")
    ring = PolyRing(tuple(_cname(a) for a in pts), QQ)
    if len(pts) < 2:
        return ring.one()
    F = [ring.zero()] * (hi - lo + 1)
    H = [ring.zero()] * (hi - lo + 1)
    for a in pts:
        F[a - lo] = ring.var(_cname(a))
        H[a - lo] = ring.var(_cname(a)).scale(a)
    while H and H[-1].is_zero():
        H.pop()
    if len(H) <= 1:
        return ring.one()
    res = bareiss_det(sylvester_matrix(F, H))
    if res.is_zero():
        return res
    for a in (lo, hi):
        i = ring.index(_cname(a))
        k = min(e[i] for e in res.terms)
        if k:
            res = res.shift([-k if j == i else 0 for j in range(ring.nvars)])
    return _primitive_up_to_sign(res)


# --- sampling the incidence variety and tangent ranks ----------------------

@dataclass(frozen=True)
class ZPoint:
    x: tuple[int, ...]
    c: tuple[int, ...]  # aligned with DiscriminantInstance.coeff_vars
    prime: int
    seed: int
    attempts: int = 1

    def assignment(self, inst: DiscriminantInstance) -> dict:
        out = dict(zip(inst.coeff_vars, self.c))
        out.update(zip(inst.torus_vars, self.x))
        return out

    def to_json(self) -> dict:
        return {"x": list(self.x), "c": list(self.c), "prime": self.prime,
                "seed": self.seed, "attempts": self.attempts}


def _modp(inst: DiscriminantInstance, p: int) -> dict:
    cache = inst._modp.get(p)
    if cache is None:
        R = PolyRing(inst.ring.variables, GF(p))
        G = inst.G.to_ring(R)
        system = [f.to_ring(R) for f in inst.system]
        eqs = system + [G]
        order = list(inst.torus_vars) + list(inst.coeff_vars)
        jac = [[partial_derivative(e, v) for v in order] for e in eqs]
        cache = {"ring": R, "G": G, "system": system, "jacobian": jac, "order": order}
        inst._modp[p] = cache
    return cache


def _monomial_value(a, x, p) -> int:
    v = 1
    for ak, xk in zip(a, x):
        v = v * pow(xk, ak, p) % p
    return v


def is_z_point(inst: DiscriminantInstance, z: ZPoint) -> bool:
    m = _modp(inst, z.prime)
    if any(v % z.prime == 0 for v in z.x):
        return False
    asg = z.assignment(inst)
    return all(evaluate(f, asg) == 0 for f in m["system"]) and evaluate(m["G"], asg) == 0


def _interpolate(us: list[int], vs: list[int], p: int) -> list[int]:
    """Coefficients (low -> high) of the polynomial through (us, vs) over GF(p)."""
    n = len(us)
    coeffs = [0] * n
    for i in range(n):
        basis = [1]
        denom = 1
        for j in range(n):
            if j != i:
                basis = [(b_prev - us[j] * b) % p for b, b_prev in zip(basis + [0], [0] + basis)]
                denom = denom * (us[i] - us[j]) % p
        scale = vs[i] * pow(denom, -1, p) % p
        for k in range(n):
            coeffs[k] = (coeffs[k] + scale * basis[k]) % p
    return coeffs


def _roots_modp(coeffs: list[int], p: int) -> np.ndarray:
    u = np.arange(p, dtype=np.int64)
    acc = np.zeros(p, dtype=np.int64)
    for c in reversed(coeffs):
        acc = (acc * u + c) % p
    return np.nonzero(acc == 0)[0]


def sample_z_point(inst: DiscriminantInstance, p: int = MIN_Z_PRIME, seed: int = 0) -> ZPoint:
    """A point (x, c) with every f_A(x) = 0 and G(c, x) = 0 over GF(p)."""
    if p < MIN_Z_PRIME:
        raise ValueError(f"sampling prime must be at least {MIN_Z_PRIME}")
    if p >= 2**31:
        raise ValueError("sampling prime must stay below 2**31")
    m = _modp(inst, p)
    t = inst.tuple
    n = t.ambient_rank
    offsets = np.cumsum([0] + [len(A) for A in t.sets])
    N = inst.coeff_space_dim
    deg = n + 1
    rng = np.random.default_rng(seed)
    for attempt in range(1, Z_RETRIES + 1):
        x = [int(v) for v in rng.integers(1, p, size=n)]
        conds = np.zeros((len(t), N), dtype=np.int64)
        for i, A in enumerate(t.sets):
            for j, a in enumerate(A):
                conds[i, offsets[i] + j] = _monomial_value(a, x, p)
        K = nullspace_modp(conds, p)
        w0 = rng.integers(0, p, size=K.shape[0])
        w1 = rng.integers(0, p, size=K.shape[0])
        c0 = (w0 @ K) % p
        c1 = (w1 @ K) % p
        us = list(range(deg + 1))
        vs = []
        for u in us:
            c = [(int(a) + u * int(b)) % p for a, b in zip(c0, c1)]
            asg = dict(zip(inst.coeff_vars, c))
            asg.update(zip(inst.torus_vars, x))
            vs.append(evaluate(m["G"], asg))
        coeffs = _interpolate(us, vs, p)
        if not any(coeffs):
            ustar = int(rng.integers(0, p))
        else:
            roots = _roots_modp(coeffs, p)
            if roots.size == 0:
                continue
            ustar = int(roots[int(rng.integers(0, roots.size))])
        c = tuple((int(a) + ustar * int(b)) % p for a, b in zip(c0, c1))
        z = ZPoint(tuple(x), c, p, seed, attempt)
        if not is_z_point(inst, z):
            raise AssertionError("sampled point fails the defining equations")
        return z
    raise RuntimeError("no F_p root found")


def transport_to_identity(inst: DiscriminantInstance, z: ZPoint) -> ZPoint:
    """Move a witness to x = (1,...,1) by the torus action c_a -> c_a x^a."""
    p = z.prime
    c = []
    k = 0
    for A in inst.tuple.sets:
        for a in A:
            c.append(z.c[k] * _monomial_value(a, z.x, p) % p)
            k += 1
    return ZPoint((1,) * len(z.x), tuple(c), p, z.seed, z.attempts)


@dataclass(frozen=True)
class CodimEstimate:
    codim: int | None
    fiber_dim: int | None
    votes: dict
    trials: int
    discarded: int
    seed: int
    prime: int

    @property
    def agreement(self) -> float:
        if self.codim is None:
            return 0.0
        return self.votes.get(f"{self.codim},{self.fiber_dim}", 0) / self.trials

    @property
    def discard_rate(self) -> float:
        return self.discarded / self.trials

    def to_json(self) -> dict:
        return {"codim": self.codim, "fiber_dim": self.fiber_dim, "votes": self.votes,
                "trials": self.trials, "discarded": self.discarded,
                "agreement": self.agreement, "seed": self.seed, "prime": self.prime}


def tangent_estimate(inst: DiscriminantInstance, z: ZPoint) -> tuple[int, int] | None:
    """(codim, fiber_dim) read off the tangent space of the sampled variety at z.

    Returns None when the Jacobian of the defining equations is rank deficient.
    """
    p = z.prime
    m = _modp(inst, p)
    asg = z.assignment(inst)
    J = np.array([[evaluate(d, asg) for d in row] for row in m["jacobian"]], dtype=np.int64)
    if rank_modp(J.copy(), p) < J.shape[0]:
        return None
    K = nullspace_modp(J, p)
    n = len(inst.torus_vars)
    image = rank_modp(K[:, n:].copy(), p) if K.shape[0] else 0
    return inst.coeff_space_dim - image, K.shape[0] - image


def estimate_codim(inst: DiscriminantInstance, p: int = MIN_Z_PRIME, trials: int = 20,
                   seed: int = 0) -> CodimEstimate:
    if trials < 10:
        raise ValueError("at least 10 trials are required")
    votes = Counter()
    discarded = 0
    for k in range(trials):
        z = sample_z_point(inst, p, seed=int(np.random.SeedSequence([seed, k]).generate_state(1)[0]))
        est = tangent_estimate(inst, z)
        if est is None:
            discarded += 1
            votes["discarded"] += 1
        else:
            votes[f"{est[0]},{est[1]}"] += 1
    real = [(k, v) for k, v in votes.items() if k != "discarded"]
    codim = fiber = None
    if real:
        best = max(real, key=lambda kv: (kv[1], kv[0]))[0]
        codim, fiber = (int(v) for v in best.split(","))
    return CodimEstimate(codim, fiber, dict(sorted(votes.items())), trials, discarded, seed, p)


# --- random configurations --------------------------------------------------

@dataclass(frozen=True)
class ExperimentResult:
    fraction: float
    trials: int
    failures: tuple
    seed: int

    def to_json(self) -> dict:
        return {"fraction": self.fraction, "trials": self.trials, "seed": self.seed,
                "failures": list(self.failures)}


def random_sublattice_generators(rng: np.random.Generator, dim: int, n: int, bound: int) -> list[list[int]]:
    while True:
        gens = rng.integers(-bound, bound + 1, size=(dim, n)).tolist()
        if rank(ExactMatrix.from_rows(gens, QQ, cols=n)) == dim:
            return gens


def random_tuple_experiment(dims: Sequence[int], ambient: int, trials: int = 1000,
                            bound: int = 9, seed: int = 0) -> ExperimentResult:
    """Fraction of random sublattice tuples with prescribed dims that are irreducible."""
    if any(d < 2 for d in dims):
        raise ValueError("every dimension must be at least 2")
    if any(d > ambient for d in dims):
        raise ValueError("dimension exceeds the ambient rank")
    rng = np.random.default_rng(seed)
    ok = 0
    failures = []
    for k in range(trials):
        gens = [random_sublattice_generators(rng, d, ambient, bound) for d in dims]
        flag, w = is_irreducible(SubspaceTuple.from_generators(gens, ambient, QQ))
        if flag:
            ok += 1
        else:
            failures.append({"trial": k, "witness": label(w), "generators": gens})
    return ExperimentResult(ok / trials, trials, tuple(failures), seed)


def random_lattice_tuple(rng: np.random.Generator, dims: Sequence[int], n: int, bound: int) -> LatticePointTuple:
    """Sets {0, p_1, ..., p_d} with the p_j spanning a rank-d sublattice."""
    sets = []
    for d in dims:
        while True:
            gens = random_sublattice_generators(rng, d, n, bound)
            pts = [tuple(g) for g in gens]
            if len(set(pts)) == len(pts) and (0,) * n not in pts:
                break
        sets.append([(0,) * n] + pts)
    return LatticePointTuple(n, tuple(tuple(A) for A in sets))
