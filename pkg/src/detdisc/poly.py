"""Sparse multivariate Laurent polynomials with exact coefficients.

A polynomial lives in a :class:`PolyRing` (ordered variable names plus a
coefficient field) and stores ``{exponent tuple: nonzero coefficient}``.
Exponents may be negative.  Terms are rendered and iterated in
graded-lexicographic order, highest first.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from itertools import permutations
from typing import Mapping, Sequence

from .fields import QQ, FieldSpec


class PolyError(ValueError):
    pass


def _grlex_key(e: tuple) -> tuple:
    return (sum(e), e)


@dataclass(frozen=True)
class PolyRing:
    variables: tuple[str, ...]
    field: FieldSpec = QQ

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        if len(set(self.variables)) != len(self.variables):
            raise PolyError("duplicate variable names")

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise PolyError(f"variable {name!r} not in {self.variables}") from None

    def zero(self) -> "SparsePoly":
        return SparsePoly(self, {})

    def one(self) -> "SparsePoly":
        return self.const(1)

    def const(self, c) -> "SparsePoly":
        c = self.field(c)
        return SparsePoly(self, {(0,) * self.nvars: c} if c else {})

    def var(self, name: str) -> "SparsePoly":
        return self.monomial({name: 1})

    def gens(self) -> list["SparsePoly"]:
        return [self.var(v) for v in self.variables]

    def monomial(self, powers: Mapping[str, int] | Sequence[int], coeff=1) -> "SparsePoly":
        if isinstance(powers, Mapping):
            e = [0] * self.nvars
            for name, k in powers.items():
                e[self.index(name)] += int(k)
            powers = e
        c = self.field(coeff)
        return SparsePoly(self, {tuple(int(k) for k in powers): c} if c else {})

    def from_terms(self, terms: Mapping[tuple, object]) -> "SparsePoly":
        f = self.field
        out = {}
        for e, c in terms.items():
            if len(e) != self.nvars:
                raise PolyError("exponent length does not match the variable count")
            c = f(c)
            if c:
                out[tuple(e)] = c
        return SparsePoly(self, out)

    def __call__(self, x) -> "SparsePoly":
        return x if isinstance(x, SparsePoly) else self.const(x)


class SparsePoly:
    """Immutable sparse Laurent polynomial; see the module docstring."""

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring: PolyRing, terms: dict):
        self.ring = ring
        self.terms = terms  # never mutated after construction
        self._hash = None

    # basic protocol ------------------------------------------------------

    @property
    def field(self) -> FieldSpec:
        return self.ring.field

    @property
    def variables(self) -> tuple[str, ...]:
        return self.ring.variables

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def sorted_terms(self) -> list[tuple[tuple, object]]:
        return sorted(self.terms.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True)

    def leading_term(self) -> tuple[tuple, object]:
        if not self.terms:
            raise PolyError("zero polynomial has no leading term")
        e = max(self.terms, key=_grlex_key)
        return e, self.terms[e]

    def __eq__(self, other):
        if isinstance(other, SparsePoly):
            return self.ring == other.ring and self.terms == other.terms
        if isinstance(other, int):
            return self == self.ring.const(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self.terms.items())))
        return self._hash

    def _coerce(self, other) -> "SparsePoly":
        if isinstance(other, SparsePoly):
            if other.ring != self.ring:
                raise PolyError(f"context mismatch: {self.ring} vs {other.ring}")
            return other
        return self.ring.const(other)

    # arithmetic ----------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        f = self.field
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = f.normalize(out.get(e, 0) + c)
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return SparsePoly(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        f = self.field
        return SparsePoly(self.ring, {e: f.normalize(-c) for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        f = self.field
        acc: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                acc[e] = acc.get(e, 0) + c1 * c2
        out = {}
        for e, c in acc.items():
            c = f.normalize(c)
            if c:
                out[e] = c
        return SparsePoly(self.ring, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            if len(self.terms) != 1:
                raise PolyError("only monomials have negative powers")
            (e, c), = self.terms.items()
            return SparsePoly(self.ring, {tuple(k * a for a in e): self.field.normalize(self.field.inv(c) ** -k)})
        result = self.ring.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def scale(self, c) -> "SparsePoly":
        f = self.field
        c = f(c)
        if not c:
            return self.ring.zero()
        return SparsePoly(self.ring, {e: f.normalize(v * c) for e, v in self.terms.items()})

    def shift(self, e: Sequence[int]) -> "SparsePoly":
        """Multiply by the monomial x^e."""
        return SparsePoly(self.ring, {tuple(a + b for a, b in zip(k, e)): c
                                      for k, c in self.terms.items()})

    def exact_div(self, other: "SparsePoly") -> "SparsePoly":
        """Quotient of an exact division of polynomials (nonnegative exponents)."""
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        f = self.field
        le, lc = other.leading_term()
        inv = f.inv(lc)
        rem = dict(self.terms)
        quot: dict = {}
        while rem:
            e = max(rem, key=_grlex_key)
            q = tuple(a - b for a, b in zip(e, le))
            if min(q, default=0) < 0:
                raise PolyError("division is not exact")
            qc = f.normalize(rem[e] * inv)
            quot[q] = qc
            for e2, c2 in other.terms.items():
                k = tuple(a + b for a, b in zip(q, e2))
                v = f.normalize(rem.get(k, 0) - qc * c2)
                if v:
                    rem[k] = v
                else:
                    rem.pop(k, None)
        return SparsePoly(self.ring, quot)

    # inspection ----------------------------------------------------------

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree(self, name: str) -> int:
        i = self.ring.index(name)
        return max((e[i] for e in self.terms), default=-1)

    def support(self) -> set[str]:
        """Variables that occur with a nonzero exponent."""
        return {v for i, v in enumerate(self.variables) if any(e[i] for e in self.terms)}

    def is_laurent(self) -> bool:
        return any(a < 0 for e in self.terms for a in e)

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def constant_value(self):
        return self.terms.get((0,) * self.ring.nvars, 0)

    # conversion ----------------------------------------------------------

    def to_ring(self, ring: PolyRing) -> "SparsePoly":
        """Re-express in a ring whose variables include every used variable.

        Coefficients are coerced into the target field (e.g. QQ -> GF(p)).
        """
        idx = []
        for i, v in enumerate(self.variables):
            used = any(e[i] for e in self.terms)
            if v in ring.variables:
                idx.append((i, ring.index(v)))
            elif used:
                raise PolyError(f"variable {v!r} is missing from the target ring")
        f = ring.field
        out: dict = {}
        for e, c in self.terms.items():
            ne = [0] * ring.nvars
            for i, j in idx:
                ne[j] = e[i]
            ne = tuple(ne)
            out[ne] = f.normalize(out.get(ne, 0) + f(c))
        return SparsePoly(ring, {e: c for e, c in out.items() if c})

    def __repr__(self):
        return f"SparsePoly({self})"

    def __str__(self):
        return render(self)


def render(p: SparsePoly) -> str:
    """Deterministic text in graded-lex order, e.g. ``c1^2 - 4*c0*c2``."""
    if p.is_zero():
        return "0"
    parts = []
    for e, c in p.sorted_terms():
        mono = "*".join(
            v if k == 1 else f"{v}^{k}" if k > 0 else f"{v}^({k})"
            for v, k in zip(p.variables, e) if k)
        neg = False
        if p.field.is_prime:
            mag = str(c)
        else:
            neg = c < 0
            mag = str(abs(c))
        if mono:
            body = mono if mag == "1" else f"{mag}*{mono}"
        else:
            body = mag
        parts.append(("-" if neg else "+", body))
    s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        s += f" {sign} {body}"
    return s


# --- polynomial matrices and determinants -----------------------------------

@dataclass(frozen=True)
class PolyMatrix:
    rows: int
    cols: int
    entries: tuple  # row-major SparsePoly values over one ring

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise PolyError("entry count does not match the shape")
        rings = {e.ring for e in self.entries}
        if len(rings) > 1:
            raise PolyError("entries do not share a variable context")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[SparsePoly]]) -> "PolyMatrix":
        rows = [list(r) for r in rows]
        return cls(len(rows), len(rows[0]) if rows else 0, tuple(x for r in rows for x in r))

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence[SparsePoly]]) -> "PolyMatrix":
        cols = [list(c) for c in cols]
        return cls.from_rows([list(r) for r in zip(*cols)])

    @property
    def ring(self) -> PolyRing:
        return self.entries[0].ring

    def __getitem__(self, ij) -> SparsePoly:
        i, j = ij
        return self.entries[i * self.cols + j]

    def to_rows(self) -> list[list[SparsePoly]]:
        return [[self[i, j] for j in range(self.cols)] for i in range(self.rows)]

    def map(self, fn) -> "PolyMatrix":
        return PolyMatrix(self.rows, self.cols, tuple(fn(e) for e in self.entries))


MAX_DET_SIZE = 7


def cofactor_det(rows: Sequence[Sequence[SparsePoly]]) -> SparsePoly:
    """Laplace expansion along the first row, memoized on column subsets."""
    n = len(rows)
    ring = rows[0][0].ring
    memo: dict = {}

    def minor(r: int, cols: tuple) -> SparsePoly:
        if r == n:
            return ring.one()
        key = (r, cols)
        if key in memo:
            return memo[key]
        acc = ring.zero()
        for k, c in enumerate(cols):
            a = rows[r][c]
            if a.is_zero():
                continue
            term = a * minor(r + 1, cols[:k] + cols[k + 1:])
            acc = acc - term if k % 2 else acc + term
        memo[key] = acc
        return acc

    return minor(0, tuple(range(n)))


def _clear_row_monomials(rows):
    """Scale each row by a monomial so all exponents are nonnegative."""
    ring = rows[0][0].ring
    shift = [0] * ring.nvars
    out = []
    for row in rows:
        lows = [min((e[i] for p in row for e in p.terms), default=0) for i in range(ring.nvars)]
        lows = [min(0, v) for v in lows]
        out.append([p.shift([-v for v in lows]) for p in row])
        shift = [s + v for s, v in zip(shift, lows)]
    return out, shift


def bareiss_det(rows: Sequence[Sequence[SparsePoly]]) -> SparsePoly:
    """Fraction-free elimination over the polynomial ring (exact divisions)."""
    n = len(rows)
    ring = rows[0][0].ring
    M, shift = _clear_row_monomials([list(r) for r in rows])
    sign = 1
    prev = ring.one()
    for k in range(n - 1):
        piv = next((i for i in range(k, n) if not M[i][k].is_zero()), None)
        if piv is None:
            return ring.zero()
        if piv != k:
            M[k], M[piv] = M[piv], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = M[i][j] * M[k][k] - M[i][k] * M[k][j]
                M[i][j] = num.exact_div(prev) if k else num
            M[i][k] = ring.zero()
        prev = M[k][k]
    d = M[n - 1][n - 1]
    d = d if sign > 0 else -d
    return d.shift(shift)


def det_poly_matrix(m: PolyMatrix) -> SparsePoly:
    if m.rows != m.cols:
        raise PolyError(f"determinant of a non-square {m.rows}x{m.cols} matrix")
    if m.rows > MAX_DET_SIZE:
        raise PolyError(f"determinant size {m.rows} exceeds {MAX_DET_SIZE}")
    rows = m.to_rows()
    if m.rows <= 4:
        return cofactor_det(rows)
    return bareiss_det(rows)


def permutation_det(rows: Sequence[Sequence[SparsePoly]]) -> SparsePoly:
    """Leibniz formula; an independent reference for small sizes."""
    n = len(rows)
    ring = rows[0][0].ring
    acc = ring.zero()
    for perm in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = reduce(lambda a, b: a * b, (rows[i][perm[i]] for i in range(n)), ring.one())
        acc = acc - term if inv % 2 else acc + term
    return acc


# --- calculus, evaluation, substitution -------------------------------------

def partial_derivative(p: SparsePoly, var: str) -> SparsePoly:
    i = p.ring.index(var)
    f = p.field
    out = {}
    for e, c in p.terms.items():
        k = e[i]
        if k:
            v = f.normalize(c * k)
            if v:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = v
    return SparsePoly(p.ring, out)


def evaluate(p: SparsePoly, assignment: Mapping[str, object]):
    """Exact value at a total assignment of the variables."""
    f = p.field
    vals = []
    for v in p.variables:
        if v not in assignment:
            raise PolyError(f"no value for variable {v!r}")
        vals.append(f(assignment[v]))
    total = 0
    for e, c in p.terms.items():
        term = c
        for x, k in zip(vals, e):
            if k > 0:
                term = term * x ** k
            elif k < 0:
                if x == 0:
                    raise PolyError("pole: zero assigned to a variable with a negative exponent")
                term = term * f.inv(x) ** (-k)
            if f.is_prime:
                term %= f.modulus
        total += term
    return f.normalize(total)


def laurent_normalize(p: SparsePoly) -> tuple[tuple[int, ...], SparsePoly]:
    """Split ``p = x^m * core`` with core a polynomial divisible by no variable."""
    if p.is_zero():
        raise PolyError("cannot normalize the zero polynomial")
    mins = tuple(min(e[i] for e in p.terms) for i in range(p.ring.nvars))
    return mins, p.shift([-m for m in mins])


def specialize(p: SparsePoly, substitution: Mapping[str, SparsePoly], target: PolyRing | None = None) -> SparsePoly:
    """Substitute affine-linear forms for some variables.

    Variables not in ``substitution`` are kept (they must exist in the
    target ring).  Substituted variables may not carry negative exponents.
    """
    if target is None:
        target = next(iter(substitution.values())).ring if substitution else p.ring
    images = []
    for i, v in enumerate(p.variables):
        if v in substitution:
            img = substitution[v]
            if img.ring != target:
                img = img.to_ring(target)
            if img.total_degree() > 1 or img.is_laurent():
                raise PolyError(f"image of {v!r} is not affine-linear")
            images.append(img)
        elif any(e[i] for e in p.terms):
            images.append(None)
        else:
            images.append(False)
    keep_idx = {i: target.index(v) for i, v in enumerate(p.variables) if images[i] is None}
    powers: dict = {}
    result = target.zero()
    for e, c in p.terms.items():
        mono = [0] * target.nvars
        term = target.const(c)
        for i, k in enumerate(e):
            if not k:
                continue
            if images[i] is None:
                mono[keep_idx[i]] += k
                continue
            if k < 0:
                raise PolyError(f"substitution into a negative exponent of {p.variables[i]!r}")
            key = (i, k)
            if key not in powers:
                powers[key] = images[i] ** k
            term = term * powers[key]
        result = result + term.shift(mono)
    return result
