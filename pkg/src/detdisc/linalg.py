"""Exact dense linear algebra over QQ, GF(p) and (for normal forms) ZZ.

Matrices are immutable values.  Over QQ ranks and determinants use
fraction-free (Bareiss) elimination on integer-scaled rows; reduced echelon
forms use exact fractions.  Over GF(p) elimination runs on numpy ``int64``
arrays when ``p < 2**31`` (so products of residues fit) and on object arrays
otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

import numpy as np

from .fields import QQ, ZZ, FieldSpec


class LinalgError(ValueError):
    pass


@dataclass(frozen=True)
class ExactMatrix:
    rows: int
    cols: int
    entries: tuple
    field: FieldSpec = QQ

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise LinalgError(
                f"{len(self.entries)} entries for a {self.rows}x{self.cols} matrix")

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence], field: FieldSpec = QQ, cols: int | None = None):
        rows = [list(r) for r in rows]
        if cols is None:
            if not rows:
                raise LinalgError("column count required for a matrix with no rows")
            cols = len(rows[0])
        for r in rows:
            if len(r) != cols:
                raise LinalgError("ragged rows")
        return cls(len(rows), cols, tuple(field(x) for r in rows for x in r), field)

    @classmethod
    def zeros(cls, rows: int, cols: int, field: FieldSpec = QQ):
        return cls(rows, cols, (0,) * (rows * cols), field)

    @classmethod
    def identity(cls, n: int, field: FieldSpec = QQ):
        return cls(n, n, tuple(1 if i == j else 0 for i in range(n) for j in range(n)), field)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_rows(self) -> list[list]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(self.cols, self.rows,
                           tuple(self[i, j] for j in range(self.cols) for i in range(self.rows)),
                           self.field)

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise LinalgError("shape mismatch in product")
        if self.field != other.field:
            raise LinalgError("field mismatch in product")
        f = self.field
        out = []
        for i in range(self.rows):
            r = self.row(i)
            for j in range(other.cols):
                out.append(f.normalize(sum(r[k] * other[k, j] for k in range(self.cols))))
        return ExactMatrix(self.rows, other.cols, tuple(out), f)

    def apply(self, v: Sequence) -> tuple:
        """Matrix-vector product ``self @ v``."""
        if len(v) != self.cols:
            raise LinalgError("vector length mismatch")
        f = self.field
        return tuple(f.normalize(sum(a * b for a, b in zip(self.row(i), v)))
                     for i in range(self.rows))

    def is_zero(self) -> bool:
        return not any(self.entries)

    def with_field(self, field: FieldSpec) -> "ExactMatrix":
        """Reinterpret entries in another domain (e.g. reduce QQ/ZZ data mod p)."""
        return ExactMatrix(self.rows, self.cols, tuple(field(x) for x in self.entries), field)

    def to_numpy(self) -> np.ndarray:
        if not self.field.is_prime:
            raise LinalgError("numpy export is only defined over GF(p)")
        dtype = np.int64 if self.field.modulus < 2**31 else object
        return np.array(self.entries, dtype=dtype).reshape(self.rows, self.cols)


def vstack(mats: Sequence[ExactMatrix], cols: int | None = None, field: FieldSpec | None = None) -> ExactMatrix:
    if not mats:
        if cols is None:
            raise LinalgError("ambient dimension required for an empty stack")
        return ExactMatrix.zeros(0, cols, field or QQ)
    c, f = mats[0].cols, mats[0].field
    for m in mats:
        if m.cols != c:
            raise LinalgError(f"mismatched ambient dimension: {m.cols} != {c}")
        if m.field != f:
            raise LinalgError("mismatched fields")
    return ExactMatrix(sum(m.rows for m in mats), c, tuple(x for m in mats for x in m.entries), f)


def _require_field(m: ExactMatrix):
    if not m.field.is_field:
        raise LinalgError("rank over ring unsupported; lift to rationals")


# --- elimination kernels ----------------------------------------------------

def _integer_rows(m: ExactMatrix) -> list[list[int]]:
    out = []
    for i in range(m.rows):
        r = m.row(i)
        d = lcm(*(Fraction(x).denominator for x in r)) if r else 1
        out.append([int(Fraction(x) * d) for x in r])
    return out


def _bareiss(M: list[list[int]]) -> tuple[int, list[list[int]], int]:
    """In-place fraction-free echelon form.  Returns (rank, M, sign of row swaps)."""
    nrows = len(M)
    ncols = len(M[0]) if M else 0
    rank, prev, sign = 0, 1, 1
    for c in range(ncols):
        piv = next((i for i in range(rank, nrows) if M[i][c]), None)
        if piv is None:
            continue
        if piv != rank:
            M[rank], M[piv] = M[piv], M[rank]
            sign = -sign
        pr = M[rank]
        pc = pr[c]
        for i in range(rank + 1, nrows):
            ri = M[i]
            a = ri[c]
            for j in range(c + 1, ncols):
                ri[j] = (ri[j] * pc - a * pr[j]) // prev
            ri[c] = 0
        prev = pc
        rank += 1
        if rank == nrows:
            break
    return rank, M, sign


def _rref_modp(A: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    A = A % p
    nrows, ncols = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            A[[r, k]] = A[[k, r]]
        A[r] = A[r] * pow(int(A[r, c]), -1, p) % p
        col = A[:, c].copy()
        col[r] = 0
        hit = np.nonzero(col)[0]
        if hit.size:
            A[hit] = (A[hit] - np.outer(col[hit], A[r])) % p
        pivots.append(c)
        r += 1
    return A[:r], pivots


def rank_modp(A: np.ndarray, p: int) -> int:
    if A.size == 0:
        return 0
    return len(_rref_modp(A, p)[1])


def nullspace_modp(A: np.ndarray, p: int) -> np.ndarray:
    """Kernel basis (as rows) of an integer array read mod p."""
    ncols = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(ncols, dtype=A.dtype)
    R, piv = _rref_modp(A, p)
    free = [c for c in range(ncols) if c not in set(piv)]
    out = np.zeros((len(free), ncols), dtype=A.dtype)
    for k, fc in enumerate(free):
        out[k, fc] = 1
        for i, pc in enumerate(piv):
            out[k, pc] = (-R[i, fc]) % p
    return out


def _rref_rational(m: ExactMatrix) -> tuple[list[list], list[int]]:
    M = [[Fraction(x) for x in m.row(i)] for i in range(m.rows)]
    pivots: list[int] = []
    r = 0
    for c in range(m.cols):
        if r == m.rows:
            break
        piv = next((i for i in range(r, m.rows) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(m.rows):
            if i != r and M[i][c] != 0:
                a = M[i][c]
                M[i] = [x - a * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    return [[QQ.normalize(x) for x in row] for row in M[:r]], pivots


def rref(m: ExactMatrix) -> tuple[ExactMatrix, list[int]]:
    """Reduced row echelon form (nonzero rows only) and pivot columns."""
    _require_field(m)
    if m.field.is_prime:
        if m.rows == 0:
            return m, []
        R, piv = _rref_modp(m.to_numpy(), m.field.modulus)
        return ExactMatrix(R.shape[0], m.cols, tuple(int(x) for x in R.flat), m.field), piv
    rows, piv = _rref_rational(m)
    return ExactMatrix(len(rows), m.cols, tuple(x for r in rows for x in r), m.field), piv


# --- public operations ------------------------------------------------------

def rank(m: ExactMatrix) -> int:
    _require_field(m)
    if m.rows == 0 or m.cols == 0:
        return 0
    if m.field.is_prime:
        return rank_modp(m.to_numpy(), m.field.modulus)
    return _bareiss(_integer_rows(m))[0]


def det(m: ExactMatrix):
    """Determinant; over ZZ and QQ by Bareiss elimination."""
    if m.rows != m.cols:
        raise LinalgError("determinant of a non-square matrix")
    if m.rows == 0:
        return 1
    if m.field.is_prime:
        p = m.field.modulus
        A = m.to_numpy() % p
        d = 1
        for c in range(m.cols):
            nz = np.nonzero(A[c:, c])[0]
            if nz.size == 0:
                return 0
            k = c + int(nz[0])
            if k != c:
                A[[c, k]] = A[[k, c]]
                d = -d
            piv = int(A[c, c])
            d = d * piv % p
            inv = pow(piv, -1, p)
            below = A[c + 1:, c] * inv % p
            A[c + 1:] = (A[c + 1:] - np.outer(below, A[c])) % p
        return d % p
    dens = [lcm(*(Fraction(x).denominator for x in m.row(i))) for i in range(m.rows)]
    r, M, sign = _bareiss(_integer_rows(m))
    if r < m.rows:
        return 0
    scale = 1
    for d in dens:
        scale *= d
    return m.field.normalize(Fraction(sign * M[-1][-1], scale))


def nullspace(m: ExactMatrix) -> ExactMatrix:
    """Rows form a basis of ``{x : m x = 0}``."""
    _require_field(m)
    R, piv = rref(m)
    pset = set(piv)
    free = [c for c in range(m.cols) if c not in pset]
    f = m.field
    out = []
    for fc in free:
        v = [0] * m.cols
        v[fc] = 1
        for i, pc in enumerate(piv):
            v[pc] = f.normalize(-R[i, fc])
        out.append(v)
    return ExactMatrix.from_rows(out, f, cols=m.cols)


def row_basis(m: ExactMatrix) -> ExactMatrix:
    """A basis of the row space (the nonzero rows of the reduced echelon form)."""
    return rref(m)[0]


def subspace_sum(bases: Sequence[ExactMatrix], ambient_dim: int | None = None,
                 field: FieldSpec | None = None) -> ExactMatrix:
    """Row basis of the sum of the row spaces of ``bases``."""
    return row_basis(vstack(list(bases), ambient_dim, field))


def subspace_intersection(bases: Sequence[ExactMatrix], ambient_dim: int | None = None,
                          field: FieldSpec | None = None) -> ExactMatrix:
    """Basis of the intersection, as the kernel of the stacked annihilators.

    The intersection over an empty list is the ambient space.
    """
    bases = list(bases)
    if not bases:
        if ambient_dim is None:
            raise LinalgError("ambient dimension required for an empty intersection")
        return ExactMatrix.identity(ambient_dim, field or QQ)
    annihilators = [nullspace(b) for b in bases]
    return nullspace(vstack(annihilators))


def solve_affine(a: ExactMatrix, b: Sequence):
    """Solve ``a x = b``: returns ``(particular or None, kernel basis)``."""
    _require_field(a)
    if len(b) != a.rows:
        raise LinalgError(f"right-hand side has length {len(b)}, expected {a.rows}")
    f = a.field
    aug = ExactMatrix(a.rows, a.cols + 1,
                      tuple(x for i in range(a.rows) for x in (*a.row(i), f(b[i]))), f)
    R, piv = rref(aug)
    kernel = nullspace(a)
    if piv and piv[-1] == a.cols:
        return None, kernel
    x = [0] * a.cols
    for i, pc in enumerate(piv):
        x[pc] = R[i, a.cols]
    return tuple(x), kernel


# --- integer normal forms ---------------------------------------------------

def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _int_rows(m: ExactMatrix) -> list[list[int]]:
    out = []
    for i in range(m.rows):
        row = []
        for x in m.row(i):
            if Fraction(x).denominator != 1:
                raise LinalgError("integer matrix expected")
            row.append(int(x))
        out.append(row)
    return out


def hermite_form(m: ExactMatrix) -> tuple[list[list[int]], list[list[int]]]:
    """Row Hermite normal form ``H = U m`` with ``U`` unimodular; returns (H, U)."""
    H = _int_rows(m)
    r, c = m.rows, m.cols
    U = [[int(i == j) for j in range(r)] for i in range(r)]
    pr = 0
    for col in range(c):
        if pr == r:
            break
        for i in range(pr + 1, r):
            b = H[i][col]
            if b == 0:
                continue
            a = H[pr][col]
            g, x, y = _xgcd(a, b)
            ag, bg = a // g, b // g
            for M in (H, U):
                top, bot = M[pr], M[i]
                M[pr] = [x * s + y * t for s, t in zip(top, bot)]
                M[i] = [-bg * s + ag * t for s, t in zip(top, bot)]
        if H[pr][col] == 0:
            continue
        if H[pr][col] < 0:
            H[pr] = [-v for v in H[pr]]
            U[pr] = [-v for v in U[pr]]
        piv = H[pr][col]
        for i in range(pr):
            q = H[i][col] // piv
            if q:
                H[i] = [s - q * t for s, t in zip(H[i], H[pr])]
                U[i] = [s - q * t for s, t in zip(U[i], U[pr])]
        pr += 1
    return H, U


def smith_form(m: ExactMatrix) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Return (D, L, R) with ``L m R = D`` diagonal, ``d1 | d2 | ...``, L and R unimodular."""
    D = _int_rows(m)
    r, c = m.rows, m.cols
    L = [[int(i == j) for j in range(r)] for i in range(r)]
    R = [[int(i == j) for j in range(c)] for i in range(c)]

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        L[i], L[j] = L[j], L[i]

    def swap_cols(i, j):
        for M in (D, R):
            for row in M:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row_dst += q * row_src
        D[dst] = [s + q * t for s, t in zip(D[dst], D[src])]
        L[dst] = [s + q * t for s, t in zip(L[dst], L[src])]

    def add_col(dst, src, q):
        for M in (D, R):
            for row in M:
                row[dst] += q * row[src]

    for t in range(min(r, c)):
        while True:
            best = None
            for i in range(t, r):
                for j in range(t, c):
                    if D[i][j] and (best is None or abs(D[i][j]) < abs(D[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                return D, L, R
            swap_rows(t, best[0])
            swap_cols(t, best[1])
            p = D[t][t]
            dirty = False
            for i in range(t + 1, r):
                if D[i][t]:
                    add_row(i, t, -(D[i][t] // p))
                    dirty = dirty or D[i][t] != 0
            for j in range(t + 1, c):
                if D[t][j]:
                    add_col(j, t, -(D[t][j] // p))
                    dirty = dirty or D[t][j] != 0
            if dirty:
                continue
            bad = next(((i, j) for i in range(t + 1, r) for j in range(t + 1, c)
                        if D[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if D[t][t] < 0:
            D[t] = [-v for v in D[t]]
            L[t] = [-v for v in L[t]]
    return D, L, R


def hermite_smith(m: ExactMatrix):
    """Hermite and Smith normal forms of an integer matrix.

    Returns ``(hnf, snf_diagonal, left, right)`` where ``left @ m @ right`` is
    the Smith form whose nonzero diagonal is ``snf_diagonal``.
    """
    H, _ = hermite_form(m)
    D, Lt, Rt = smith_form(m)
    diag = [D[i][i] for i in range(min(m.rows, m.cols)) if D[i][i]]
    mk = lambda rows, cols: ExactMatrix.from_rows(rows, ZZ, cols=cols)
    return mk(H, m.cols), diag, mk(Lt, m.rows), mk(Rt, m.cols)


def integer_inverse(m: ExactMatrix) -> ExactMatrix:
    """Inverse of a unimodular integer matrix."""
    n = m.rows
    aug = ExactMatrix.from_rows(
        [list(m.row(i)) + [int(i == j) for j in range(n)] for i in range(n)], QQ)
    R, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise LinalgError("matrix is singular")
    inv = [[R[i, n + j] for j in range(n)] for i in range(n)]
    if any(Fraction(x).denominator != 1 for row in inv for x in row):
        raise LinalgError("matrix is not unimodular")
    return ExactMatrix.from_rows(inv, ZZ, cols=n)
