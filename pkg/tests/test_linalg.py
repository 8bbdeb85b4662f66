from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st
from sympy.polys.domains import GF as SymGF
from sympy.matrices.normalforms import smith_normal_form
from sympy.polys.matrices import DomainMatrix

from detdisc.fields import GF, QQ, ZZ
from detdisc.linalg import (
    ExactMatrix, LinalgError, det, hermite_form, hermite_smith, integer_inverse, nullspace,
    rank, rank_modp, smith_form, solve_affine, subspace_intersection, subspace_sum,
)

P = 10007


def mat(rows, field=QQ, cols=None):
    return ExactMatrix.from_rows(rows, field, cols=cols)


def sympy_rank(rows, field):
    if field == QQ:
        return sympy.Matrix(rows).rank()
    dm = DomainMatrix([[SymGF(field.modulus)(int(x)) for x in r] for r in rows],
                      (len(rows), len(rows[0])), SymGF(field.modulus))
    return dm.rank()


def random_rows(rng, r, c, bound=4, density=0.6):
    a = rng.integers(-bound, bound + 1, size=(r, c))
    a[rng.random((r, c)) > density] = 0
    return a.tolist()


# --- examples ---------------------------------------------------------------

def test_rank_examples():
    assert rank(ExactMatrix.identity(2)) == 2
    assert rank(ExactMatrix.zeros(3, 4)) == 0
    assert rank(mat([[1, 0, 1], [0, 1, 1], [1, 1, 2]])) == 2


def test_rank_over_ring_refused():
    with pytest.raises(LinalgError):
        rank(mat([[1, 2]], ZZ))


def test_nullspace_examples():
    assert nullspace(mat([[1, 0]])).to_rows() == [[0, 1]]
    assert nullspace(ExactMatrix.identity(3)).rows == 0
    m = mat([[1, 1, 1]])
    ns = nullspace(m)
    assert ns.rows == 2 and rank(ns) == 2
    assert (m @ ns.transpose()).is_zero()


def test_subspace_sum_examples():
    e = lambda *rows: mat(rows, cols=3)
    assert subspace_sum([e([1, 0, 0]), e([0, 1, 0])]).rows == 2
    assert subspace_sum([e([1, 1, 0]), e([1, 0, 0]), e([0, 1, 0])]).rows == 2
    assert subspace_sum([], ambient_dim=3, field=QQ).rows == 0


def test_subspace_intersection_examples():
    e = lambda *rows: mat(rows, cols=3)
    meet = subspace_intersection([e([1, 0, 0], [0, 1, 0]), e([0, 1, 0], [0, 0, 1])])
    assert meet.rows == 1 and rank(subspace_sum([meet, e([0, 1, 0])])) == 1
    L = e([1, 2, 3], [0, 1, 1])
    assert subspace_intersection([L, L]).rows == 2
    assert subspace_intersection([e([1, 0, 0]), e([0, 1, 0])]).rows == 0
    assert subspace_intersection([], ambient_dim=3).rows == 3


def test_smith_examples():
    assert hermite_smith(ExactMatrix.identity(3, ZZ))[1] == [1, 1, 1]
    assert hermite_smith(mat([[6]], ZZ))[1] == [6]
    hnf, diag, left, right = hermite_smith(mat([[2, 0], [0, 3]], ZZ))
    assert diag == [1, 6]
    assert abs(det(left.with_field(QQ))) == 1 and abs(det(right.with_field(QQ))) == 1


def test_solve_examples():
    x, k = solve_affine(ExactMatrix.identity(2), [3, 4])
    assert x == (3, 4) and k.rows == 0
    x, _ = solve_affine(ExactMatrix.zeros(1, 2), [1])
    assert x is None
    x, k = solve_affine(mat([[1, 1]]), [2])
    assert x == (2, 0) and k.to_rows() == [[-1, 1]]


def test_rational_entries():
    m = mat([["1/2", "1/3"], [1, Fraction(2, 3)]])
    assert rank(m) == 1
    assert det(m) == 0


def test_det_against_sympy(rng):
    for _ in range(30):
        rows = random_rows(rng, 4, 4, density=0.9)
        assert det(mat(rows)) == sympy.Matrix(rows).det()


def test_det_modp():
    assert det(mat([[2, 3], [4, 5]], GF(7))) == (2 * 5 - 3 * 4) % 7


# --- properties ---------------------------------------------------------------

@pytest.mark.parametrize("field", [QQ, GF(P)], ids=str)
def test_rank_transpose_and_oracle(rng, field):
    for _ in range(200):
        r, c = rng.integers(1, 7, size=2)
        rows = random_rows(rng, int(r), int(c))
        m = mat(rows, field)
        assert rank(m) == rank(m.transpose()) == sympy_rank(rows, field)


def test_rank_modp_matches_exact(rng):
    for _ in range(50):
        rows = random_rows(rng, 5, 6)
        assert rank_modp(np.array(rows) % P, P) == rank(mat(rows, GF(P)))


@pytest.mark.parametrize("field", [QQ, GF(P)], ids=str)
def test_nullspace_rank_nullity(rng, field):
    for _ in range(100):
        r, c = (int(v) for v in rng.integers(1, 7, size=2))
        m = mat(random_rows(rng, r, c), field)
        ns = nullspace(m)
        assert rank(m) + ns.rows == c
        if ns.rows:
            assert (m @ ns.transpose()).is_zero()


@pytest.mark.parametrize("field", [QQ, GF(P)], ids=str)
def test_modular_law(rng, field):
    for _ in range(100):
        n = int(rng.integers(1, 7))
        A = mat(random_rows(rng, int(rng.integers(1, n + 1)), n), field)
        B = mat(random_rows(rng, int(rng.integers(1, n + 1)), n), field)
        s = subspace_sum([A, B]).rows
        i = subspace_intersection([A, B]).rows
        assert s + i == rank(A) + rank(B)


def int_matmul(a, b):
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a]


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4).flatmap(lambda r: st.integers(1, 4).flatmap(
    lambda c: st.lists(st.lists(st.integers(-12, 12), min_size=c, max_size=c),
                       min_size=r, max_size=r))))
def test_smith_transforms(rows):
    m = mat(rows, ZZ)
    D, L, R = smith_form(m)
    assert int_matmul(int_matmul(L, rows), R) == D
    assert abs(sympy.Matrix(L).det()) == 1 and abs(sympy.Matrix(R).det()) == 1
    diag = [D[i][i] for i in range(min(len(D), len(D[0]))) if D[i][i]]
    assert all(d > 0 for d in diag)
    assert all(b % a == 0 for a, b in zip(diag, diag[1:]))
    off = [D[i][j] for i in range(len(D)) for j in range(len(D[0])) if i != j]
    assert not any(off)
    # independent oracle: sympy's invariant factors
    sym = smith_normal_form(sympy.Matrix(rows), domain=sympy.ZZ)
    assert sorted(abs(sym[i, i]) for i in range(min(sym.shape)) if sym[i, i]) == sorted(diag)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(st.integers(-9, 9), min_size=3, max_size=3), min_size=1, max_size=4))
def test_hermite_transform(rows):
    H, U = hermite_form(mat(rows, ZZ))
    assert int_matmul(U, rows) == H
    assert abs(sympy.Matrix(U).det()) == 1


def test_integer_inverse():
    u = mat([[2, 1], [1, 1]], ZZ)
    inv = integer_inverse(u)
    assert (u.with_field(QQ) @ inv.with_field(QQ)).to_rows() == [[1, 0], [0, 1]]
    with pytest.raises(LinalgError):
        integer_inverse(mat([[2, 0], [0, 1]], ZZ))


def test_value_semantics():
    m = mat([[1, 2], [3, 4]])
    rows = m.to_rows()
    rows[0][0] = 99
    assert m.to_rows()[0][0] == 1
    assert m.transpose().transpose() == m
