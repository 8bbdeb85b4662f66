import numpy as np
import pytest
import sympy
from sympy.ntheory import sqrt_mod

from detdisc.fields import QQ
from detdisc.irreducibility import (
    DEFAULT_PRIME, OracleError, absolute_factor_count, factor_count_with_multiplicity,
    irreducibility_verdict, plane_section, section_ring, squarefree_part,
)
from detdisc.poly import PolyRing

P = DEFAULT_PRIME
S = section_ring(P)
s, t = S.gens()


def prime_1_mod_4(start=10**6):
    q = sympy.nextprime(start)
    while q % 4 != 1:
        q = sympy.nextprime(q)
    return q


def lift(c, p=P):
    """Symmetric integer representative of a residue."""
    c = int(c)
    return c - p if c > p // 2 else c


def rational_factor_count(f):
    """Irreducible factors over the rationals, with multiplicity (sympy)."""
    ss, tt = sympy.symbols("s t")
    expr = sum(lift(c, f.field.modulus) * ss ** i * tt ** j for (i, j), c in f.terms.items())
    _, facs = sympy.factor_list(expr, ss, tt)
    return sum(k for g, k in facs if sympy.Poly(g, ss, tt).total_degree() > 0)


def random_bivariate(rng, ring, deg, bound=5):
    terms = {}
    for i in range(deg + 1):
        for j in range(deg + 1 - i):
            if rng.random() < 0.6 or (i, j) == (deg, 0):
                terms[(i, j)] = int(rng.integers(-bound, bound + 1)) or 1
    return ring.from_terms(terms)


# --- self-test examples ---------------------------------------------------------

def test_two_lines():
    assert absolute_factor_count(s ** 2 - t ** 2) == 2


def test_sum_of_squares_splits_absolutely():
    assert absolute_factor_count(s ** 2 + t ** 2) == 2
    q = prime_1_mod_4()
    R = section_ring(q)
    a, b = R.gens()
    i = sqrt_mod(-1, q)
    assert (i * i) % q == q - 1
    assert (a + i * b) * (a - i * b) == a ** 2 + b ** 2
    assert absolute_factor_count(a ** 2 + b ** 2) == 2
    ss, tt = sympy.symbols("s t")
    assert len(sympy.factor_list(ss ** 2 + tt ** 2, extension=sympy.I)[1]) == 2
    assert rational_factor_count(s ** 2 + t ** 2) == 1


def test_hyperbola():
    f = s * t - 1
    assert absolute_factor_count(f) == 1
    # ansatz st - 1 = (a s + b t + c)(d s + e t + g) has no complex solution
    a, b, c, d, e, g, ss, tt = sympy.symbols("a b c d e g s t")
    diff = sympy.expand((a * ss + b * tt + c) * (d * ss + e * tt + g) - (ss * tt - 1))
    eqs = sympy.Poly(diff, ss, tt).coeffs()
    assert sympy.solve(eqs, [a, b, c, d, e, g], dict=True) == []


def test_prime_too_small():
    R = section_ring(7)
    a, b = R.gens()
    with pytest.raises(OracleError):
        absolute_factor_count(a ** 3 - b ** 3 + a)


def test_squarefree_examples():
    sq = squarefree_part((s + t) ** 2)
    assert sq.total_degree() == 1 and (s + t).exact_div(sq).is_constant()
    f = s ** 2 - t ** 3 + 1
    g = squarefree_part(f)
    assert g.total_degree() == 3 and (f.exact_div(g)).is_constant()
    h = s ** 2 * t + s * t ** 2
    assert h.exact_div(squarefree_part(h)).is_constant()


def test_multiplicity():
    assert factor_count_with_multiplicity((s + t) ** 2) == 2
    assert factor_count_with_multiplicity((s + t) ** 2 * (s * t - 1)) == 3


def test_plane_section_examples():
    R = PolyRing(("x", "y"), QQ)
    x, y = R.gens()
    assert plane_section(x, P, seed=1).total_degree() == 1
    sec = plane_section(x ** 2 - y ** 2, P, seed=1)
    assert sec.total_degree() == 2 and absolute_factor_count(sec) == 2
    assert sec == plane_section(x - y, P, seed=1) * plane_section(x + y, P, seed=1)
    with pytest.raises(OracleError):
        plane_section(R.const(3), P)


def test_verdict_examples():
    R = PolyRing(("a", "b", "c", "d", "e", "f"), QQ)
    a, b, c, d, e, f = R.gens()
    assert irreducibility_verdict(a * d - b * c).verdict == "absolutely-irreducible"
    assert irreducibility_verdict(a * (c * f - d * e)).verdict == "reducible"
    assert irreducibility_verdict(R.zero()).verdict == "zero"
    assert irreducibility_verdict((a * d - b * c) ** 2).verdict == "reducible"
    assert irreducibility_verdict(a ** 2 + b ** 2).verdict == "reducible"
    with pytest.raises(OracleError):
        irreducibility_verdict(a, sections=3)


def test_verdict_torus():
    R = PolyRing(("x", "y"), QQ)
    x, y = R.gens()
    v = irreducibility_verdict(x ** -1 * (x * y - 1) * x ** 3, torus=True)
    assert v.verdict == "absolutely-irreducible" and v.notes
    assert irreducibility_verdict(x ** 2 * y, torus=True).verdict == "monomial"
    assert irreducibility_verdict(x * (x * y - 1)).verdict == "reducible"
    with pytest.raises(OracleError):
        irreducibility_verdict(x ** -1 + y)


# --- properties ---------------------------------------------------------------

def test_additivity_on_coprime_products(rng):
    """Integer f, g: counts add up, and dominate the rational factor count."""
    ss, tt = sympy.symbols("s t")
    as_sym = lambda f: sum(lift(c) * ss ** i * tt ** j for (i, j), c in f.terms.items())
    done = 0
    while done < 50:
        f = random_bivariate(rng, S, int(rng.integers(1, 4)), bound=6)
        g = random_bivariate(rng, S, int(rng.integers(1, 4)), bound=6)
        F, G = sympy.Poly(as_sym(f), ss, tt), sympy.Poly(as_sym(g), ss, tt)
        FG = sympy.Poly(as_sym(f * g), ss, tt, modulus=P)
        if F.gcd(G).total_degree() > 0 or not FG.is_sqf:
            continue
        cf, cg = absolute_factor_count(f), absolute_factor_count(g)
        assert absolute_factor_count(f * g) == cf + cg
        assert cf >= rational_factor_count(f) and cg >= rational_factor_count(g)
        done += 1


def test_products_are_reducible(rng):
    R = PolyRing(("x", "y", "z"), QQ)
    hits = 0
    for k in range(20):
        f = R.from_terms({tuple(int(v) for v in rng.integers(0, 2, size=3)): int(rng.integers(1, 5))
                          for _ in range(3)}) + R.var("x")
        g = R.from_terms({tuple(int(v) for v in rng.integers(0, 2, size=3)): int(rng.integers(1, 5))
                          for _ in range(3)}) + R.var("z") + 1
        hits += irreducibility_verdict(f * g, seed=k).verdict == "reducible"
    assert hits == 20


def test_verdict_reproducible():
    R = PolyRing(("a", "b", "c", "d"), QQ)
    a, b, c, d = R.gens()
    p = a * d - b * c + a ** 2
    v1 = irreducibility_verdict(p, sections=7, seed=42)
    v2 = irreducibility_verdict(p, sections=7, seed=42)
    assert v1.to_json() == v2.to_json()
    assert [plane_section(p, P, 9).terms] == [plane_section(p, P, 9).terms]
