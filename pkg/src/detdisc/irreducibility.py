"""Monte-Carlo absolute irreducibility test for exact polynomials.

A polynomial of total degree d is cut by random planes
``v_i -> a_i*s + b_i*t + c_i`` over GF(p).  For a generic plane the number
of absolutely irreducible factors of the bivariate section equals that of
the input, and it is counted with the Ruppert/Gao differential criterion:
the solutions (g, h) of

    d/dt (g/f) = d/ds (h/f),   deg g <= (m-1, n),  deg h <= (m, n-1)

form a space whose dimension is the number of absolutely irreducible
factors of a squarefree f of bidegree (m, n), provided p > n(2m-1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .fields import GF
from .linalg import rank_modp
from .poly import PolyError, PolyRing, SparsePoly, laurent_normalize

DEFAULT_PRIME = 1_000_003
MIN_SECTION_PRIME = 10**6
SECTION_RETRIES = 32
MIN_SECTIONS = 5


class OracleError(ValueError):
    pass


def section_ring(p: int) -> PolyRing:
    return PolyRing(("s", "t"), GF(p))


# --- dense univariate polynomials over GF(p), lists low -> high -------------

def _trim(a: list) -> list:
    while a and a[-1] == 0:
        a.pop()
    return a


def _uadd(a, b, p):
    n = max(len(a), len(b))
    return _trim([((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % p for i in range(n)])


def _uscale(a, c, p):
    return _trim([x * c % p for x in a])


def _usub(a, b, p):
    return _uadd(a, _uscale(b, p - 1, p), p)


def _umul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim([v % p for v in out])


def _udivmod(a, b, p):
    if not b:
        raise ZeroDivisionError("univariate division by zero")
    a = list(a)
    inv = pow(b[-1], -1, p)
    q = [0] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b) and a:
        d = len(a) - len(b)
        c = a[-1] * inv % p
        q[d] = c
        for i, y in enumerate(b):
            a[i + d] = (a[i + d] - c * y) % p
        _trim(a)
    return _trim(q), a


def _uexact(a, b, p):
    q, r = _udivmod(a, b, p)
    if r:
        raise OracleError("univariate division is not exact")
    return q


def _umonic(a, p):
    return _uscale(a, pow(a[-1], -1, p), p) if a else a


def _ugcd(a, b, p):
    while b:
        a, b = b, _udivmod(a, b, p)[1]
    return _umonic(a, p)


def _uderiv(a, p):
    return _trim([i * a[i] % p for i in range(1, len(a))])


# --- bivariate polynomials as F_p[t][s]: list indexed by s-degree ----------

def _btrim(A):
    while A and not A[-1]:
        A.pop()
    return A


def _from_section(f: SparsePoly) -> list:
    p = f.field.modulus
    ds = max((e[0] for e in f.terms), default=-1)
    A = [[] for _ in range(ds + 1)]
    for (i, j), c in f.terms.items():
        row = A[i]
        if len(row) <= j:
            row.extend([0] * (j + 1 - len(row)))
        row[j] = c % p
    return _btrim([_trim(r) for r in A])


def _to_section(A: list, p: int) -> SparsePoly:
    return SparsePoly(section_ring(p), {(i, j): c for i, row in enumerate(A)
                                        for j, c in enumerate(row) if c})


def _bsub(A, B, p):
    n = max(len(A), len(B))
    return _btrim([_usub(A[i] if i < len(A) else [], B[i] if i < len(B) else [], p) for i in range(n)])


def _bmul(A, B, p):
    if not A or not B:
        return []
    out = [[] for _ in range(len(A) + len(B) - 1)]
    for i, a in enumerate(A):
        if a:
            for j, b in enumerate(B):
                if b:
                    out[i + j] = _uadd(out[i + j], _umul(a, b, p), p)
    return _btrim(out)


def _bscale(A, c, p):
    return _btrim([_umul(a, c, p) for a in A])


def _bcontent(A, p):
    g = []
    for a in A:
        g = _ugcd(g, a, p) if g else _umonic(list(a), p)
        if len(g) == 1:
            break
    return g


def _bprimitive(A, p):
    if not A:
        return []
    c = _bcontent(A, p)
    return _btrim([_uexact(a, c, p) if a else [] for a in A])


def _bderiv_s(A, p):
    return _btrim([_uscale(A[i], i, p) for i in range(1, len(A))])


def _bprem(A, B, p):
    lc = B[-1]
    R = [list(a) for a in A]
    e = len(A) - len(B) + 1
    while R and len(R) >= len(B):
        d = len(R) - len(B)
        T = R[-1]
        R = _btrim([_umul(r, lc, p) for r in R])
        shifted = [[] for _ in range(d)] + [_umul(T, b, p) for b in B]
        R = _bsub(R, shifted, p)
        e -= 1
    if e > 0:
        f = [1]
        for _ in range(e):
            f = _umul(f, lc, p)
        R = _bscale(R, f, p)
    return R


def _bgcd_primitive(A, B, p):
    """gcd of two primitive polynomials (primitive PRS); [[1]] if coprime."""
    if len(A) < len(B):
        A, B = B, A
    while B:
        R = _bprem(A, B, p)
        A, B = B, _bprimitive(R, p)
    if len(A) <= 1:
        return [[1]]
    return _bprimitive(A, p)


def _bexact(A, B, p):
    R = [list(a) for a in A]
    Q = [[] for _ in range(max(len(A) - len(B) + 1, 0))]
    while R:
        d = len(R) - len(B)
        if d < 0:
            raise OracleError("bivariate division is not exact")
        q = _uexact(R[-1], B[-1], p)
        Q[d] = q
        R = _bsub(R, [[] for _ in range(d)] + [_umul(q, b, p) for b in B], p)
    return _btrim(Q)


# --- public operations ------------------------------------------------------

def _linear_power_table(a, b, c, d, p):
    """Dense bivariate powers (a s + b t + c)^k for k = 0..d as dicts."""
    out = [{(0, 0): 1}]
    for _ in range(d):
        prev = out[-1]
        nxt: dict = {}
        for (i, j), v in prev.items():
            for (di, dj), w in (((1, 0), a), ((0, 1), b), ((0, 0), c)):
                if w:
                    k = (i + di, j + dj)
                    nxt[k] = (nxt.get(k, 0) + v * w) % p
        out.append(nxt)
    return out


def _reduce_mod(p_: SparsePoly, prime: int) -> dict:
    F = GF(prime)
    out = {}
    for e, c in p_.terms.items():
        if isinstance(c, Fraction) and c.denominator % prime == 0:
            raise OracleError(f"coefficient {c} has a denominator divisible by {prime}")
        v = F(c)
        if v:
            out[e] = v
    return out


def plane_section(p_: SparsePoly, prime: int = DEFAULT_PRIME, seed: int = 0) -> SparsePoly:
    """Restrict ``p_`` to a random affine plane over GF(prime)."""
    if p_.is_zero() or p_.is_laurent():
        raise OracleError("plane sections need a nonzero polynomial without negative exponents")
    d = p_.total_degree()
    if d < 1:
        raise OracleError("plane sections need total degree at least 1")
    if prime <= MIN_SECTION_PRIME or prime <= 2 * d * (2 * d - 1):
        raise OracleError(f"prime {prime} too small for a degree-{d} section")
    if p_.field.is_prime and p_.field.modulus != prime:
        raise OracleError(f"polynomial lives over {p_.field}, not GF({prime})")
    terms = _reduce_mod(p_, prime)
    nv = p_.ring.nvars
    maxdeg = [max((e[i] for e in terms), default=0) for i in range(nv)]
    for attempt in range(SECTION_RETRIES):
        rng = np.random.default_rng([seed, attempt])
        coeffs = rng.integers(0, prime, size=(nv, 3))
        tables = [_linear_power_table(int(a), int(b), int(c), maxdeg[i], prime) if maxdeg[i] else None
                  for i, (a, b, c) in enumerate(coeffs)]
        acc: dict = {}
        for e, c in terms.items():
            cur = {(0, 0): c}
            for i, k in enumerate(e):
                if k:
                    fac = tables[i][k]
                    nxt: dict = {}
                    for (i1, j1), v1 in cur.items():
                        for (i2, j2), v2 in fac.items():
                            key = (i1 + i2, j1 + j2)
                            nxt[key] = (nxt.get(key, 0) + v1 * v2) % prime
                    cur = nxt
            for key, v in cur.items():
                acc[key] = (acc.get(key, 0) + v) % prime
        sec = SparsePoly(section_ring(prime), {k: v for k, v in acc.items() if v})
        if sec.total_degree() == d:
            return sec
    raise OracleError("section degeneracy: degree collapsed on every retry")


def squarefree_part(f: SparsePoly) -> SparsePoly:
    """Product of the distinct irreducible factors of a bivariate f over GF(p)."""
    if f.is_zero():
        raise OracleError("squarefree part of zero")
    p = f.field.modulus
    A = _from_section(f)
    content = _bcontent(A, p)
    prim = _bprimitive(A, p)
    c_sqf = _uexact(content, _ugcd(content, _uderiv(content, p), p), p) if len(content) > 1 else [1]
    if len(prim) > 1:
        g = _bgcd_primitive(prim, _bprimitive(_bderiv_s(prim, p), p), p)
        p_sqf = _bexact(prim, g, p)
    else:
        p_sqf = [[1]]
    return _to_section(_bscale(p_sqf, c_sqf, p), p)


def _gao_system(terms: dict, m: int, n: int, p: int) -> np.ndarray:
    fs = {(i - 1, j): i * c % p for (i, j), c in terms.items() if i}
    ft = {(i, j - 1): j * c % p for (i, j), c in terms.items() if j}
    columns = []
    for i in range(m):
        for j in range(n + 1):
            col: dict = {}
            # d/dt(s^i t^j) * f - s^i t^j * f_t
            if j:
                for (a, b), c in terms.items():
                    k = (a + i, b + j - 1)
                    col[k] = (col.get(k, 0) + j * c) % p
            for (a, b), c in ft.items():
                k = (a + i, b + j)
                col[k] = (col.get(k, 0) - c) % p
            columns.append(col)
    for i in range(m + 1):
        for j in range(n):
            col = {}
            # -(d/ds(s^i t^j) * f - s^i t^j * f_s)
            if i:
                for (a, b), c in terms.items():
                    k = (a + i - 1, b + j)
                    col[k] = (col.get(k, 0) - i * c) % p
            for (a, b), c in fs.items():
                k = (a + i, b + j)
                col[k] = (col.get(k, 0) + c) % p
            columns.append(col)
    keys = sorted({k for col in columns for k in col})
    row_of = {k: r for r, k in enumerate(keys)}
    M = np.zeros((len(keys), len(columns)), dtype=np.int64 if p < 2**31 else object)
    for j, col in enumerate(columns):
        for k, v in col.items():
            M[row_of[k], j] = v
    return M


def absolute_factor_count(f: SparsePoly) -> int:
    """Number of absolutely irreducible factors of a squarefree bivariate f."""
    p = f.field.modulus
    terms = {e: c for e, c in f.terms.items()}
    if not terms:
        raise OracleError("factor count of zero")
    m = max(e[0] for e in terms)
    n = max(e[1] for e in terms)
    if m == 0 and n == 0:
        return 0
    if m == 0:
        terms = {(j, i): c for (i, j), c in terms.items()}
        m, n = n, m
    big = max(m, n)
    if p <= big * (2 * big - 1):
        raise OracleError(f"prime {p} too small for bidegree ({m}, {n})")
    M = _gao_system(terms, m, n, p)
    return M.shape[1] - rank_modp(M, p)


def factor_count_with_multiplicity(f: SparsePoly) -> int:
    """Absolutely irreducible factors of f counted with multiplicity."""
    p = f.field.modulus
    total = 0
    cur = f
    while cur.total_degree() > 0:
        sq = squarefree_part(cur)
        total += absolute_factor_count(sq)
        cur = _to_section(_bexact(_from_section(cur), _from_section(sq), p), p)
    return total


@dataclass(frozen=True)
class IrreducibilityVerdict:
    verdict: str
    confidence: Fraction
    sections_tested: int
    factor_counts: tuple[int, ...]
    seed: int
    prime: int
    notes: tuple[str, ...] = field(default=())

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "confidence": str(self.confidence),
                "confidence_is_heuristic": True, "sections_tested": self.sections_tested,
                "factor_counts": list(self.factor_counts), "seed": self.seed,
                "prime": self.prime, "notes": list(self.notes)}


def irreducibility_verdict(p_: SparsePoly, sections: int = 11, seed: int = 0,
                           prime: int = DEFAULT_PRIME, torus: bool = False) -> IrreducibilityVerdict:
    """Monte-Carlo verdict on absolute irreducibility.

    With ``torus=True`` the input is first stripped of its monomial factor
    (monomials are units on the torus) and a monomial input is reported as
    ``"monomial"``.  Otherwise monomial factors count like any other and
    only constants are reported as ``"monomial"``.
    """
    if sections < MIN_SECTIONS:
        raise OracleError(f"at least {MIN_SECTIONS} sections are required")
    if p_.is_zero():
        return IrreducibilityVerdict("zero", Fraction(1), 0, (), seed, prime)
    notes = []
    if torus:
        mono, p_ = laurent_normalize(p_)
        if any(mono):
            notes.append("stripped monomial factor " + str(list(mono)))
    elif p_.is_laurent():
        raise OracleError("Laurent input needs torus=True")
    if p_.is_constant():
        return IrreducibilityVerdict("monomial", Fraction(1), 0, (), seed, prime, tuple(notes))
    counts = []
    for k in range(sections):
        sec = plane_section(p_, prime, seed=(seed * 1_000_003 + k) % 2**63)
        counts.append(factor_count_with_multiplicity(sec))
    reducible = sum(1 for c in counts if c >= 2)
    if all(c == 1 for c in counts):
        verdict, conf = "absolutely-irreducible", 1 - Fraction(1, 2 ** sections)
    elif 2 * reducible > sections:
        verdict, conf = "reducible", Fraction(reducible, sections)
    else:
        verdict, conf = "inconclusive", Fraction(max(reducible, sections - reducible), sections)
        notes.append("sections disagree")
    return IrreducibilityVerdict(verdict, conf, sections, tuple(counts), seed, prime, tuple(notes))
