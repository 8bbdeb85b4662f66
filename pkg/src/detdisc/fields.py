"""Coefficient domains: the rationals, prime fields, and the integer ring."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from sympy.ntheory import isprime

RATIONALS = "rationals"
PRIME = "prime"
INTEGERS = "integers"


@lru_cache(maxsize=256)
def _checked_prime(p: int) -> bool:
    return p >= 2 and bool(isprime(p))


@dataclass(frozen=True)
class FieldSpec:
    """A coefficient domain.

    ``kind`` is ``"rationals"``, ``"prime"`` (with ``modulus``) or
    ``"integers"``; the last one is a ring marker used by Hermite/Smith forms
    and is rejected by every field-only routine.
    """

    kind: str
    modulus: int | None = None

    def __post_init__(self):
        if self.kind == PRIME:
            if self.modulus is None or not _checked_prime(int(self.modulus)):
                raise ValueError(f"modulus {self.modulus!r} is not a prime")
        elif self.kind in (RATIONALS, INTEGERS):
            if self.modulus is not None:
                raise ValueError(f"{self.kind} takes no modulus")
        else:
            raise ValueError(f"unknown field kind {self.kind!r}")

    @property
    def is_field(self) -> bool:
        return self.kind != INTEGERS

    @property
    def is_prime(self) -> bool:
        return self.kind == PRIME

    def __str__(self):
        if self.kind == PRIME:
            return f"GF({self.modulus})"
        return "QQ" if self.kind == RATIONALS else "ZZ"

    # scalar handling -----------------------------------------------------

    def __call__(self, x):
        """Coerce ``x`` (int, Fraction or ``"p/q"`` string) into this domain."""
        if isinstance(x, str):
            x = Fraction(x)
        if self.kind == PRIME:
            if isinstance(x, Fraction):
                return x.numerator * pow(x.denominator, -1, self.modulus) % self.modulus
            return int(x) % self.modulus
        if self.kind == INTEGERS:
            if isinstance(x, Fraction):
                if x.denominator != 1:
                    raise ValueError(f"{x} is not an integer")
                return x.numerator
            return int(x)
        if isinstance(x, Fraction):
            return x.numerator if x.denominator == 1 else x
        if isinstance(x, int):
            return x
        raise TypeError(f"cannot coerce {type(x).__name__} into {self}")

    def normalize(self, x):
        """Canonical form of a result of ring arithmetic on coerced scalars."""
        if self.kind == PRIME:
            return x % self.modulus
        if isinstance(x, Fraction) and x.denominator == 1:
            return x.numerator
        return x

    def div(self, a, b):
        if b == 0:
            raise ZeroDivisionError("division by zero in " + str(self))
        if self.kind == PRIME:
            return a * pow(b, -1, self.modulus) % self.modulus
        if self.kind == INTEGERS:
            q, r = divmod(a, b)
            if r:
                raise ValueError(f"{a} is not divisible by {b} in ZZ")
            return q
        return self.normalize(Fraction(a) / b)

    def inv(self, a):
        return self.div(1, a)

    def random_element(self, rng, bound: int = 9):
        """Uniform element of GF(p), or an integer in [-bound, bound] otherwise."""
        if self.kind == PRIME:
            return int(rng.integers(0, self.modulus))
        return int(rng.integers(-bound, bound + 1))

    def to_json(self) -> dict:
        if self.kind == PRIME:
            return {"kind": "prime", "p": self.modulus}
        return {"kind": self.kind}


QQ = FieldSpec(RATIONALS)
ZZ = FieldSpec(INTEGERS)


def GF(p: int) -> FieldSpec:
    return FieldSpec(PRIME, int(p))


def scalar_to_json(x):
    """Integers stay numbers; non-integral rationals become ``"p/q"`` strings."""
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return int(x)
