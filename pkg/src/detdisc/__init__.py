"""Polymatroids of subspace tuples, restricted determinants and sparse discriminants."""

from .fields import GF, QQ, ZZ, FieldSpec
from .linalg import ExactMatrix
from .poly import PolyMatrix, PolyRing, SparsePoly
from .polymatroid import SubspaceTuple
from .discriminant import LatticePointTuple

__version__ = "0.1.0"
