"""Exact decompositions of periodic matrices over Q, GF(p) and Q(sqrt d)."""

from .decompose import (Certificate, SearchBudget, check_remark29, idempotent_torsion,
                        is_periodic, torsion_order_matrix, torsion_squarezero,
                        verify_certificate)
from .matcore import Matrix, canonical_form, charpoly, minpoly
from .polyring import Poly, cyclotomic
from .scalars import Field

__all__ = ["Certificate", "Field", "Matrix", "Poly", "SearchBudget", "canonical_form",
           "charpoly", "check_remark29", "cyclotomic", "idempotent_torsion", "is_periodic",
           "minpoly", "torsion_order_matrix", "torsion_squarezero", "verify_certificate"]
