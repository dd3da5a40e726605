"""Shared numerical tolerances.

Plain algebraic identities must hold to ALGEBRA.  Identities whose two sides
accumulate different orderings of matrix products are allowed PRODUCT.
"""

ALGEBRA = 1e-12
PRODUCT = 1e-10
