"""Exact-arithmetic toolkit for toric fans, Frobenius pushforward
decompositions, generalized Thomsen collections, generating systems with
Koszul generation certificates, and the blow-up verification pipeline.

All computations are exact: integers are arbitrary precision and rational
numbers are `fractions.Fraction`.  No floating point is used anywhere.
"""

__version__ = "0.1.0"
