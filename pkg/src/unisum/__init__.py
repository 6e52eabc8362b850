"""Numerical verification of summation identities built from divergent
series, equidistributed sequences and prime sums."""

__version__ = "0.1.0"
