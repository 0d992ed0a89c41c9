"""Numerical tolerances shared by every module.

Kept in one table so that a change of policy is a one-line edit.
"""

#: Structural checks: normalization, Hermiticity, orthonormality, trace.
STRUCTURAL = 1e-10

#: Equality assertions between two independently computed quantities.
EQUALITY = 1e-12

#: A branch (or forced outcome) with probability below this is impossible.
ZERO_PROBABILITY = 1e-12

#: Half-width of the band around interval2 == 0 treated as lightlike.
LIGHTLIKE_BAND = 1e-12

#: Coordinates closer than this count as the same spacetime point.
COINCIDENCE = 1e-12

#: Largest joint Hilbert-space dimension the dense engine accepts.
MAX_HILBERT_DIM = 4096

#: Largest number of outcome histories an exact enumeration may expand.
MAX_BRANCHES = 10**6
