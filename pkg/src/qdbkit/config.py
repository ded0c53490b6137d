"""Default numerical tolerances and resource caps.

Functions take these as keyword defaults; the command-line interface exposes
the most commonly tuned ones as flags.
"""

#: Relative Hermiticity tolerance, scaled by the matrix norm.
HERM_TOL = 1e-10
#: Smallest eigenvalue tolerated as numerical noise below zero.
PSD_TOL = 1e-12
#: Smallest eigenvalue for a state to count as faithful.
FAITHFUL_TOL = 1e-12
#: Relative singular-value cut for ranks and pseudo-inverses.
RANK_TOL = 1e-10
#: Rank cut used for word-span closure in the irreducibility test.
SPAN_TOL = 1e-9
#: Choi eigenvalue cut when recovering Kraus operators.
KRAUS_CUT = 1e-11
#: Eigenvalues with modulus at least ``1 - PERIPH_TOL`` are peripheral.
PERIPH_TOL = 1e-7
#: Tolerance on unitality and other structural identities of channels.
UNITAL_TOL = 1e-10
#: Tolerance used to accept a symmetry as admissible.
ADMISSIBLE_TOL = 1e-9
#: Superoperator residual below which detailed balance is declared.
QDB_TOL = 1e-9
#: Probabilities at or below this value are treated as zero.
PROB_FLOOR = 1e-300
#: Largest number of words enumerated by exact path statistics.
WORD_CAP = 20_000_000
#: Maximum number of Jacobi sweeps.
MAX_SWEEPS = 80
#: Maximum shifted-QR iterations per eigenvalue.
MAX_QR_ITER = 60
