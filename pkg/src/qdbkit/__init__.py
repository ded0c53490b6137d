"""Detailed balance for quantum channels and instruments.

Submodules
----------
linalg
    Dense complex linear algebra on top of compiled Jacobi and QR kernels.
channel
    Kraus channels, invariant states, KMS adjoints, cycles and dilations.
symmetry
    Unitary and anti-unitary symmetries, detailed-balance checks and search.
cds
    A parametrised family of two-Kraus cyclic channels with closed forms.
instrument
    Instruments, POVMs and the construction of detailed-balanced instruments.
statistics
    Word distributions, entropy production and Monte Carlo estimates.
pgfcs
    Equality of finitely correlated states via cross transfer operators.
markov
    Classical chains, detailed balance and their quantum embedding.
"""

from ._backend import BACKEND
from .channel import (
    CPMap,
    QuantumChannel,
    StinespringDilation,
    invariant_state,
    is_irreducible,
    kms_adjoint,
    maximal_cycle,
    stinespring,
)
from .instrument import POVM, Instrument, Reversal, build_ic_povm, build_iqdb_instrument
from .statistics import ep_exact, ep_mc, word_probs
from .symmetry import SymmetryOp, is_admissible, qdb_check, search_qdb

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CPMap",
    "QuantumChannel",
    "StinespringDilation",
    "invariant_state",
    "is_irreducible",
    "kms_adjoint",
    "maximal_cycle",
    "stinespring",
    "POVM",
    "Instrument",
    "Reversal",
    "build_ic_povm",
    "build_iqdb_instrument",
    "ep_exact",
    "ep_mc",
    "word_probs",
    "SymmetryOp",
    "is_admissible",
    "qdb_check",
    "search_qdb",
    "__version__",
]
