"""Quantum instruments, POVMs on the dilation space and their reversal.

An instrument on ``C^d`` with finite alphabet ``A`` assigns a completely
positive map to each outcome such that the maps sum to a channel.  A POVM
``M`` on the environment ``E`` of a Stinespring dilation ``V`` induces the
instrument ``a -> (X -> V^H (X (x) M(a)) V)``.
"""

from __future__ import annotations

from typing import Hashable, Mapping, NamedTuple, Sequence

import numpy as np
import numpy.typing as npt

from . import config
from . import linalg
from .channel import (
    CPMap,
    QuantumChannel,
    StinespringDilation,
    kms_adjoint_superop,
    state_matrix,
    stinespring,
    stinespring_from_kraus,
)
from .errors import (
    BadBase,
    BadParameters,
    DimensionMismatch,
    IsometryResidualTooLarge,
    NotAdmissible,
    NotFaithful,
    NotPovm,
    PhaseExtractionFailed,
    QDBFailed,
    ThetaNotInvolution,
)
from .linalg import ComplexMatrix
from .symmetry import SymmetryOp, is_admissible, qdb_check

Label = Hashable


class Instrument:
    """Finite-outcome instrument.

    Parameters
    ----------
    alphabet : sequence
        Outcome labels in a fixed order.
    maps : mapping
        Completely positive map for every label.
    check : bool
        Verify that the maps sum to a unital map.
    """

    def __init__(self, alphabet: Sequence[Label], maps: Mapping[Label, CPMap], check: bool = True):
        self.alphabet = tuple(alphabet)
        if len(set(self.alphabet)) != len(self.alphabet):
            raise BadParameters("alphabet labels must be distinct")
        if set(maps) != set(self.alphabet):
            raise BadParameters("maps must be given for exactly the alphabet labels")
        dims = {m.dim for m in maps.values()}
        if len(dims) != 1:
            raise DimensionMismatch("all outcome maps must act on the same space")
        self.dim = dims.pop()
        self.maps = {a: maps[a] for a in self.alphabet}
        if check:
            res = self.total().unital_residual()
            if res > 1e-9:
                raise BadParameters(f"outcome maps do not sum to a unital map (residual {res:.2e})")

    def __len__(self) -> int:
        return len(self.alphabet)

    def index(self, label: Label) -> int:
        return self.alphabet.index(label)

    def total(self) -> QuantumChannel:
        """The channel ``sum_a J(a)``."""
        K = np.concatenate([self.maps[a].kraus for a in self.alphabet])
        return QuantumChannel(K, check=False)

    def kraus_stacks(self) -> list[np.ndarray]:
        """Kraus operators of each outcome, in alphabet order."""
        return [np.asarray(self.maps[a].kraus) for a in self.alphabet]

    def __repr__(self) -> str:
        return f"Instrument(dim={self.dim}, outcomes={len(self.alphabet)})"


class POVM:
    """Positive operator-valued measure on ``C^dim_e``.

    Parameters
    ----------
    alphabet : sequence
        Outcome labels.
    elements : mapping or sequence
        Positive semidefinite effects, summing to the identity.
    tol : float
        Tolerance for the normalisation and positivity checks.
    """

    def __init__(self, alphabet: Sequence[Label], elements, tol: float = 1e-10):
        self.alphabet = tuple(alphabet)
        if not isinstance(elements, Mapping):
            elements = dict(zip(self.alphabet, elements))
        self.elements = {a: linalg.as_complex_matrix(elements[a]) for a in self.alphabet}
        dims = {E.shape for E in self.elements.values()}
        if len(dims) != 1:
            raise NotPovm("effects have different shapes")
        self.dim_e = dims.pop()[0]
        total = sum(self.elements.values())
        res = float(np.abs(total - np.eye(self.dim_e)).max())
        if res > tol:
            raise NotPovm(f"effects sum to the identity only within {res:.2e}")
        for a, E in self.elements.items():
            if not linalg.is_hermitian(E, tol):
                raise NotPovm(f"effect {a!r} is not Hermitian")
            w = linalg.herm_eig(E).eigenvalues
            if w[0] < -tol:
                raise NotPovm(f"effect {a!r} is not positive")

    def __len__(self) -> int:
        return len(self.alphabet)

    def matrix(self) -> ComplexMatrix:
        """Rows are the vectorised effects."""
        return np.array([self.elements[a].reshape(-1) for a in self.alphabet])

    def __repr__(self) -> str:
        return f"POVM(dim_e={self.dim_e}, outcomes={len(self.alphabet)})"


class Reversal:
    """Bijective relabelling ``theta`` of an alphabet.

    Parameters
    ----------
    mapping : mapping
        ``theta(a)`` for every label ``a``.
    """

    def __init__(self, mapping: Mapping[Label, Label]):
        self.mapping = dict(mapping)
        if set(self.mapping.values()) != set(self.mapping):
            raise ThetaNotInvolution("relabelling must be a bijection of the alphabet")

    def __call__(self, a: Label) -> Label:
        return self.mapping[a]

    def permutation(self, alphabet: Sequence[Label]) -> np.ndarray:
        """Index array ``perm`` with ``alphabet[perm[i]] = theta(alphabet[i])``."""
        pos = {a: i for i, a in enumerate(alphabet)}
        if set(pos) != set(self.mapping):
            raise BadParameters("relabelling and alphabet do not match")
        return np.array([pos[self.mapping[a]] for a in alphabet])

    def is_involution(self) -> bool:
        return all(self.mapping[self.mapping[a]] == a for a in self.mapping)

    @classmethod
    def identity(cls, alphabet: Sequence[Label]) -> "Reversal":
        return cls({a: a for a in alphabet})


def from_povm(dilation: StinespringDilation, povm: POVM) -> Instrument:
    """Instrument ``a -> V^H (. (x) M(a)) V``."""
    if povm.dim_e != dilation.dim_e:
        raise DimensionMismatch("POVM and dilation environments differ")
    maps = {a: dilation.sandwich_map(povm.elements[a]) for a in povm.alphabet}
    return Instrument(povm.alphabet, maps)


def canonical_povm(instrument: "Instrument | CPMap"):
    """Projection-valued dilation of an instrument.

    The dilation stacks the Kraus operators of all outcomes and ``M(a)`` is
    the diagonal projection onto the coordinates belonging to outcome
    ``a``, so that :func:`from_povm` gives back the instrument.  A plain
    channel is treated as the single-outcome instrument.

    Returns
    -------
    (StinespringDilation, POVM)
    """
    if not isinstance(instrument, Instrument):
        instrument = Instrument((0,), {0: instrument})
    stacks = instrument.kraus_stacks()
    K = np.concatenate(stacks)
    k = K.shape[0]
    elements = {}
    start = 0
    for a, ks in zip(instrument.alphabet, stacks):
        E = np.zeros((k, k), dtype=np.complex128)
        idx = np.arange(start, start + ks.shape[0])
        E[idx, idx] = 1.0
        elements[a] = E
        start += ks.shape[0]
    return stinespring_from_kraus(K), POVM(instrument.alphabet, elements)


def canonical_instrument(channel: CPMap, alphabet: Sequence[Label] | None = None) -> Instrument:
    """One outcome per Kraus operator."""
    alphabet = tuple(range(channel.n_kraus)) if alphabet is None else tuple(alphabet)
    maps = {a: CPMap(channel.kraus[i]) for i, a in enumerate(alphabet)}
    return Instrument(alphabet, maps)


class IcReport(NamedTuple):
    complete: bool
    rank: int


def ic_test(povm: POVM, rank_tol: float = config.RANK_TOL) -> IcReport:
    """Informational completeness: the effects span all operators on ``E``."""
    r = linalg.rank(povm.matrix(), rank_tol)
    return IcReport(r == povm.dim_e**2, r)


def tetrahedral_povm() -> POVM:
    """Qubit POVM ``N(a) = (1 + s_a . sigma) / 4`` with tetrahedral Bloch vectors."""
    sx = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    sy = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
    sz = np.array([[1, 0], [0, -1]], dtype=np.complex128)
    vecs = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]) / np.sqrt(3)
    elements = [(np.eye(2) + v[0] * sx + v[1] * sy + v[2] * sz) / 4 for v in vecs]
    return POVM(tuple(range(4)), elements)


def build_ic_povm(n: int, base: POVM | None = None) -> POVM:
    """Informationally complete POVM on ``C^n`` assembled from a qubit POVM.

    The outcomes are triples ``(k, l, a)`` with ``k != l`` and ``a`` a label
    of the qubit POVM ``base``; the effect is
    ``J_kl N(a) J_kl^H / (2 (n - 1))`` with ``J_kl = e_k u^H + e_l d^H``
    mapping the qubit basis ``u, d`` onto ``e_k, e_l``.  With the
    tetrahedral base there are ``4 n (n - 1)`` outcomes.
    """
    if n < 2:
        raise BadParameters("n must be at least 2")
    base = tetrahedral_povm() if base is None else base
    if base.dim_e != 2:
        raise BadBase("base POVM must act on a qubit")
    if not ic_test(base).complete:
        raise BadBase("base POVM is not informationally complete")
    weight = 1.0 / (n - 1)
    alphabet, elements = [], []
    for k in range(n):
        for l in range(n):
            if k == l:
                continue
            Jkl = np.zeros((n, 2), dtype=np.complex128)
            Jkl[k, 0] = 1.0
            Jkl[l, 1] = 1.0
            for a in base.alphabet:
                alphabet.append((k, l, a))
                elements.append(0.5 * weight * Jkl @ base.elements[a] @ Jkl.conj().T)
    return POVM(alphabet, elements)


def tensor_povm(first: POVM, second: POVM) -> POVM:
    """Product POVM with outcomes ``(a, b)`` and effects ``M(a) (x) N(b)``."""
    alphabet, elements = [], []
    for a in first.alphabet:
        for b in second.alphabet:
            alphabet.append((a, b))
            elements.append(np.kron(first.elements[a], second.elements[b]))
    return POVM(alphabet, elements)


# ----------------------------------------------------------------------------
# the map X -> tr_H(V rho^(1/2) X) and the reversal isometry


def psi_matrix(dilation: StinespringDilation, rho: npt.ArrayLike) -> ComplexMatrix:
    """Matrix of ``X -> tr_H(V rho^(1/2) X)`` in the matrix-unit basis.

    Column ``i * d + j`` is the image of ``e_i e_j^H``, which equals
    ``(e_j^H (x) 1) V rho^(1/2) e_i``.
    """
    d, k = dilation.dim_h, dilation.dim_e
    rho = state_matrix(rho)
    if np.linalg.eigvalsh(rho).min() <= config.FAITHFUL_TOL:
        raise NotFaithful("the state must be faithful")
    r = linalg.psd_sqrt(rho)
    W = (dilation.V @ r).reshape(d, k, d)
    return W.transpose(1, 2, 0).reshape(k, d * d)


def psi_apply(dilation: StinespringDilation, rho: npt.ArrayLike, X: npt.ArrayLike) -> np.ndarray:
    """``tr_H(V rho^(1/2) X)`` as a vector in ``E``."""
    return psi_matrix(dilation, rho) @ np.asarray(X, dtype=np.complex128).reshape(-1)


def range_projector(dilation: StinespringDilation, rho: npt.ArrayLike) -> ComplexMatrix:
    """Orthogonal projector onto the range of ``psi``."""
    B = linalg.range_basis(psi_matrix(dilation, rho))
    return B @ B.conj().T


class ReversalIsometry(NamedTuple):
    """Partial isometry ``U`` with ``U psi_hat(X) = psi(j(X^H))``.

    When ``antilinear`` is true, ``U y = matrix @ conj(y)``.  ``initial``
    and ``final`` are ``U^H U`` and ``U U^H``; ``residual`` bounds both the
    defining identity and the norm condition ``|A x| = |B x|``.
    """

    matrix: ComplexMatrix
    antilinear: bool
    residual: float
    initial: ComplexMatrix
    final: ComplexMatrix


def reversal_isometry(
    dilation: StinespringDilation,
    reversed_dilation: StinespringDilation,
    rho: npt.ArrayLike,
    J: SymmetryOp,
    tol: float = 1e-8,
) -> ReversalIsometry:
    """Solve ``U psi_hat = psi o j o adjoint`` by a pseudo-inverse.

    ``U`` is linear for anti-unitary ``J`` and anti-linear for unitary
    ``J``.  Both dilations must share the environment; pad the smaller
    one with zero Kraus operators beforehand.

    Raises
    ------
    IsometryResidualTooLarge
        If ``A^H A != B^H B`` or the fitted ``U`` misses the identity by
        more than ``tol``, which means ``reversed_dilation`` does not dilate
        the reversed channel.
    """
    if dilation.dim_e != reversed_dilation.dim_e or dilation.dim_h != reversed_dilation.dim_h:
        raise DimensionMismatch("dilations must share the Hilbert space and the environment")
    d = dilation.dim_h
    A = psi_matrix(reversed_dilation, rho)
    Psi = psi_matrix(dilation, rho)
    B = np.zeros((dilation.dim_e, d * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            E = np.zeros((d, d), dtype=np.complex128)
            E[j, i] = 1.0
            B[:, i * d + j] = Psi @ J.morphism(E).reshape(-1)
    antilinear = not J.antiunitary
    A_eff = np.conj(A) if antilinear else A
    gram = float(np.abs(A_eff.conj().T @ A_eff - B.conj().T @ B).max())
    U = B @ linalg.pinv(A_eff)
    residual = max(gram, float(np.abs(U @ A_eff - B).max()))
    if residual > tol:
        raise IsometryResidualTooLarge(f"reversal isometry residual {residual:.2e}")
    return ReversalIsometry(U, antilinear, residual, U.conj().T @ U, U @ U.conj().T)


def conjugate_effect(U: ReversalIsometry | "Involution", O: npt.ArrayLike) -> ComplexMatrix:
    """The linear operator ``U^H O U`` for a linear or anti-linear ``U``."""
    M = U.matrix
    out = M.conj().T @ np.asarray(O, dtype=np.complex128) @ M
    return np.conj(out) if U.antilinear else out


class Involution(NamedTuple):
    """Normalised reversal isometry ``S`` with ``S^2 = sign P``.

    ``P`` is the projector onto the range of ``psi``; ``S y = matrix @ y``
    or ``matrix @ conj(y)`` when ``antilinear``.
    """

    matrix: ComplexMatrix
    antilinear: bool
    sign: int
    residual: float
    projector: ComplexMatrix


def involution_S(dilation: StinespringDilation, rho: npt.ArrayLike, J: SymmetryOp) -> Involution:
    """Phase-normalised reversal isometry of a dilation of a detailed-balanced channel.

    Raises
    ------
    QDBFailed
        If the dilated channel is not in detailed balance for ``J``.
    PhaseExtractionFailed
        If ``U^2`` is not a multiple of the range projector.
    """
    res = qdb_check(CPMap(dilation.kraus()), rho, J)
    if not res.holds:
        raise QDBFailed(f"channel is not in detailed balance for J (residual {res.residual:.2e})")
    U = reversal_isometry(dilation, dilation, rho, J)
    P = range_projector(dilation, rho)
    r = max(1, int(round(np.trace(P).real)))
    M = U.matrix
    if U.antilinear:
        sq = M @ np.conj(M)
        sign = 1 if np.trace(P @ sq).real >= 0 else -1
        S = M
    else:
        sq = M @ M
        c = np.trace(P @ sq) / r
        if abs(c) < 1e-12:
            raise PhaseExtractionFailed("reversal isometry does not square to a multiple of the projector")
        S = M * np.exp(-0.5j * np.angle(c))
        sq = S @ S
        sign = 1
    residual = max(float(np.abs(sq - sign * P).max()), U.residual)
    if residual > 1e-6:
        raise PhaseExtractionFailed(f"S^2 differs from +-P by {residual:.2e}")
    return Involution(S, U.antilinear, sign, residual, P)


class IqdbBuild(NamedTuple):
    """Instrument with its relabelling and the data used to build it."""

    instrument: Instrument
    theta: Reversal
    povm: POVM
    involution: Involution
    dilation: StinespringDilation


def build_iqdb_instrument(
    channel: CPMap, rho: npt.ArrayLike, J: SymmetryOp, base: POVM | None = None
) -> IqdbBuild:
    """Instrument satisfying detailed balance from a detailed-balanced channel.

    The alphabet is ``{+1, -1} x A0`` with effects ``N(a)/2`` and
    ``S^H N(a) S / 2`` on the dilation space and ``theta(s, a) = (-s, a)``.
    When the Kraus operators are linearly dependent the dilation is first
    restricted to the range of ``psi``.

    Parameters
    ----------
    base : POVM, optional
        Informationally complete POVM on the (restricted) dilation space.
        Defaults to the tetrahedral POVM for a qubit environment and
        :func:`build_ic_povm` otherwise.
    """
    rho = state_matrix(rho)
    res = qdb_check(channel, rho, J)
    if not res.holds:
        raise QDBFailed(f"channel is not in detailed balance for J (residual {res.residual:.2e})")
    dil = stinespring(channel)
    Bas = linalg.range_basis(psi_matrix(dil, rho))
    if Bas.shape[1] < dil.dim_e:
        dil = dil.compress(Bas)
    r = dil.dim_e
    if base is None:
        if r == 1:
            base = POVM((0,), [np.eye(1)])
        elif r == 2:
            base = tetrahedral_povm()
        else:
            base = build_ic_povm(r)
    if base.dim_e != r:
        raise BadParameters(f"base POVM acts on dimension {base.dim_e}, need {r}")
    S = involution_S(dil, rho, J)
    alphabet, elements = [], []
    for sgn in (1, -1):
        for a in base.alphabet:
            N = base.elements[a]
            alphabet.append((sgn, a))
            elements.append(0.5 * (N if sgn == 1 else conjugate_effect(S, N)))
    povm = POVM(alphabet, elements, tol=1e-9)
    instr = from_povm(dil, povm)
    theta = Reversal({(s, a): (-s, a) for s, a in alphabet})
    return IqdbBuild(instr, theta, povm, S, dil)


def reverse_instrument(
    instrument: Instrument, rho: npt.ArrayLike, J: SymmetryOp, theta: Reversal
) -> Instrument:
    """Instrument ``a -> j^(-1) o J(theta(a))^rho o j`` (KMS adjoint per outcome)."""
    maps = {}
    for a in instrument.alphabet:
        S = kms_adjoint_superop(instrument.maps[theta(a)].superop, rho)
        maps[a] = CPMap.from_superop(J.conjugate_superop(S))
    return Instrument(instrument.alphabet, maps, check=False)


def iqdb_check(
    instrument: Instrument, rho: npt.ArrayLike, J: SymmetryOp, theta: Reversal
) -> float:
    """Largest Frobenius residual between outcome maps and their reversals."""
    rho = state_matrix(rho)
    adm = is_admissible(instrument.total(), rho, J)
    if not adm.admissible:
        raise NotAdmissible("symmetry is not admissible for the total channel")
    worst = 0.0
    for a in instrument.alphabet:
        S = kms_adjoint_superop(instrument.maps[theta(a)].superop, rho)
        res = np.linalg.norm(J.conjugate_superop(S) - instrument.maps[a].superop)
        worst = max(worst, float(res))
    return worst
