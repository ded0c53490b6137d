"""Completely positive maps in the Heisenberg picture.

A map is stored by Kraus operators ``K_i`` and acts as
``Phi(X) = sum_i K_i^H X K_i``; its Schrodinger dual is
``Phi_*(T) = sum_i K_i T K_i^H``.

Superoperators act on row-major vectorisations ``vec(X) = X.reshape(-1)``,
so ``vec(A X B) = kron(A, B.T) vec(X)`` and the superoperator of the dual
map is the conjugate transpose of the superoperator of the map.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence
import warnings

import numpy as np
import numpy.typing as npt

from . import config
from . import linalg
from .errors import (
    DimensionMismatch,
    NotIrreducible,
    NotPSD,
    NotUnital,
    PeripheralStructureViolation,
)
from .linalg import ComplexMatrix, dagger


def superop_from_kraus(kraus: np.ndarray) -> ComplexMatrix:
    """Superoperator of ``X -> sum_i K_i^H X K_i`` on row-major vectors."""
    kraus = np.asarray(kraus, dtype=np.complex128)
    d = kraus.shape[-1]
    # kron(K^H, K^T)[(a,b),(c,e)] = conj(K[c,a]) K[e,b]
    S = np.einsum("kca,keb->abce", kraus.conj(), kraus, optimize=True)
    return S.reshape(d * d, d * d)


def choi_from_superop(S: np.ndarray) -> ComplexMatrix:
    """Choi matrix ``sum_ij E_ij (x) Phi(E_ij)`` from a superoperator."""
    d = int(round(np.sqrt(S.shape[0])))
    return S.reshape(d, d, d, d).transpose(2, 0, 3, 1).reshape(d * d, d * d)


def kraus_from_superop(S: np.ndarray, cut: float = config.KRAUS_CUT) -> np.ndarray:
    """Kraus operators of a completely positive map given by its superoperator.

    The Choi matrix is diagonalised and eigenvectors with eigenvalue above
    ``cut`` (relative to the largest) become Kraus operators.
    """
    S = np.asarray(S, dtype=np.complex128)
    d = int(round(np.sqrt(S.shape[0])))
    C = choi_from_superop(S)
    w, V = linalg.herm_eig(0.5 * (C + C.conj().T))
    scale = max(float(np.abs(w).max(initial=0.0)), 1e-300)
    if w[0] < -1e-8 * scale:
        raise NotPSD(f"Choi matrix has eigenvalue {w[0]:.3e}; map is not completely positive")
    keep = np.where(w > cut * scale)[0][::-1]
    if keep.size == 0:
        return np.zeros((1, d, d), dtype=np.complex128)
    # eigenvector v = sum_i e_i (x) w_i with K^H e_i = sqrt(lambda) w_i
    W = V[:, keep].T.reshape(len(keep), d, d)
    return np.sqrt(w[keep])[:, None, None] * W.conj()


class CPMap:
    """Completely positive map ``X -> sum_i K_i^H X K_i``.

    Parameters
    ----------
    kraus : array_like
        Kraus operators, shape ``(k, d, d)`` or a sequence of ``d x d``
        matrices.
    """

    def __init__(self, kraus: npt.ArrayLike | Sequence[np.ndarray]):
        K = np.array(kraus, dtype=np.complex128)
        if K.ndim == 2:
            K = K[None]
        if K.ndim != 3 or K.shape[1] != K.shape[2]:
            raise DimensionMismatch(f"Kraus operators must be square, got shape {K.shape}")
        K.setflags(write=False)
        self._kraus = K
        self._superop: ComplexMatrix | None = None

    @classmethod
    def from_superop(cls, S: np.ndarray, cut: float = config.KRAUS_CUT, **kwargs):
        """Build from a superoperator, recovering Kraus operators via Choi."""
        obj = cls(kraus_from_superop(S, cut), **kwargs)
        return obj

    @property
    def kraus(self) -> np.ndarray:
        return self._kraus

    @property
    def dim(self) -> int:
        return self._kraus.shape[1]

    @property
    def n_kraus(self) -> int:
        return self._kraus.shape[0]

    @property
    def superop(self) -> ComplexMatrix:
        """Heisenberg superoperator acting on row-major ``vec(X)``."""
        if self._superop is None:
            S = superop_from_kraus(self._kraus)
            S.setflags(write=False)
            self._superop = S
        return self._superop

    @property
    def dual_superop(self) -> ComplexMatrix:
        """Superoperator of the Schrodinger dual."""
        return self.superop.conj().T

    def _operand(self, X: npt.ArrayLike) -> np.ndarray:
        X = np.asarray(X, dtype=np.complex128)
        if X.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"expected a {self.dim}x{self.dim} matrix, got shape {X.shape}")
        return X

    def apply(self, X: npt.ArrayLike) -> ComplexMatrix:
        """Heisenberg action on an observable."""
        X = self._operand(X)
        return np.einsum("kba,bc,kcd->ad", self._kraus.conj(), X, self._kraus, optimize=True)

    __call__ = apply

    def apply_dual(self, T: npt.ArrayLike) -> ComplexMatrix:
        """Schrodinger action on a density matrix or trace-class operator."""
        T = self._operand(T)
        return np.einsum("kab,bc,kdc->ad", self._kraus, T, self._kraus.conj(), optimize=True)

    def choi(self) -> ComplexMatrix:
        return choi_from_superop(self.superop)

    def unital_residual(self) -> float:
        """Max-entry deviation of ``Phi(1)`` from the identity."""
        return float(np.abs(self.apply(np.eye(self.dim)) - np.eye(self.dim)).max())

    def __add__(self, other: "CPMap") -> "CPMap":
        if other.dim != self.dim:
            raise DimensionMismatch("cannot add maps of different dimensions")
        return CPMap(np.concatenate([self._kraus, other.kraus]))

    def scaled(self, weight: float) -> "CPMap":
        """The map multiplied by a nonnegative weight."""
        return CPMap(np.sqrt(weight) * self._kraus)

    def compose(self, other: "CPMap") -> "CPMap":
        """Heisenberg composition ``self o other`` (``other`` acts first on X)."""
        K = np.einsum("iab,jbc->ijac", other.kraus, self._kraus).reshape(-1, self.dim, self.dim)
        return CPMap(K)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim}, n_kraus={self.n_kraus})"


class QuantumChannel(CPMap):
    """Unital completely positive map (a Heisenberg-picture channel).

    Parameters
    ----------
    kraus : array_like
        Kraus operators.
    check : bool
        Verify ``Phi(1) = 1`` within ``tol`` and raise
        :class:`~qdbkit.errors.NotUnital` otherwise.
    tol : float
        Unitality tolerance.
    """

    def __init__(self, kraus, check: bool = True, tol: float = config.UNITAL_TOL):
        super().__init__(kraus)
        if check:
            res = self.unital_residual()
            if res > tol:
                raise NotUnital(f"Phi(1) deviates from the identity by {res:.3e}")


def mixture(channels: Sequence[CPMap], weights: Sequence[float]) -> QuantumChannel:
    """Convex combination of channels with the given weights."""
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0) or not np.isclose(weights.sum(), 1.0):
        raise ValueError("weights must be a probability vector")
    K = np.concatenate([np.sqrt(w) * ch.kraus for ch, w in zip(channels, weights) if w > 0])
    return QuantumChannel(K)


@dataclass(frozen=True)
class DensityMatrix:
    """Validated density matrix.

    Parameters
    ----------
    matrix : array_like
        Hermitian positive semidefinite matrix of unit trace.
    unique : bool
        Whether it is known to be the unique invariant state of some map.
    """

    matrix: ComplexMatrix
    unique: bool = True
    min_eigenvalue: float = field(init=False)

    def __post_init__(self):
        M = linalg.as_complex_matrix(self.matrix)
        w = linalg.psd_eig(M).eigenvalues
        tr = np.trace(M).real
        if abs(tr - 1.0) > 1e-9:
            raise NotPSD(f"density matrix has trace {tr:.12g}")
        M = 0.5 * (M + M.conj().T)
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "min_eigenvalue", float(w[0]))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def is_faithful(self, tol: float = config.FAITHFUL_TOL) -> bool:
        return self.min_eigenvalue > tol


def state_matrix(rho) -> ComplexMatrix:
    """Matrix of a :class:`DensityMatrix` or an array."""
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    return linalg.as_complex_matrix(rho)


class ChannelReport(NamedTuple):
    unital_residual: float
    min_choi_eigenvalue: float
    passed: bool


def validate(channel: CPMap, tol: float = config.UNITAL_TOL) -> ChannelReport:
    """Check unitality and complete positivity (through the Choi spectrum)."""
    res = channel.unital_residual()
    C = channel.choi()
    w = linalg.herm_eig(0.5 * (C + C.conj().T)).eigenvalues
    scale = max(1.0, float(np.abs(w).max()))
    passed = res <= tol and w[0] >= -tol * scale
    return ChannelReport(res, float(w[0]), bool(passed))


class InvariantState(NamedTuple):
    """Invariant state of the dual map.

    ``unique`` is ``False`` when the fixed space has dimension
    ``fixed_dim > 1``; ``rho`` is then the projection of the maximally
    mixed state onto the fixed space (the Cesaro limit of its orbit).
    """

    rho: ComplexMatrix
    unique: bool
    fixed_dim: int


def invariant_state(channel: CPMap, tol: float = 1e-10) -> InvariantState:
    """Invariant state from the kernel of ``Phi_* - id``."""
    d = channel.dim
    I = np.eye(d * d)
    R = linalg.null_space(channel.dual_superop - I, tol)
    k = R.shape[1]
    if k == 0:
        raise PeripheralStructureViolation("dual map has no fixed point within tolerance")
    if k == 1:
        X = R[:, 0].reshape(d, d)
    else:
        L = linalg.null_space(channel.superop - I, tol)
        # projection onto the fixed space along the complementary spectral subspace
        P = R @ linalg.pinv(L.conj().T @ R) @ L.conj().T
        X = (P @ (np.eye(d).reshape(-1) / d)).reshape(d, d)
    X = 0.5 * (X + X.conj().T)
    tr = np.trace(X).real
    if abs(tr) < 1e-14:
        raise NotPSD("fixed point has vanishing trace")
    X = X / tr
    w = linalg.herm_eig(X).eigenvalues
    if w[0] < -1e-9:
        raise NotPSD(f"fixed point is not positive (eigenvalue {w[0]:.3e})")
    return InvariantState(X, k == 1, k)


def kms_inner(rho: npt.ArrayLike, X: npt.ArrayLike, Y: npt.ArrayLike) -> complex:
    """KMS inner product ``tr(rho^(1/2) X^H rho^(1/2) Y)``."""
    r = linalg.psd_sqrt(state_matrix(rho))
    X = np.asarray(X, dtype=np.complex128)
    Y = np.asarray(Y, dtype=np.complex128)
    return complex(np.trace(r @ X.conj().T @ r @ Y))


def kms_adjoint_superop(S: np.ndarray, rho: npt.ArrayLike) -> ComplexMatrix:
    """Superoperator of ``X -> rho^(-1/2) Phi_*(rho^(1/2) X rho^(1/2)) rho^(-1/2)``."""
    rho = state_matrix(rho)
    r = linalg.psd_sqrt(rho)
    ri = linalg.psd_inv_sqrt(rho)
    R = np.kron(r, r.T)
    Ri = np.kron(ri, ri.T)
    return Ri @ np.asarray(S).conj().T @ R


def kms_adjoint(channel: CPMap, rho: npt.ArrayLike) -> CPMap:
    """KMS adjoint with Kraus operators ``rho^(1/2) K_i^H rho^(-1/2)``.

    Returns a :class:`QuantumChannel` when ``rho`` is invariant, and a plain
    :class:`CPMap` (with a warning) otherwise.
    """
    rho = state_matrix(rho)
    if rho.shape[0] != channel.dim:
        raise DimensionMismatch("state and channel dimensions differ")
    r = linalg.psd_sqrt(rho)
    ri = linalg.psd_inv_sqrt(rho)
    L = r @ dagger(channel.kraus) @ ri
    out = CPMap(L)
    if out.unital_residual() <= config.UNITAL_TOL:
        return QuantumChannel(L, check=False)
    if isinstance(channel, QuantumChannel):
        warnings.warn("state is not invariant; the KMS adjoint is not unital", stacklevel=2)
    return out


def is_irreducible(channel: CPMap, tol: float = config.SPAN_TOL) -> bool:
    """Irreducibility through the dimension of the algebra generated by Kraus operators.

    The span of all words in the Kraus operators (including the empty
    word) is grown until closed; the map is irreducible exactly when this
    span is the full matrix algebra.
    """
    d = channel.dim
    n = d * d
    basis = np.zeros((n, n), dtype=np.complex128)
    count = 0
    queue = []

    def add(M: np.ndarray) -> None:
        nonlocal count
        w = M.reshape(-1)
        norm = np.linalg.norm(w)
        if norm == 0.0 or count >= n:
            return
        Bc = basis[:count]
        r = w - Bc.T @ (Bc.conj() @ w)
        r = r - Bc.T @ (Bc.conj() @ r)
        rn = np.linalg.norm(r)
        if rn > tol * norm:
            basis[count] = r / rn
            count += 1
            queue.append((r / rn).reshape(d, d))

    add(np.eye(d, dtype=np.complex128))
    while queue and count < n:
        B = queue.pop()
        for K in channel.kraus:
            add(K @ B)
    return count == n


class Cycle(NamedTuple):
    """Cyclic decomposition of an irreducible channel.

    ``unitary`` has spectrum ``{xi^a : a = 0..period-1}`` with
    ``xi = exp(2 pi i / period)``; ``projections[a]`` is its spectral
    projection for ``xi^a``.  The channel satisfies ``Phi(U) = xi U`` and
    ``Phi(P_a) = P_(a-1)``.
    """

    period: int
    unitary: ComplexMatrix
    phases: np.ndarray
    projections: list


def peripheral_spectrum(channel: CPMap, periph_tol: float = config.PERIPH_TOL) -> np.ndarray:
    """Eigenvalues of modulus at least ``1 - periph_tol``."""
    vals = linalg.eig_general(channel.superop).eigenvalues
    return vals[np.abs(vals) >= 1.0 - periph_tol]


def maximal_cycle(
    channel: CPMap,
    periph_tol: float = config.PERIPH_TOL,
    check_irreducible: bool = True,
) -> Cycle:
    """Period and cyclic projections of an irreducible channel.

    The unitary is the peripheral eigenvector at ``exp(2 pi i / p)``,
    rescaled to be unitary and rotated so that its eigenvalue closest to the
    positive real axis equals one.

    Raises
    ------
    NotIrreducible
        If ``check_irreducible`` and the channel is reducible.
    PeripheralStructureViolation
        If the peripheral eigenvalues are not the ``p``-th roots of unity.
    """
    if check_irreducible and not is_irreducible(channel):
        raise NotIrreducible("maximal cycle requires an irreducible channel")
    d = channel.dim
    eig = linalg.eig_general(channel.superop)
    vals = eig.eigenvalues
    periph_idx = np.where(np.abs(vals) >= 1.0 - periph_tol)[0]
    p = len(periph_idx)
    if p == 0:
        raise PeripheralStructureViolation("no peripheral eigenvalue")
    periph = vals[periph_idx]
    expected = np.exp(2j * np.pi * np.arange(p) / p)
    for z in expected:
        if np.abs(periph - z).min() > 1e-6:
            raise PeripheralStructureViolation(
                f"peripheral spectrum of size {p} is not the group of {p}-th roots of unity"
            )
    phases = expected
    if p == 1:
        U = np.eye(d, dtype=np.complex128)
    else:
        target = int(periph_idx[np.argmin(np.abs(periph - expected[1]))])
        X = linalg.eig_general(channel.superop, vectors=[target]).eigenvectors[:, 0].reshape(d, d)
        X = X / np.sqrt(np.trace(X.conj().T @ X).real / d)
        if not linalg.is_unitary(X, 1e-6):
            raise PeripheralStructureViolation("peripheral eigenvector is not proportional to a unitary")
        ev = linalg.eig_general(X).eigenvalues
        phi = np.angle(ev[np.argmin(np.abs(np.angle(ev)))])
        U = X * np.exp(-1j * phi)
    projections = []
    for alpha in phases:
        M = np.conj(alpha) * U
        acc = np.eye(d, dtype=np.complex128)
        power = np.eye(d, dtype=np.complex128)
        for _ in range(1, p):
            power = power @ M
            acc = acc + power
        P = acc / p
        projections.append(0.5 * (P + P.conj().T))
    return Cycle(p, U, phases, projections)


@dataclass(frozen=True)
class StinespringDilation:
    """Isometry ``V: H -> H (x) E`` with ``V x = sum_i (K_i x) (x) e_i``.

    The row index of ``V`` is ``h * dim_e + i`` (system index major,
    environment index minor).
    """

    V: ComplexMatrix
    dim_h: int
    dim_e: int

    def kraus(self) -> np.ndarray:
        """Kraus operators ``(1 (x) e_i^H) V``."""
        return self.V.reshape(self.dim_h, self.dim_e, self.dim_h).transpose(1, 0, 2).copy()

    def isometry_residual(self) -> float:
        return float(np.abs(self.V.conj().T @ self.V - np.eye(self.dim_h)).max())

    def sandwich(self, X: npt.ArrayLike, O: npt.ArrayLike) -> ComplexMatrix:
        """``V^H (X (x) O) V``."""
        return self.V.conj().T @ np.kron(X, O) @ self.V

    def sandwich_superop(self, O: npt.ArrayLike) -> ComplexMatrix:
        """Superoperator of ``X -> V^H (X (x) O) V``."""
        K = self.kraus()
        O = np.asarray(O, dtype=np.complex128)
        d = self.dim_h
        S = np.einsum("ij,ica,jeb->abce", O, K.conj(), K, optimize=True)
        return S.reshape(d * d, d * d)

    def sandwich_map(self, O: npt.ArrayLike) -> CPMap:
        """CP map ``X -> V^H (X (x) O) V`` for positive semidefinite ``O``."""
        w, W = linalg.psd_eig(O)
        K = self.kraus()
        keep = w > config.KRAUS_CUT * max(1.0, float(w.max(initial=0.0)))
        if not keep.any():
            return CPMap(np.zeros((1, self.dim_h, self.dim_h)))
        # (1 (x) m^H) V = sum_i conj(m_i) K_i
        ops = np.einsum("im,iab->mab", W[:, keep].conj(), K) * np.sqrt(w[keep])[:, None, None]
        return CPMap(ops)

    def compress(self, W: np.ndarray) -> "StinespringDilation":
        """Dilation ``(1 (x) W^H) V`` on the subspace spanned by the columns of ``W``."""
        K = self.kraus()
        K2 = np.einsum("ir,iab->rab", W.conj(), K)
        return stinespring_from_kraus(K2)


def stinespring_from_kraus(kraus: np.ndarray) -> StinespringDilation:
    kraus = np.asarray(kraus, dtype=np.complex128)
    k, d, _ = kraus.shape
    V = kraus.transpose(1, 0, 2).reshape(d * k, d)
    return StinespringDilation(V, d, k)


def stinespring(channel: CPMap) -> StinespringDilation:
    """Stinespring dilation on the environment ``C^k`` of the Kraus index."""
    return stinespring_from_kraus(channel.kraus)
