"""Equivalence of dilated channels through their environment statistics.

A pair ``(V, rho)`` of a Stinespring isometry and an invariant state
defines moments ``<1, S_(A_1) ... S_(A_n) 1>_KMS`` with
``S_A(X) = V^H (X (x) A) V`` for operators ``A`` on the environment.  Two
pairs share all moments exactly when they are related by a gauge
transformation ``V2 = e^(i phi) (U (x) 1) V1 U^H``, ``rho2 = U rho1 U^H``;
the unitary ``U`` appears as a peripheral eigenvector of the cross
operator ``X -> V2^H (X (x) 1) V1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import numpy.typing as npt

from . import linalg
from .channel import (
    CPMap,
    StinespringDilation,
    invariant_state,
    is_irreducible,
    state_matrix,
    stinespring,
    stinespring_from_kraus,
)
from .errors import BadParameters, DimensionMismatch, NotIrreducible
from .linalg import ComplexMatrix

INVARIANCE_TOL = 1e-9


@dataclass(frozen=True)
class PgfcsSpec:
    """Dilation together with the state defining the statistics."""

    dilation: StinespringDilation
    rho: ComplexMatrix

    def __post_init__(self):
        rho = state_matrix(self.rho)
        if rho.shape[0] != self.dilation.dim_h:
            raise DimensionMismatch("state and dilation act on different spaces")
        res = float(np.abs(self.channel().apply_dual(rho) - rho).max())
        if res > INVARIANCE_TOL:
            raise BadParameters(f"state is not invariant for the dilated channel (residual {res:.2e})")
        object.__setattr__(self, "rho", np.asarray(rho, dtype=np.complex128))

    @classmethod
    def from_channel(cls, channel: CPMap, rho: npt.ArrayLike | None = None) -> "PgfcsSpec":
        """Spec from a channel's Kraus dilation; ``rho`` defaults to the invariant state."""
        rho = invariant_state(channel).rho if rho is None else state_matrix(rho)
        return cls(stinespring(channel), np.asarray(rho, dtype=np.complex128))

    @property
    def kraus(self) -> np.ndarray:
        return self.dilation.kraus()

    def channel(self) -> CPMap:
        return CPMap(self.kraus)


def gauge_transform(spec: PgfcsSpec, U: npt.ArrayLike, phase: float = 0.0) -> PgfcsSpec:
    """The pair ``(e^(i phase) (U (x) 1) V U^H, U rho U^H)``."""
    U = np.asarray(U, dtype=np.complex128)
    K = np.exp(1j * phase) * (U @ spec.kraus @ U.conj().T)
    return PgfcsSpec(stinespring_from_kraus(K), U @ spec.rho @ U.conj().T)


def _pad(K: np.ndarray, k: int) -> np.ndarray:
    """Embed the environment in ``C^k`` by appending zero Kraus operators."""
    if K.shape[0] >= k:
        return K
    pad = np.zeros((k - K.shape[0],) + K.shape[1:], dtype=K.dtype)
    return np.concatenate([K, pad])


def _aligned(spec1: PgfcsSpec, spec2: PgfcsSpec) -> tuple[np.ndarray, np.ndarray]:
    K1, K2 = spec1.kraus, spec2.kraus
    k = max(K1.shape[0], K2.shape[0])
    return _pad(K1, k), _pad(K2, k)


def moment(spec: PgfcsSpec, ops: Sequence[npt.ArrayLike]) -> complex:
    """``tr(rho S_(A_1)(S_(A_2)(... S_(A_n)(1))))``."""
    X = np.eye(spec.dilation.dim_h, dtype=np.complex128)
    for A in reversed(list(ops)):
        X = spec.dilation.sandwich(X, A)
    return complex(np.trace(spec.rho @ X))


def cross_operator(dil1: StinespringDilation, dil2: StinespringDilation) -> ComplexMatrix:
    """Superoperator of ``X -> V1^H (X (x) 1) V2`` on ``d1 x d2`` matrices.

    Environments of different size are aligned by appending zero Kraus
    operators to the smaller one.
    """
    K1, K2 = dil1.kraus(), dil2.kraus()
    k = max(K1.shape[0], K2.shape[0])
    K1, K2 = _pad(K1, k), _pad(K2, k)
    d1, d2 = K1.shape[1], K2.shape[1]
    # vec(A X B) = kron(A, B^T) vec(X) with A = K1^H, B = K2
    S = np.einsum("kca,keb->abce", K1.conj(), K2, optimize=True)
    return S.reshape(d1 * d2, d1 * d2)


class EquivalenceResult(NamedTuple):
    """Outcome of :func:`pgfcs_equal`.

    ``U`` (``d2 x d1``) and ``phi`` satisfy ``(U (x) 1) V1 = e^(i phi) V2 U``
    when ``equal`` is true.  ``moment_gap`` is the largest moment
    difference over products of environment matrix units of length at
    most three; ``reason`` explains a negative answer.
    """

    equal: bool
    U: ComplexMatrix | None
    phi: float | None
    intertwine: float
    rho_commute: float
    moment_gap: float
    spectral_radius: float
    reason: str = ""


def _unit_moments(K: np.ndarray, rho: np.ndarray, n: int) -> np.ndarray:
    """Moments of all length-``n`` products of environment matrix units.

    With ``A_i = e_(k_i) e_(l_i)^H`` the moment is ``tr(rho W_k^H W_l)`` where
    ``W_k = K_(k_n) ... K_(k_1)``; the result is indexed by ``(k, l)``.
    """
    d = K.shape[1]
    W = np.eye(d, dtype=np.complex128)[None]
    for _ in range(n):
        W = np.einsum("kab,wbc->wkac", K, W).reshape(-1, d, d)
    return np.einsum("ab,kcb,lca->kl", rho, W.conj(), W, optimize=True)


def moment_gap(spec1: PgfcsSpec, spec2: PgfcsSpec, n_max: int = 3) -> float:
    """Largest moment difference over products of environment matrix units.

    Only the environments need to agree in size; the Hilbert spaces may
    differ since moments are scalars.
    """
    K1, K2 = _aligned(spec1, spec2)
    gap = 0.0
    for n in range(1, n_max + 1):
        M1 = _unit_moments(K1, spec1.rho, n)
        M2 = _unit_moments(K2, spec2.rho, n)
        gap = max(gap, float(np.abs(M1 - M2).max()))
    return gap


def pgfcs_equal(
    spec1: PgfcsSpec,
    spec2: PgfcsSpec,
    tol: float = 1e-8,
    periph_tol: float = 1e-6,
) -> EquivalenceResult:
    """Decide whether two irreducible pairs have identical environment statistics.

    A peripheral eigenvalue ``lambda`` of ``X -> V2^H (X (x) 1) V1`` is
    looked for first; its eigenvector, scaled to unit operator norm, is the
    candidate intertwiner, which is then verified explicitly.

    Raises
    ------
    NotIrreducible
        If either channel is reducible.
    """
    for spec in (spec1, spec2):
        if not is_irreducible(spec.channel()):
            raise NotIrreducible("both channels must be irreducible")
    gap = moment_gap(spec1, spec2)
    inf = float("inf")
    d1, d2 = spec1.dilation.dim_h, spec2.dilation.dim_h
    if d1 != d2:
        return EquivalenceResult(False, None, None, inf, inf, gap, float("nan"),
                                 "Hilbert space dimensions differ")
    S21 = cross_operator(spec2.dilation, spec1.dilation)
    eig = linalg.eig_general(S21, vectors=[0])
    lam = eig.eigenvalues[0]
    spr = float(abs(lam))
    if spr < 1.0 - periph_tol:
        return EquivalenceResult(False, None, None, inf, inf, gap, spr,
                                 "no peripheral eigenvalue")
    X = eig.eigenvectors[:, 0].reshape(d2, d1)
    U = X / linalg.operator_norm(X)
    phi = float(np.angle(lam))
    K1, K2 = _aligned(spec1, spec2)
    inter = float(np.abs(U @ K1 - np.exp(1j * phi) * K2 @ U).max())
    unit = float(np.abs(U.conj().T @ U - np.eye(d1)).max())
    state = float(np.abs(U @ spec1.rho - spec2.rho @ U).max())
    equal = max(inter, unit, state) <= tol
    reason = "" if equal else "intertwiner verification failed"
    return EquivalenceResult(bool(equal), U, phi, max(inter, unit), state, gap, spr, reason)


def overlap_sequence(spec1: PgfcsSpec, spec2: PgfcsSpec, n_max: int) -> list[float]:
    """Overlaps ``tr(g1 g2)`` of the environment states of ``n`` steps.

    ``g_j`` is ``tr_H(V_j^(n) rho_j V_j^(n)H)`` with ``V^(n)`` the
    ``n``-fold iterate of the dilation; for inequivalent irreducible pairs
    the overlap decays to zero.
    """
    K1, K2 = _aligned(spec1, spec2)
    out = []
    states = []
    for K, rho in ((K1, spec1.rho), (K2, spec2.rho)):
        k, d, _ = K.shape
        V3 = K.transpose(1, 0, 2)  # [h', k, h]
        W = linalg.psd_sqrt(rho)[:, None, :]  # [h, e, i]
        seq = []
        for _ in range(n_max):
            W = np.einsum("pkh,hei->pkei", V3, W).reshape(d, -1, W.shape[-1])
            seq.append(np.einsum("hei,hfi->ef", W, W.conj()))
        states.append(seq)
    for g1, g2 in zip(*states):
        out.append(float(np.trace(g1 @ g2).real))
    return out
