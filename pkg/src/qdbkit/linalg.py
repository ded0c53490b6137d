"""Dense complex linear algebra built on the in-repo kernels.

Eigensolvers and the singular value decomposition run on the Jacobi and
shifted-QR kernels from :mod:`qdbkit._backend`; numpy supplies array
arithmetic only.

Conventions
-----------
* Hermitian eigenvalues are returned in ascending order.
* General eigenvalues are sorted by decreasing modulus, then by argument
  in ``[0, 2*pi)``.
* Eigenvectors are unit vectors whose first significant component is real
  and positive, which makes outputs reproducible.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np
import numpy.typing as npt

from . import config
from ._backend import kernels
from .errors import NoConvergence, NotFaithful, NotHermitian, NotPSD

ComplexMatrix = npt.NDArray[np.complex128]


class HermEig(NamedTuple):
    """Eigen-decomposition ``A = V diag(w) V^H`` of a Hermitian matrix."""

    eigenvalues: np.ndarray
    eigenvectors: ComplexMatrix


class GeneralEig(NamedTuple):
    """Eigenvalues of a general matrix, optionally with right eigenvectors.

    ``eigenvectors`` is ``None`` when not requested; otherwise column ``j``
    belongs to ``eigenvalues[selected[j]]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: ComplexMatrix | None
    selected: tuple[int, ...]


class SVD(NamedTuple):
    """Thin singular value decomposition ``A = U diag(s) Vh``."""

    U: ComplexMatrix
    s: np.ndarray
    Vh: ComplexMatrix


def as_complex_matrix(A: npt.ArrayLike) -> ComplexMatrix:
    """Return ``A`` as a C-contiguous complex128 two-dimensional array."""
    arr = np.ascontiguousarray(A, dtype=np.complex128)
    if arr.ndim != 2:
        raise ValueError(f"expected a matrix, got an array of shape {arr.shape}")
    return arr


def dagger(A: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(A, -1, -2))


def is_hermitian(A: npt.ArrayLike, tol: float = config.HERM_TOL) -> bool:
    """Whether ``A`` equals its adjoint up to ``tol`` times its norm."""
    A = as_complex_matrix(A)
    if A.shape[0] != A.shape[1]:
        return False
    scale = max(1.0, float(np.linalg.norm(A)))
    return float(np.abs(A - A.conj().T).max(initial=0.0)) <= tol * scale


def _phase_fix(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its first significant entry is real positive."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        mags = np.abs(col)
        top = mags.max(initial=0.0)
        if top == 0.0:
            continue
        i = int(np.argmax(mags > 1e-8 * top))
        out[:, j] = col * (np.conj(col[i]) / mags[i])
    return out


def herm_eig(A: npt.ArrayLike, herm_tol: float = config.HERM_TOL) -> HermEig:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    A : array_like
        Square Hermitian matrix.
    herm_tol : float
        Relative tolerance on ``A - A^H``; larger deviations raise
        :class:`~qdbkit.errors.NotHermitian`.

    Returns
    -------
    HermEig
        Ascending real eigenvalues and a unitary matrix of eigenvectors.
    """
    A = as_complex_matrix(A)
    if not is_hermitian(A, herm_tol):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    A = 0.5 * (A + A.conj().T)
    w, V, ok = kernels.jacobi_eigh(A, config.MAX_SWEEPS)
    if not ok:
        raise NoConvergence("Jacobi sweeps did not converge")
    order = np.argsort(w, kind="stable")
    return HermEig(w[order], _phase_fix(V[:, order]))


def _sort_key(values: np.ndarray) -> np.ndarray:
    mod = np.round(np.abs(values), 9)
    arg = np.mod(np.angle(values), 2 * np.pi)
    arg = np.round(arg, 9)
    arg[arg >= np.round(2 * np.pi, 9)] = 0.0
    return np.lexsort((arg, -mod))


def schur(A: npt.ArrayLike) -> tuple[ComplexMatrix, ComplexMatrix]:
    """Complex Schur form ``A = Q T Q^H`` via Hessenberg reduction and QR."""
    A = as_complex_matrix(A)
    n = A.shape[0]
    if n == 0:
        return A.copy(), A.copy()
    H, Q = kernels.hessenberg(A)
    T, Q, ok = kernels.schur_qr(H, Q, config.MAX_QR_ITER)
    if not ok:
        raise NoConvergence("shifted QR iteration did not converge")
    return T, Q


def _inverse_iteration(T: np.ndarray, Q: np.ndarray, mu: complex, steps: int = 3) -> np.ndarray:
    n = T.shape[0]
    small = max(np.abs(T).max(initial=0.0), 1.0) * np.finfo(float).eps
    y = 1.0 / (1.0 + np.arange(n)) + 0.5j / (2.0 + np.arange(n))
    y = y / np.linalg.norm(y)
    for _ in range(steps):
        y = kernels.tri_solve_shifted(T, complex(mu), y, small)
        y = y / np.linalg.norm(y)
    x = Q @ y
    return x / np.linalg.norm(x)


def eig_general(
    A: npt.ArrayLike,
    vectors: bool | Sequence[int] = False,
) -> GeneralEig:
    """Eigenvalues of a general square matrix.

    Parameters
    ----------
    A : array_like
        Square complex matrix.
    vectors : bool or sequence of int
        ``True`` for all right eigenvectors, a sequence of indices into the
        sorted eigenvalue list for a subset, ``False`` for none.
        Eigenvectors are obtained by inverse iteration on the Schur form.

    Returns
    -------
    GeneralEig
    """
    T, Q = schur(A)
    diag = np.diag(T).copy()
    order = _sort_key(diag)
    values = diag[order]
    if vectors is False:
        return GeneralEig(values, None, ())
    sel = tuple(range(len(values))) if vectors is True else tuple(int(i) for i in vectors)
    cols = [_inverse_iteration(T, Q, values[i]) for i in sel]
    vecs = np.array(cols).T if cols else np.zeros((T.shape[0], 0), dtype=np.complex128)
    return GeneralEig(values, _phase_fix(vecs), sel)


def spectral_radius(A: npt.ArrayLike) -> float:
    """Largest eigenvalue modulus."""
    vals = eig_general(A).eigenvalues
    return float(np.abs(vals).max(initial=0.0))


def svd(A: npt.ArrayLike) -> SVD:
    """Thin singular value decomposition by one-sided Jacobi rotations.

    Singular values come in decreasing order.  Left singular vectors that
    belong to exactly vanishing singular values are returned as zero
    columns.
    """
    A = as_complex_matrix(A)
    m, n = A.shape
    if m < n:
        U, s, Vh = svd(A.conj().T)
        return SVD(Vh.conj().T, s, U.conj().T)
    B, V, ok = kernels.jacobi_svd(A, config.MAX_SWEEPS)
    if not ok:
        raise NoConvergence("one-sided Jacobi did not converge")
    s = np.linalg.norm(B, axis=0)
    order = np.argsort(-s, kind="stable")
    s = s[order]
    B = B[:, order]
    V = V[:, order]
    U = np.zeros_like(B)
    nz = s > 0
    U[:, nz] = B[:, nz] / s[nz]
    return SVD(U, s, V.conj().T)


def rank(A: npt.ArrayLike, rank_tol: float = config.RANK_TOL) -> int:
    """Numerical rank: singular values above ``rank_tol`` times the largest."""
    s = svd(A).s
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rank_tol * s[0]))


def pinv(A: npt.ArrayLike, rank_tol: float = config.RANK_TOL) -> ComplexMatrix:
    """Moore-Penrose pseudo-inverse with a relative singular-value cut."""
    U, s, Vh = svd(A)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((Vh.shape[1], U.shape[0]), dtype=np.complex128)
    keep = s > rank_tol * s[0]
    return (Vh[keep].conj().T / s[keep]) @ U[:, keep].conj().T


def null_space(A: npt.ArrayLike, tol: float = config.RANK_TOL) -> ComplexMatrix:
    """Orthonormal basis (columns) of the kernel of ``A``.

    Singular values at most ``tol`` times ``max(1, s_max)`` count as zero.
    """
    A = as_complex_matrix(A)
    m, n = A.shape
    if m < n:
        A = np.vstack([A, np.zeros((n - m, n), dtype=np.complex128)])
    B, V, ok = kernels.jacobi_svd(A, config.MAX_SWEEPS)
    if not ok:
        raise NoConvergence("one-sided Jacobi did not converge")
    s = np.linalg.norm(B, axis=0)
    cut = tol * max(1.0, float(s.max(initial=0.0)))
    idx = np.where(s <= cut)[0]
    idx = idx[np.argsort(s[idx], kind="stable")]
    return _phase_fix(V[:, idx])


def range_basis(A: npt.ArrayLike, rank_tol: float = config.RANK_TOL) -> ComplexMatrix:
    """Orthonormal basis (columns) of the column space of ``A``."""
    U, s, _ = svd(A)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((U.shape[0], 0), dtype=np.complex128)
    return U[:, s > rank_tol * s[0]]


def psd_eig(A: npt.ArrayLike, psd_tol: float = config.PSD_TOL) -> HermEig:
    """Eigen-decomposition of a positive semidefinite matrix.

    Eigenvalues down to ``-psd_tol * max(1, ||A||)`` are clamped to zero;
    anything more negative raises :class:`~qdbkit.errors.NotPSD`.
    """
    w, V = herm_eig(A)
    scale = max(1.0, float(np.abs(w).max(initial=0.0)))
    if w.size and w[0] < -psd_tol * scale:
        raise NotPSD(f"matrix has eigenvalue {w[0]:.3e} < 0")
    return HermEig(np.clip(w, 0.0, None), V)


def psd_sqrt(A: npt.ArrayLike, psd_tol: float = config.PSD_TOL) -> ComplexMatrix:
    """Positive square root of a positive semidefinite matrix."""
    w, V = psd_eig(A, psd_tol)
    return (V * np.sqrt(w)) @ V.conj().T


def psd_inv_sqrt(A: npt.ArrayLike, faithful_tol: float = config.FAITHFUL_TOL) -> ComplexMatrix:
    """Inverse positive square root of a positive definite matrix."""
    w, V = herm_eig(A)
    if w.size and w[0] <= faithful_tol:
        raise NotFaithful(f"smallest eigenvalue {w[0]:.3e} is not above {faithful_tol:.1e}")
    return (V / np.sqrt(w)) @ V.conj().T


def psd_power(A: npt.ArrayLike, power: float, faithful_tol: float = config.FAITHFUL_TOL) -> ComplexMatrix:
    """Real power of a positive definite matrix."""
    w, V = herm_eig(A)
    if power < 0 and w.size and w[0] <= faithful_tol:
        raise NotFaithful(f"smallest eigenvalue {w[0]:.3e} is not above {faithful_tol:.1e}")
    w = np.clip(w, 0.0, None)
    return (V * w**power) @ V.conj().T


def operator_norm(A: npt.ArrayLike) -> float:
    """Largest singular value."""
    s = svd(A).s
    return float(s[0]) if s.size else 0.0


def is_unitary(U: npt.ArrayLike, tol: float = 1e-10) -> bool:
    """Whether ``U^H U`` equals the identity within ``tol``."""
    U = as_complex_matrix(U)
    if U.shape[0] != U.shape[1]:
        return False
    return float(np.abs(U.conj().T @ U - np.eye(U.shape[0])).max(initial=0.0)) <= tol
