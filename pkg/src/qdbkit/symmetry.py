"""Unitary and anti-unitary symmetries, reversal and detailed balance.

A symmetry ``J`` is stored as a unitary matrix ``U`` and a flag:
``J x = U x`` when unitary and ``J x = U conj(x)`` when anti-unitary.  It
acts on matrices as ``j(X) = J X J^H``, i.e. ``U X U^H`` or
``U conj(X) U^H``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import numpy.typing as npt

from . import config
from . import linalg
from .channel import CPMap, QuantumChannel, kms_adjoint_superop, state_matrix, maximal_cycle
from .errors import DimensionMismatch, NotAdmissible, NotUnitary, PhaseExtractionFailed
from .linalg import ComplexMatrix


@dataclass(frozen=True)
class SymmetryOp:
    """Unitary or anti-unitary operator ``J`` on ``C^d``.

    Parameters
    ----------
    U : array_like
        Unitary matrix.
    antiunitary : bool
        Whether ``J`` applies complex conjugation before ``U``.
    """

    U: ComplexMatrix
    antiunitary: bool = False

    def __post_init__(self):
        U = linalg.as_complex_matrix(self.U).copy()
        if not linalg.is_unitary(U, 1e-9):
            raise NotUnitary("symmetry matrix is not unitary")
        U.setflags(write=False)
        object.__setattr__(self, "U", U)

    @property
    def dim(self) -> int:
        return self.U.shape[0]

    def apply(self, x: npt.ArrayLike) -> np.ndarray:
        """Action on a vector (or on the columns of a matrix)."""
        x = np.asarray(x, dtype=np.complex128)
        return self.U @ (np.conj(x) if self.antiunitary else x)

    def morphism(self, X: npt.ArrayLike) -> ComplexMatrix:
        """``j(X) = J X J^H``."""
        X = np.asarray(X, dtype=np.complex128)
        if self.antiunitary:
            X = np.conj(X)
        return self.U @ X @ self.U.conj().T

    def inverse_morphism(self, Y: npt.ArrayLike) -> ComplexMatrix:
        """``j^(-1)(Y) = J^H Y J``."""
        X = self.U.conj().T @ np.asarray(Y, dtype=np.complex128) @ self.U
        return np.conj(X) if self.antiunitary else X

    def square(self) -> ComplexMatrix:
        """The linear unitary ``J^2``."""
        return self.U @ (np.conj(self.U) if self.antiunitary else self.U)

    def sharp(self, z: complex) -> complex:
        """``z`` for unitary ``J`` and ``conj(z)`` for anti-unitary ``J``."""
        return np.conj(z) if self.antiunitary else z

    def superop(self) -> ComplexMatrix:
        """Matrix ``M`` with ``vec(j(X)) = M vec(X)`` (or ``M conj(vec(X))``)."""
        return np.kron(self.U, np.conj(self.U))

    def conjugate_superop(self, S: np.ndarray) -> ComplexMatrix:
        """Superoperator of ``j^(-1) o S o j``.

        For anti-unitary ``J`` the two conjugations cancel and the result is
        linear with entries conjugated relative to the unitary formula.
        """
        M = self.superop()
        out = M.conj().T @ np.asarray(S) @ M
        return np.conj(out) if self.antiunitary else out

    def left_multiply(self, W: npt.ArrayLike) -> "SymmetryOp":
        """The symmetry ``W J`` for a linear unitary ``W``."""
        return SymmetryOp(np.asarray(W) @ self.U, self.antiunitary)

    def __repr__(self) -> str:
        kind = "anti-unitary" if self.antiunitary else "unitary"
        return f"SymmetryOp({kind}, dim={self.dim})"


class Admissibility(NamedTuple):
    """Result of the admissibility test.

    ``eta`` is the eigenvalue in ``Phi(J^2) = eta J^2``.
    """

    admissible: bool
    eta: complex
    state_residual: float
    square_residual: float


def is_admissible(
    channel: CPMap, rho: npt.ArrayLike, J: SymmetryOp, tol: float = config.ADMISSIBLE_TOL
) -> Admissibility:
    """Check ``j(rho) = rho`` and ``Phi(J^2) = eta J^2`` for some ``eta``."""
    rho = state_matrix(rho)
    if J.dim != channel.dim or rho.shape[0] != channel.dim:
        raise DimensionMismatch("symmetry, state and channel dimensions differ")
    state_res = float(np.abs(J.morphism(rho) - rho).max())
    J2 = J.square()
    image = channel.apply(J2)
    eta = complex(np.vdot(J2, image) / np.vdot(J2, J2))
    sq_res = float(np.abs(image - eta * J2).max())
    return Admissibility(state_res <= tol and sq_res <= tol, eta, state_res, sq_res)


def reversal_superop(channel: CPMap, rho: npt.ArrayLike, J: SymmetryOp) -> ComplexMatrix:
    """Superoperator of ``j^(-1) o Phi^rho o j`` with ``Phi^rho`` the KMS adjoint."""
    return J.conjugate_superop(kms_adjoint_superop(channel.superop, rho))


def reversal(channel: CPMap, rho: npt.ArrayLike, J: SymmetryOp) -> QuantumChannel:
    """Reversed channel, with Kraus operators recovered from its Choi matrix."""
    S = reversal_superop(channel, rho, J)
    return QuantumChannel.from_superop(S, check=False)


class QdbResult(NamedTuple):
    holds: bool
    residual: float
    eta: complex


def qdb_check(
    channel: CPMap,
    rho: npt.ArrayLike,
    J: SymmetryOp,
    tol: float = config.QDB_TOL,
    admissible_tol: float = config.ADMISSIBLE_TOL,
) -> QdbResult:
    """Detailed balance test: Frobenius norm of ``reversal - channel`` superoperators.

    Raises
    ------
    NotAdmissible
        If ``J`` fails the admissibility test.
    """
    adm = is_admissible(channel, rho, J, admissible_tol)
    if not adm.admissible:
        raise NotAdmissible(
            f"symmetry is not admissible (state residual {adm.state_residual:.2e}, "
            f"square residual {adm.square_residual:.2e})"
        )
    res = float(np.linalg.norm(reversal_superop(channel, rho, J) - channel.superop))
    return QdbResult(res <= tol, res, adm.eta)


def extend_admissible(
    channel: CPMap, rho: npt.ArrayLike, J: SymmetryOp, tol: float = config.ADMISSIBLE_TOL
) -> list[tuple[SymmetryOp, complex]]:
    """Further admissible symmetries ``U^n J`` built from the cycle unitary.

    Returns one pair ``(U^n J, eta_n)`` per distinct value of
    ``xi^(2n)``, where ``xi`` is the primitive root of the period.
    """
    adm = is_admissible(channel, rho, J, tol)
    if not adm.admissible:
        raise NotAdmissible("base symmetry is not admissible")
    cyc = maximal_cycle(channel)
    out = []
    seen: list[complex] = []
    power = np.eye(channel.dim, dtype=np.complex128)
    for n in range(cyc.period):
        alpha = np.exp(4j * np.pi * n / cyc.period)
        if not any(abs(alpha - s) < 1e-9 for s in seen):
            seen.append(alpha)
            Jn = J.left_multiply(power)
            out.append((Jn, is_admissible(channel, rho, Jn, tol).eta))
        power = power @ cyc.unitary
    return out


def covariance_check(channel: CPMap, Gamma: SymmetryOp) -> float:
    """Largest residual of ``Phi(g(X)) = g(Phi(X))`` over matrix units."""
    d = channel.dim
    worst = 0.0
    for a in range(d):
        for b in range(d):
            E = np.zeros((d, d), dtype=np.complex128)
            E[a, b] = 1.0
            r = channel.apply(Gamma.morphism(E)) - Gamma.morphism(channel.apply(E))
            worst = max(worst, float(np.abs(r).max()))
    return worst


@dataclass(frozen=True)
class JFamily:
    """Finite family of structured candidate symmetries.

    Candidates are ``J e_a = z_a e_(perm(a))`` (optionally followed by
    complex conjugation) with phases ``z_a = exp(2 pi i k_a / denominator)``
    and ``z_0 = 1`` (a global phase does not affect detailed balance or
    admissibility).

    Parameters
    ----------
    kinds : tuple of str
        Subset of ``("unitary", "antiunitary")``.
    denominator : int
        Resolution of the phase lattice.
    permutations : sequence of sequences, optional
        Permutations ``perm`` as index lists.  Defaults to all cyclic shifts
        ``a -> a + r`` and reflections ``a -> c - a`` modulo ``d``.
    """

    kinds: tuple = ("unitary", "antiunitary")
    denominator: int = 24
    permutations: tuple | None = None

    def perms(self, d: int) -> list[tuple[int, ...]]:
        if self.permutations is not None:
            return [tuple(int(i) for i in p) for p in self.permutations]
        shifts = [tuple((a + r) % d for a in range(d)) for r in range(d)]
        refl = [tuple((c - a) % d for a in range(d)) for c in range(d)]
        out = []
        for p in shifts + refl:
            if p not in out:
                out.append(p)
        return out


class SearchResult(NamedTuple):
    """Symmetries found by :func:`search_qdb` together with a text report."""

    found: list
    report: str


def _phase_constraints(S: np.ndarray, T: np.ndarray, d: int, N: int, anti: bool, tol: float):
    """Linear congruences on the phase exponents, or ``None`` if unsolvable."""
    constraints: dict[tuple, int] = {}
    S4 = S.reshape(d, d, d, d)
    T4 = T.reshape(d, d, d, d)
    aS, aT = np.abs(S4), np.abs(T4)
    if np.abs(aS - aT).max() > tol:
        return None
    idx = np.argwhere(np.maximum(aS, aT) > tol)
    sign = 1 if anti else -1
    for a, b, c, e in idx:
        t = T4[a, b, c, e]
        s = S4[a, b, c, e]
        ratio = s / (np.conj(t) if anti else t)
        r = np.angle(ratio) * N / (2 * np.pi)
        ri = int(np.rint(r))
        if abs(r - ri) > 1e-6:
            return None
        coef: dict[int, int] = {}
        for i, c_ in ((a, sign), (b, -sign), (c, -sign), (e, sign)):
            coef[int(i)] = coef.get(int(i), 0) + c_
        key = tuple(sorted((i, v) for i, v in coef.items() if v != 0))
        val = ri % N
        if not key:
            if val != 0:
                return None
            continue
        if key in constraints and constraints[key] != val:
            return None
        constraints[key] = val
    return constraints


def _solve_congruences(constraints: dict, d: int, N: int, limit: int = 100_000) -> list[list[int]]:
    by_last: dict[int, list] = {i: [] for i in range(d)}
    for key, val in constraints.items():
        by_last[max(i for i, _ in key)].append((key, val))
    solutions: list[list[int]] = []
    k = [0] * d

    def ok(pos: int) -> bool:
        for key, val in by_last[pos]:
            if sum(c * k[i] for i, c in key) % N != val:
                return False
        return True

    def rec(pos: int) -> None:
        if len(solutions) >= limit:
            return
        if pos == d:
            solutions.append(list(k))
            return
        choices = [0] if pos == 0 else range(N)
        for v in choices:
            k[pos] = v
            if ok(pos):
                rec(pos + 1)

    rec(0)
    return solutions


def search_qdb(
    channel: CPMap,
    rho: npt.ArrayLike,
    family: JFamily = JFamily(),
    tol: float = config.QDB_TOL,
    threads: int = 1,
) -> SearchResult:
    """Exhaustive scan of a structured family for symmetries giving detailed balance.

    For each permutation and kind, the condition ``reversal = channel`` is
    reduced entrywise to linear congruences on the phase exponents, which
    are solved by backtracking.  Every solution is re-verified with
    :func:`qdb_check`.

    Returns
    -------
    SearchResult
        ``found`` lists pairs ``(J, eta)`` with ``Phi(J^2) = eta J^2``.
    """
    rho = state_matrix(rho)
    d = channel.dim
    N = family.denominator
    S = np.asarray(channel.superop)
    S_rho = kms_adjoint_superop(S, rho)
    tasks = [(kind, perm) for kind in family.kinds for perm in family.perms(d)]

    def run(task):
        kind, perm = task
        anti = kind == "antiunitary"
        Pi = np.zeros((d, d), dtype=np.complex128)
        for a, pa in enumerate(perm):
            Pi[pa, a] = 1.0
        M = np.kron(Pi, Pi)
        T = M.conj().T @ S_rho @ M
        cons = _phase_constraints(S, T, d, N, anti, 1e-9)
        if cons is None:
            return []
        hits = []
        for ks in _solve_congruences(cons, d, N):
            z = np.exp(2j * np.pi * np.array(ks) / N)
            J = SymmetryOp(Pi * z[None, :], anti)
            adm = is_admissible(channel, rho, J)
            if not adm.admissible:
                continue
            res = float(np.linalg.norm(reversal_superop(channel, rho, J) - S))
            if res <= tol:
                hits.append((J, adm.eta))
        return hits

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]
    found = [hit for hits in results for hit in hits]
    lines = [
        f"family kinds={','.join(family.kinds)} permutations={len(family.perms(d))} "
        f"phase_denominator={N} candidates={len(tasks) * N ** (d - 1)}",
        "restriction: permutation-times-diagonal-phase symmetries only; "
        "a negative result does not exclude symmetries outside this family",
        f"found={len(found)}",
    ]
    etas = sorted({(round(e.real, 9) + 0.0, round(e.imag, 9) + 0.0) for _, e in found})
    lines.append("eta_values=" + ";".join(f"{re:+.6f}{im:+.6f}i" for re, im in etas))
    return SearchResult(found, "\n".join(lines))


def extract_eta(values: Sequence[complex], d: int, tol: float = 1e-9) -> tuple[complex, complex]:
    """Write ``values[a] = zeta * eta^a`` with ``eta`` a ``d``-th root of unity.

    Raises
    ------
    PhaseExtractionFailed
        If the sequence is not geometric with such a ratio.
    """
    v = np.asarray(values, dtype=np.complex128)
    if np.any(np.abs(v) < 1e-12):
        raise PhaseExtractionFailed("sequence has vanishing entries")
    ratios = np.roll(v, -1) / v
    eta = ratios[0]
    if np.abs(ratios - eta).max() > tol or abs(eta**d - 1) > tol * d:
        raise PhaseExtractionFailed("sequence is not geometric with a root-of-unity ratio")
    return complex(eta), complex(v[0])
