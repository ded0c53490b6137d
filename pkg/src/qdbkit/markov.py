"""Classical Markov chains, detailed balance and their quantum embedding.

A chain with transition matrix ``P`` and invariant law ``pi`` is in detailed
balance with respect to an involution ``theta`` of the states when
``pi_theta(j) P_theta(j)theta(i) = pi_i P_ij``; with ``theta = id`` this is the
usual ``pi_i P_ij = pi_j P_ji``.  Embedding the chain as an instrument on
``C^d`` reproduces its path measure exactly and serves as an oracle for the
quantum statistics code.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
import numpy.typing as npt

from . import config
from . import linalg
from .channel import CPMap
from .errors import (
    BadParameters,
    NotFaithful,
    ThetaNotInvolution,
    ThetaNotPiInvariant,
    WordCapExceeded,
)
from .instrument import Instrument, Reversal

STOCH_TOL = 1e-10


def stationary(P: npt.ArrayLike) -> np.ndarray:
    """Invariant row vector of a stochastic matrix.

    The left null space of ``P - 1`` is computed, negative rounding noise is
    clipped and the result normalized.  For reducible chains with several
    invariant laws the first null vector is returned.
    """
    P = np.asarray(P, dtype=float)
    ns = linalg.null_space(P.T - np.eye(P.shape[0]))
    if ns.shape[1] == 0:
        raise BadParameters("no invariant law found")
    v = ns[:, 0].real if np.abs(ns[:, 0].imag).max() < 1e-12 else np.abs(ns[:, 0])
    v = v * np.sign(v.sum())
    v = np.clip(v, 0.0, None)
    return v / v.sum()


@dataclass(frozen=True)
class MarkovChain:
    """Finite Markov chain with a validated invariant law.

    Parameters
    ----------
    P : array_like
        Row-stochastic transition matrix.
    pi : array_like, optional
        Invariant law; computed when omitted and validated otherwise.
    """

    P: np.ndarray
    pi: np.ndarray = field(default=None)

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise BadParameters("P must be square")
        if P.min() < -STOCH_TOL or np.abs(P.sum(axis=1) - 1).max() > STOCH_TOL:
            raise BadParameters("P is not row-stochastic")
        pi = stationary(P) if self.pi is None else np.asarray(self.pi, dtype=float)
        if pi.shape != (P.shape[0],) or abs(pi.sum() - 1) > STOCH_TOL or pi.min() < -STOCH_TOL:
            raise BadParameters("pi is not a probability vector")
        if np.abs(pi @ P - pi).max() > 1e-9:
            raise BadParameters("pi is not invariant for P")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "pi", pi)

    @property
    def d(self) -> int:
        return self.P.shape[0]

    def is_faithful(self, tol: float = config.FAITHFUL_TOL) -> bool:
        return bool(self.pi.min() > tol)

    def path_probs(self, n: int, word_cap: int = config.WORD_CAP) -> np.ndarray:
        """``pi_(a_1) P_(a_1 a_2) ... P_(a_(n-1) a_n)`` as an array of shape ``(d,) * n``."""
        if self.d**n > word_cap:
            raise WordCapExceeded(f"{self.d}**{n} paths exceed the cap {word_cap}")
        out = self.pi.copy()
        for _ in range(n - 1):
            out = out[..., None] * self.P.reshape((1,) * (out.ndim - 1) + self.P.shape)
        return out


@dataclass(frozen=True)
class PermInvolution:
    """Involutive permutation of the states, ``perm[i] = theta(i)``."""

    perm: tuple

    def __post_init__(self):
        perm = tuple(int(i) for i in self.perm)
        if sorted(perm) != list(range(len(perm))):
            raise BadParameters("not a permutation")
        if any(perm[perm[i]] != i for i in range(len(perm))):
            raise ThetaNotInvolution("theta o theta != id")
        object.__setattr__(self, "perm", perm)

    @classmethod
    def identity(cls, d: int) -> "PermInvolution":
        return cls(tuple(range(d)))

    def matrix(self) -> np.ndarray:
        """Permutation matrix with ``Theta[i, theta(i)] = 1``."""
        d = len(self.perm)
        M = np.zeros((d, d))
        M[np.arange(d), self.perm] = 1.0
        return M

    def as_reversal(self) -> Reversal:
        return Reversal({i: self.perm[i] for i in range(len(self.perm))})


def db_check(chain: MarkovChain) -> float:
    """``max_ij |pi_i P_ij - pi_j P_ji|``."""
    F = chain.pi[:, None] * chain.P
    return float(np.abs(F - F.T).max())


class GeneralizedDb(NamedTuple):
    """Result of :func:`generalized_db_check`.

    ``tri`` lists ``max |P(w) - P(theta(reverse w))|`` over paths of length
    ``n = 1..len(tri)``.
    """

    residual: float
    tri: list


def generalized_db_check(
    chain: MarkovChain,
    theta: PermInvolution,
    n_max: int = 6,
    tol: float = 1e-10,
) -> GeneralizedDb:
    """Residual ``max_ij |pi_theta(j) P_theta(j)theta(i) - pi_i P_ij|`` plus path reversal checks.

    Raises
    ------
    ThetaNotPiInvariant
        If ``pi o theta != pi``.
    """
    t = np.array(theta.perm)
    if len(t) != chain.d:
        raise BadParameters("theta acts on a different number of states")
    if np.abs(chain.pi[t] - chain.pi).max() > tol:
        raise ThetaNotPiInvariant("theta does not preserve pi")
    F = chain.pi[:, None] * chain.P
    residual = float(np.abs(F[np.ix_(t, t)].T - F).max())
    tri = []
    for n in range(1, n_max + 1):
        Pn = chain.path_probs(n)
        rev = np.transpose(Pn, tuple(range(n))[::-1])
        rev = rev[np.ix_(*([t] * n))] if n > 1 else rev[t]
        tri.append(float(np.abs(Pn - rev).max()))
    return GeneralizedDb(residual, tri)


def pi_orthogonality(chain: MarkovChain, theta: PermInvolution) -> float:
    """``|Theta^T diag(pi) Theta - diag(pi)|``, zero when ``theta`` preserves ``pi``."""
    T = theta.matrix()
    D = np.diag(chain.pi)
    return float(np.abs(T.T @ D @ T - D).max())


def embed(chain: MarkovChain, labels: Sequence | None = None) -> tuple[Instrument, np.ndarray]:
    """Instrument and state on ``C^d`` reproducing the chain's path measure.

    Outcome ``a`` is the map ``X -> sum_i P_ia <a|X|a> e_i e_i^H`` with Kraus
    operators ``sqrt(P_ia) e_a e_i^H``, one per incoming state ``i``.  The
    state is ``diag(pi)``.

    Raises
    ------
    NotFaithful
        If some state has zero invariant weight.
    """
    if not chain.is_faithful():
        raise NotFaithful("the invariant law must be strictly positive")
    d = chain.d
    labels = tuple(range(d)) if labels is None else tuple(labels)
    maps = {}
    for a, lab in enumerate(labels):
        K = np.zeros((d, d, d), dtype=np.complex128)
        K[np.arange(d), a, np.arange(d)] = np.sqrt(chain.P[:, a])
        keep = chain.P[:, a] > 0
        maps[lab] = CPMap(K[keep] if keep.any() else K[:1])
    return Instrument(labels, maps), np.diag(chain.pi).astype(np.complex128)


def spin_flip_chain(
    p: float, q: float, sites: int = 3
) -> tuple[MarkovChain, PermInvolution]:
    """Persistent walk on a ring, in detailed balance only up to a velocity flip.

    States are pairs ``(x, v)`` with position ``x`` in ``range(sites)`` and
    velocity ``v = +-1``, numbered ``x`` for ``v = +1`` and ``sites + x``
    for ``v = -1``.  Each step the walker moves one site along its velocity
    with probability ``p``, reverses its velocity with probability ``q``
    and stays otherwise.  The chain satisfies detailed balance with respect
    to ``(x, v) -> (x, -v)``; for ``sites >= 3`` and ``p > 0`` it violates
    the ordinary condition.
    """
    if min(p, q) < 0 or p + q > 1:
        raise BadParameters("p and q must be probabilities with p + q <= 1")
    if sites < 2:
        raise BadParameters("at least two sites are needed")
    L = sites
    P = np.zeros((2 * L, 2 * L))
    for x in range(L):
        plus, minus = x, L + x
        P[plus, (x + 1) % L] += p
        P[minus, L + (x - 1) % L] += p
        P[plus, minus] += q
        P[minus, plus] += q
        P[plus, plus] += 1 - p - q
        P[minus, minus] += 1 - p - q
    flip = tuple(list(range(L, 2 * L)) + list(range(L)))
    return MarkovChain(P), PermInvolution(flip)
