"""Path statistics of repeated instrument measurements.

Measuring an instrument ``J`` repeatedly in the state ``rho`` yields the
word probabilities ``P(a_1 ... a_n) = tr(rho J(a_1) o ... o J(a_n)(1))``.
Comparing them with the reversed words ``theta(a_n) ... theta(a_1)``
gives the entropy production ``Ep_n``, a relative entropy.

Word distributions are dense arrays of shape ``(m,) * n`` indexed by
alphabet positions, first symbol on the first axis.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence
import warnings

import numpy as np
import numpy.typing as npt

from . import config
from . import linalg
from .channel import state_matrix
from .errors import DimensionMismatch, WordCapExceeded
from .instrument import Instrument, Reversal


@dataclass(frozen=True)
class WordDistribution:
    """Probabilities of all words of length ``n``.

    Attributes
    ----------
    alphabet : tuple
        Outcome labels; axis entries index into it.
    probs : ndarray
        Array of shape ``(len(alphabet),) * n``.
    """

    alphabet: tuple
    probs: np.ndarray

    @property
    def n(self) -> int:
        return self.probs.ndim

    def __getitem__(self, word: Sequence) -> float:
        pos = {a: i for i, a in enumerate(self.alphabet)}
        return float(self.probs[tuple(pos[a] for a in word)])

    def items(self):
        """Iterate over ``(word, probability)`` pairs."""
        for idx in np.ndindex(*self.probs.shape):
            yield tuple(self.alphabet[i] for i in idx), float(self.probs[idx])


def _check_state(instr: Instrument, rho: np.ndarray) -> None:
    if rho.shape[0] != instr.dim:
        raise DimensionMismatch("state and instrument dimensions differ")
    total = instr.total()
    res = float(np.abs(total.apply_dual(rho) - rho).max())
    if res > 1e-9:
        warnings.warn(f"state is not invariant for the instrument (residual {res:.2e})", stacklevel=3)


def _push_states(stacks: list[np.ndarray], states: np.ndarray) -> np.ndarray:
    """Apply every outcome dual to every state; new symbol is the minor index."""
    out = []
    for K in stacks:
        acc = np.zeros_like(states)
        for Ki in K:
            acc += Ki @ states @ Ki.conj().T
        out.append(acc)
    return np.stack(out, axis=1).reshape(-1, *states.shape[1:])


def _pull_effects(stacks: list[np.ndarray], effects: np.ndarray) -> np.ndarray:
    """Apply every outcome map to every effect; new symbol is the major index."""
    out = []
    for K in stacks:
        acc = np.zeros_like(effects)
        for Ki in K:
            acc += Ki.conj().T @ effects @ Ki
        out.append(acc)
    return np.stack(out, axis=0).reshape(-1, *effects.shape[1:])


class _Layers:
    """Cached prefix states and suffix effects of increasing length."""

    def __init__(self, instr: Instrument, rho: np.ndarray):
        self.stacks = instr.kraus_stacks()
        self.m = len(instr.alphabet)
        d = instr.dim
        self.states = [rho[None].astype(np.complex128)]
        self.effects = [np.eye(d, dtype=np.complex128)[None]]

    def state(self, k: int) -> np.ndarray:
        while len(self.states) <= k:
            self.states.append(_push_states(self.stacks, self.states[-1]))
        return self.states[k]

    def effect(self, k: int) -> np.ndarray:
        while len(self.effects) <= k:
            self.effects.append(_pull_effects(self.stacks, self.effects[-1]))
        return self.effects[k]

    def probs(self, n: int) -> np.ndarray:
        k = (n + 1) // 2
        l = n - k
        S = self.state(k)
        E = self.effect(l)
        d = S.shape[-1]
        Sf = S.reshape(len(S), d * d)
        Ef = np.swapaxes(E, 1, 2).reshape(len(E), d * d)
        # tr(S E) = sum_ij S_ij E_ji, real for Hermitian arguments
        P = Sf.real @ Ef.real.T - Sf.imag @ Ef.imag.T
        P = P.reshape((self.m,) * n) if n > 0 else P.reshape(())
        low = float(P.min(initial=0.0))
        if low < -1e-10:
            warnings.warn(f"negative word probability {low:.2e} clipped", stacklevel=3)
        return np.clip(P, 0.0, None)


def _cap(m: int, n: int, word_cap: int) -> None:
    if m**n > word_cap:
        raise WordCapExceeded(f"{m}^{n} words exceed the cap of {word_cap}")


def word_probs(
    instr: Instrument, rho: npt.ArrayLike, n: int, word_cap: int = config.WORD_CAP
) -> WordDistribution:
    """Probabilities of all words of length ``n``.

    States after the first half of each word and effects of the second half
    are built recursively and contracted in a single matrix product.
    """
    rho = state_matrix(rho)
    _check_state(instr, rho)
    _cap(len(instr.alphabet), n, word_cap)
    return WordDistribution(instr.alphabet, _Layers(instr, rho).probs(n))


def reverse_probs(probs: np.ndarray, perm: np.ndarray) -> np.ndarray:
    """``Q[w_1..w_n] = P[perm[w_n], ..., perm[w_1]]``."""
    n = probs.ndim
    if n == 0:
        return probs.copy()
    Pt = np.transpose(probs, tuple(range(n - 1, -1, -1)))
    return Pt[np.ix_(*([np.asarray(perm)] * n))]


def reverse_dist(dist: WordDistribution, theta: Reversal) -> WordDistribution:
    """Distribution of reversed, relabelled words."""
    return WordDistribution(dist.alphabet, reverse_probs(dist.probs, theta.permutation(dist.alphabet)))


def relative_entropy(P: npt.ArrayLike, Q: npt.ArrayLike, floor: float = config.PROB_FLOOR) -> float:
    """Relative entropy of probability vectors, ``inf`` without absolute continuity.

    Entries at most ``floor`` count as zero.  The sum is evaluated termwise
    as ``P log(P/Q) - P + Q``, which agrees with ``sum P log(P/Q)`` for
    normalised inputs and is never negative.
    """
    P = np.asarray(P, dtype=float).reshape(-1)
    Q = np.asarray(Q, dtype=float).reshape(-1)
    if P.shape != Q.shape:
        raise DimensionMismatch("distributions have different sizes")
    supp = P > floor
    if np.any(Q[supp] <= floor):
        return math.inf
    p, q = P[supp], Q[supp]
    terms = p * np.log(p / q) - p + q
    return max(0.0, float(terms.sum() + np.clip(Q[~supp], 0.0, None).sum()))


def er_constant(rho: npt.ArrayLike) -> float:
    """``||rho^(-1)||``, the reciprocal of the smallest eigenvalue."""
    w = linalg.herm_eig(state_matrix(rho)).eigenvalues
    return float(1.0 / w[0]) if w[0] > 0 else math.inf


class EpRow(NamedTuple):
    n: int
    ep: float
    ep_per_n: float
    fekete_lower: float
    C: float
    infinite: bool


@dataclass
class EpReport:
    """Entropy production for word lengths ``1..n_max``.

    ``fekete_lower`` at ``n`` is ``max_(m <= n) (Ep_m - log C) / m``, a
    lower bound on the entropy production rate.
    """

    rows: list

    @property
    def ep(self) -> dict:
        return {r.n: r.ep for r in self.rows}

    @property
    def C(self) -> float:
        return self.rows[0].C if self.rows else math.nan

    def to_csv(self, stream=None) -> str:
        buf = io.StringIO() if stream is None else stream
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "Ep", "Ep_per_n", "fekete_lower", "C", "infinite_flag"])
        for r in self.rows:
            writer.writerow([r.n, repr(r.ep), repr(r.ep_per_n), repr(r.fekete_lower), repr(r.C), int(r.infinite)])
        return buf.getvalue() if stream is None else ""


def ep_exact(
    instr: Instrument,
    rho: npt.ArrayLike,
    theta: Reversal,
    n_max: int,
    word_cap: int = config.WORD_CAP,
) -> EpReport:
    """Exact ``Ep_n`` for ``n = 1..n_max`` by full word enumeration."""
    rho = state_matrix(rho)
    _check_state(instr, rho)
    m = len(instr.alphabet)
    _cap(m, n_max, word_cap)
    perm = theta.permutation(instr.alphabet)
    C = er_constant(rho)
    logC = math.log(C)
    layers = _Layers(instr, rho)
    rows = []
    best = -math.inf
    for n in range(1, n_max + 1):
        P = layers.probs(n)
        ep = relative_entropy(P, reverse_probs(P, perm))
        best = max(best, (ep - logC) / n)
        rows.append(EpRow(n, ep, ep / n, best, C, math.isinf(ep)))
    return EpReport(rows)


def subadditivity_check(report: EpReport, tol: float = 1e-9) -> list[tuple[int, int, float]]:
    """Pairs ``(n, m)`` with ``Ep_(n+m) < Ep_n + Ep_m - log C - tol``."""
    ep = report.ep
    logC = math.log(report.C)
    out = []
    for n in ep:
        for m in ep:
            if n + m in ep:
                gap = ep[n + m] - (ep[n] + ep[m] - logC)
                if gap < -tol:
                    out.append((n, m, gap))
    return out


def tri_check(instr: Instrument, rho: npt.ArrayLike, theta: Reversal, n_max: int) -> list[float]:
    """``max_w |P(w) - P_reversed(w)|`` for ``n = 1..n_max``."""
    rho = state_matrix(rho)
    perm = theta.permutation(instr.alphabet)
    layers = _Layers(instr, rho)
    out = []
    for n in range(1, n_max + 1):
        P = layers.probs(n)
        out.append(float(np.abs(P - reverse_probs(P, perm)).max()))
    return out


class ErResult(NamedTuple):
    """Worst ratio ``P(AB) / (C P(A) P(B))`` over word pairs."""

    passed: bool
    worst_ratio: float
    C: float
    witness: tuple


def er_check(
    instr: Instrument,
    rho: npt.ArrayLike,
    n_max: int,
    C: float | None = None,
    tol: float = 1e-9,
    floor: float = config.PROB_FLOOR,
) -> ErResult:
    """Test ``P(A and shifted B) <= C P(A) P(B)`` on word cylinders.

    ``A`` ranges over words of length ``n`` and ``B`` over words of
    length ``m`` for ``n, m <= n_max``; the shifted cylinder of ``B``
    starts right after ``A``.
    """
    rho = state_matrix(rho)
    C = er_constant(rho) if C is None else float(C)
    layers = _Layers(instr, rho)
    alpha = instr.alphabet
    m_ = len(alpha)
    worst, witness = 0.0, ()
    singles = {n: layers.probs(n).reshape(-1) for n in range(1, n_max + 1)}
    for n in range(1, n_max + 1):
        for m in range(1, n_max + 1):
            joint = layers.probs(n + m).reshape(m_**n, m_**m)
            denom = C * np.outer(singles[n], singles[m])
            mask = denom > floor
            ratio = np.zeros_like(joint)
            ratio[mask] = joint[mask] / denom[mask]
            bad = (~mask) & (joint > floor)
            if bad.any():
                i, j = np.argwhere(bad)[0]
                return ErResult(False, math.inf, C, (_word(i, n, alpha), _word(j, m, alpha)))
            i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
            if ratio[i, j] > worst:
                worst = float(ratio[i, j])
                witness = (_word(i, n, alpha), _word(j, m, alpha))
    return ErResult(worst <= 1.0 + tol, worst, C, witness)


def _word(flat: int, n: int, alphabet: tuple) -> tuple:
    return tuple(alphabet[i] for i in np.unravel_index(int(flat), (len(alphabet),) * n))


def cylinder_prob(instr: Instrument, rho: npt.ArrayLike, pattern: Sequence) -> float:
    """Probability of a cylinder; ``None`` in ``pattern`` means any outcome."""
    sigma = state_matrix(rho).astype(np.complex128)
    total = instr.total()
    for a in pattern:
        sigma = total.apply_dual(sigma) if a is None else instr.maps[a].apply_dual(sigma)
    return float(np.trace(sigma).real)


def cesaro_correlation(
    instr: Instrument, rho: npt.ArrayLike, A: Sequence, B: Sequence, N: int
) -> float:
    """``(1/N) sum_(k<N) P(A and B shifted by k)`` for word cylinders ``A, B``."""
    acc = 0.0
    for k in range(N):
        length = max(len(A), k + len(B))
        pattern: list = [None] * length
        ok = True
        for i, a in enumerate(A):
            pattern[i] = a
        for i, b in enumerate(B):
            cur = pattern[k + i]
            if cur is not None and cur != b:
                ok = False
                break
            pattern[k + i] = b
        if ok:
            acc += cylinder_prob(instr, rho, pattern)
    return acc / N


class Trajectory(NamedTuple):
    word: tuple
    states: list


def sample_trajectory(instr: Instrument, rho: npt.ArrayLike, n: int, seed: int) -> Trajectory:
    """Sample one outcome word with its sequence of posterior states."""
    rng = np.random.default_rng(seed)
    sigma = state_matrix(rho).astype(np.complex128)
    stacks = instr.kraus_stacks()
    word, states = [], []
    for u in rng.random(n):
        cand = [np.einsum("kab,bc,kdc->ad", K, sigma, K.conj()) for K in stacks]
        p = np.array([max(np.trace(c).real, 0.0) for c in cand])
        cum = np.cumsum(p)
        i = min(int(np.searchsorted(cum, u * cum[-1], side="right")), len(p) - 1)
        sigma = cand[i] / p[i]
        word.append(instr.alphabet[i])
        states.append(sigma)
    return Trajectory(tuple(word), states)


class McEstimate(NamedTuple):
    """Monte Carlo estimate of ``Ep_n / n`` with its batch-means standard error."""

    ep_per_n: float
    stderr: float
    n: int
    samples: int
    infinite: bool


def _batch_log_probs(stacks, sigma0, words):
    """Log probability of each row of ``words`` (positions into the alphabet)."""
    B, n = words.shape
    sigma = np.broadcast_to(sigma0, (B,) + sigma0.shape).copy()
    logp = np.zeros(B)
    for t in range(n):
        nxt = np.zeros_like(sigma)
        for a, K in enumerate(stacks):
            sel = words[:, t] == a
            if not sel.any():
                continue
            s = sigma[sel]
            acc = np.zeros_like(s)
            for Ki in K:
                acc += Ki @ s @ Ki.conj().T
            nxt[sel] = acc
        tr = np.trace(nxt, axis1=1, axis2=2).real
        with np.errstate(divide="ignore"):
            logp += np.log(np.clip(tr, 0.0, None))
        safe = np.where(tr > 0, tr, 1.0)
        sigma = nxt / safe[:, None, None]
    return logp


def ep_mc(
    instr: Instrument,
    rho: npt.ArrayLike,
    theta: Reversal,
    n: int,
    samples: int,
    seed: int,
    batches: int = 20,
) -> McEstimate:
    """Monte Carlo estimate of ``Ep_n / n`` from sampled words.

    Samples are split into ``batches`` groups; group ``b`` draws from a
    generator seeded by ``SeedSequence(seed, spawn_key=(b,))`` so results
    depend only on ``seed`` and ``batches``.  Each word contributes
    ``log P(w) - log P(reversed w)``.
    """
    rho = state_matrix(rho).astype(np.complex128)
    _check_state(instr, rho)
    stacks = instr.kraus_stacks()
    perm = theta.permutation(instr.alphabet)
    m = len(stacks)
    sizes = [samples // batches + (1 if b < samples % batches else 0) for b in range(batches)]
    means, values = [], []
    for b, size in enumerate(sizes):
        if size == 0:
            continue
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(b,)))
        sigma = np.broadcast_to(rho, (size,) + rho.shape).copy()
        words = np.zeros((size, n), dtype=np.int64)
        logp = np.zeros(size)
        for t in range(n):
            cands = []
            for K in stacks:
                acc = np.zeros_like(sigma)
                for Ki in K:
                    acc += Ki @ sigma @ Ki.conj().T
                cands.append(acc)
            cand = np.stack(cands, axis=1)
            p = np.clip(np.trace(cand, axis1=2, axis2=3).real, 0.0, None)
            cum = np.cumsum(p, axis=1)
            u = rng.random(size) * cum[:, -1]
            choice = np.minimum((cum <= u[:, None]).sum(axis=1), m - 1)
            pc = p[np.arange(size), choice]
            words[:, t] = choice
            logp += np.log(pc)
            sigma = cand[np.arange(size), choice] / pc[:, None, None]
        rev = perm[words[:, ::-1]]
        logq = _batch_log_probs(stacks, rho, rev)
        vals = logp - logq
        values.append(vals)
        means.append(vals.mean())
    allv = np.concatenate(values)
    infinite = bool(np.isinf(allv).any())
    if infinite:
        return McEstimate(math.inf, math.nan, n, int(samples), True)
    mean = float(allv.mean())
    means = np.array(means)
    stderr = float(means.std(ddof=1) / np.sqrt(len(means))) if len(means) > 1 else math.nan
    return McEstimate(mean / n, stderr / n, n, int(samples), infinite)
