"""Random test objects: Haar unitaries, channels, states and chains.

All functions take a :class:`numpy.random.Generator` so that results are
reproducible from a seed.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .channel import QuantumChannel
from .markov import MarkovChain


def ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Matrix with independent standard complex Gaussian entries."""
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR with the phase correction of the diagonal of R."""
    Q, R = np.linalg.qr(ginibre(rng, d, d))
    diag = np.diag(R)
    return Q * (diag / np.abs(diag))[None, :]


def random_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Isometry ``G (G^H G)^(-1/2)`` from a Ginibre matrix ``G``."""
    G = ginibre(rng, rows, cols)
    return G @ linalg.psd_inv_sqrt(G.conj().T @ G)


def random_channel(d: int, n_kraus: int, rng: np.random.Generator) -> QuantumChannel:
    """Unital-in-the-Heisenberg-picture channel with ``n_kraus`` random Kraus operators."""
    V = random_isometry(n_kraus * d, d, rng)
    return QuantumChannel(V.reshape(n_kraus, d, d))


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Density matrix ``G G^H / tr`` with ``G`` of shape ``d x rank``."""
    G = ginibre(rng, d, d if rank is None else rank)
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    G = ginibre(rng, d, d)
    return (G + G.conj().T) / 2


def random_chain(d: int, rng: np.random.Generator) -> MarkovChain:
    """Chain with rows drawn from a flat Dirichlet law."""
    return MarkovChain(rng.dirichlet(np.ones(d), size=d))


def random_db_chain(d: int, rng: np.random.Generator) -> MarkovChain:
    """Reversible chain: random walk on a complete graph with symmetric edge weights."""
    W = rng.uniform(0.1, 1.0, size=(d, d))
    W = W + W.T
    P = W / W.sum(axis=1, keepdims=True)
    pi = W.sum(axis=1) / W.sum()
    return MarkovChain(P, pi)
