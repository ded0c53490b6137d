import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qdbkit import cds, linalg
from qdbkit.channel import (
    CPMap,
    DensityMatrix,
    QuantumChannel,
    choi_from_superop,
    invariant_state,
    is_irreducible,
    kms_adjoint,
    kms_adjoint_superop,
    kms_inner,
    kraus_from_superop,
    maximal_cycle,
    mixture,
    peripheral_spectrum,
    stinespring,
    validate,
)
from qdbkit.ensembles import ginibre, haar_unitary, random_channel, random_density
from qdbkit.errors import DimensionMismatch, NotIrreducible, NotPSD, NotUnital
from qdbkit.markov import MarkovChain, embed

SX = np.array([[0, 1], [1, 0]], dtype=complex)


def depolarizing(d):
    """Completely depolarizing channel X -> tr(X)/d, Kraus e_i e_j^H / sqrt(d)."""
    K = [np.outer(np.eye(d)[i], np.eye(d)[j]) / np.sqrt(d) for i in range(d) for j in range(d)]
    return QuantumChannel(K)


def closure_dim(kraus, v, tol=1e-9):
    """Dimension of the smallest subspace containing v and invariant under the Kraus operators."""
    basis = np.zeros((len(v), 0), dtype=complex)
    frontier = [v / np.linalg.norm(v)]
    while frontier:
        w = frontier.pop()
        r = w - basis @ (basis.conj().T @ w)
        if np.linalg.norm(r) > tol:
            r = r / np.linalg.norm(r)
            basis = np.column_stack([basis, r])
            frontier.extend(K @ r for K in kraus)
    return basis.shape[1]


def reducible_by_subspace_search(kraus, rng):
    """Common invariant subspace search seeded by eigenvectors of a generic combination.

    A minimal invariant subspace is invariant under every linear combination
    of the Kraus operators and so contains one of its eigenvectors.
    """
    d = kraus[0].shape[0]
    A = sum(c * K for c, K in zip(ginibre(rng, len(kraus), 1)[:, 0], kraus))
    _, vecs = np.linalg.eig(A)
    return any(closure_dim(kraus, v) < d for v in vecs.T)


# ----------------------------------------------------------------------------
# representations


def test_superop_matches_kraus_action(rng):
    ch = random_channel(3, 2, rng)
    X = ginibre(rng, 3, 3)
    assert np.allclose(ch.superop @ X.reshape(-1), ch.apply(X).reshape(-1), atol=1e-13)
    T = ginibre(rng, 3, 3)
    assert np.allclose(ch.dual_superop @ T.reshape(-1), ch.apply_dual(T).reshape(-1), atol=1e-13)


def test_hilbert_schmidt_duality(rng):
    ch = random_channel(4, 3, rng)
    X, T = ginibre(rng, 4, 4), ginibre(rng, 4, 4)
    lhs = np.trace(T.conj().T @ ch.apply(X))
    rhs = np.trace(ch.apply_dual(T).conj().T @ X)
    assert abs(lhs - rhs) < 1e-12
    rho = random_density(4, rng)
    assert abs(np.trace(ch.apply_dual(rho)) - 1) < 1e-12


def test_unital_and_call(rng):
    ch = random_channel(3, 3, rng)
    assert np.allclose(ch(np.eye(3)), np.eye(3), atol=1e-12)
    with pytest.raises(DimensionMismatch):
        ch.apply(np.eye(2))


def test_validate_examples():
    ident = QuantumChannel([np.eye(3)])
    rep = validate(ident)
    assert rep.passed and rep.unital_residual == 0
    flip = QuantumChannel([np.eye(2) / np.sqrt(2), SX / np.sqrt(2)])
    assert validate(flip).passed
    rep = validate(cds.build(cds.preset("fig2a")))
    assert rep.unital_residual <= 1e-12 and rep.min_choi_eigenvalue >= -1e-12


def test_non_unital_rejected():
    with pytest.raises(NotUnital):
        QuantumChannel([np.diag([1.0, 0.5])])


def test_choi_and_kraus_round_trip(rng):
    ch = random_channel(3, 2, rng)
    C = choi_from_superop(ch.superop)
    assert np.allclose(C, C.conj().T, atol=1e-13)
    assert linalg.herm_eig(C).eigenvalues[0] > -1e-12
    K = kraus_from_superop(ch.superop)
    assert len(K) == 2
    assert np.allclose(CPMap(K).superop, ch.superop, atol=1e-12)


def test_compose_and_mixture(rng):
    a, b = random_channel(2, 2, rng), random_channel(2, 2, rng)
    X = ginibre(rng, 2, 2)
    # other acts first in the Schroedinger picture: (a o b)(X) = b(a(X)) in Heisenberg form
    comp = a.compose(b)
    assert np.allclose(comp.superop, a.superop @ b.superop, atol=1e-12) or np.allclose(
        comp.superop, b.superop @ a.superop, atol=1e-12
    )
    m = mixture([a, b], [0.25, 0.75])
    assert np.allclose(m(X), 0.25 * a(X) + 0.75 * b(X), atol=1e-12)


# ----------------------------------------------------------------------------
# states


def test_density_matrix_validation():
    assert DensityMatrix(np.eye(2) / 2).is_faithful()
    assert not DensityMatrix(np.diag([1.0, 0.0])).is_faithful()
    with pytest.raises(NotPSD):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(NotPSD):
        DensityMatrix(np.eye(2))


@pytest.mark.parametrize("name", ["fig2a", "fig2b", "fig4a", "fig4b"])
def test_invariant_state_of_family_is_maximally_mixed(name):
    ch = cds.build(cds.preset(name))
    inv = invariant_state(ch)
    assert inv.unique
    assert np.allclose(inv.rho, np.eye(ch.dim) / ch.dim, atol=1e-12)


def test_invariant_state_depolarizing():
    assert np.allclose(invariant_state(depolarizing(3)).rho, np.eye(3) / 3, atol=1e-13)


def test_invariant_state_of_markov_embedding(rng):
    P = rng.dirichlet(np.ones(3), size=3)
    chain = MarkovChain(P)
    instr, _ = embed(chain)
    rho = invariant_state(instr.total()).rho
    # oracle: solve pi P = pi, sum pi = 1 as a least-squares linear system
    A = np.vstack([P.T - np.eye(3), np.ones(3)])
    pi = np.linalg.lstsq(A, np.r_[np.zeros(3), 1.0], rcond=None)[0]
    assert np.allclose(rho, np.diag(pi), atol=1e-12)


def test_invariant_state_non_unique_is_cesaro_average():
    ch = QuantumChannel([np.eye(3)])
    inv = invariant_state(ch)
    assert not inv.unique and inv.fixed_dim == 9
    assert np.allclose(inv.rho, np.eye(3) / 3)
    # orbit average of the maximally mixed state under a block-diagonal channel
    # a rotation on one block and the identity on the other
    U = haar_unitary(2, np.random.default_rng(1))
    blk = QuantumChannel([np.block([[U, np.zeros((2, 2))], [np.zeros((2, 2)), np.eye(2)]])])
    inv = invariant_state(blk)
    avg = sum(np.linalg.matrix_power(blk.dual_superop, n) @ (np.eye(4).reshape(-1) / 4) for n in range(4000)) / 4000
    assert not inv.unique
    assert np.allclose(inv.rho, avg.reshape(4, 4), atol=1e-3)
    assert np.allclose(blk.apply_dual(inv.rho), inv.rho, atol=1e-10)


# ----------------------------------------------------------------------------
# KMS geometry


def test_kms_inner_examples(rng):
    rho = random_density(3, rng)
    Y = ginibre(rng, 3, 3)
    assert abs(kms_inner(rho, np.eye(3), Y) - np.trace(rho @ Y)) < 1e-12
    X = ginibre(rng, 3, 3)
    assert abs(kms_inner(np.eye(3) / 3, X, Y) - np.trace(X.conj().T @ Y) / 3) < 1e-12
    A, B = X @ X.conj().T, Y @ Y.conj().T
    assert kms_inner(rho, A, B).real <= linalg.operator_norm(A) * kms_inner(rho, np.eye(3), B).real + 1e-12


def test_kms_adjoint_duality_and_closed_form(rng):
    for _ in range(10):
        d, k = rng.integers(2, 5), rng.integers(1, 4)
        ch = random_channel(d, k, rng)
        rho = invariant_state(ch).rho
        adj = kms_adjoint(ch, rho)
        assert np.allclose(adj.superop, kms_adjoint_superop(ch.superop, rho), atol=1e-10)
        X, Y = ginibre(rng, d, d), ginibre(rng, d, d)
        lhs = kms_inner(rho, X, ch(Y))
        rhs = kms_inner(rho, adj(X), Y)
        assert abs(lhs - rhs) < 1e-11
        assert adj.unital_residual() < 1e-10
        assert np.allclose(adj.apply_dual(rho), rho, atol=1e-10)
        assert np.allclose(kms_adjoint(adj, rho).superop, ch.superop, atol=1e-10)


def test_kms_adjoint_at_trace_state_is_dual():
    ch = cds.build(cds.preset("fig2a"))
    adj = kms_adjoint(ch, np.eye(5) / 5)
    assert np.allclose(adj.superop, ch.dual_superop, atol=1e-13)


def test_kms_adjoint_warns_for_non_invariant_state(rng):
    ch = random_channel(3, 2, rng)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        kms_adjoint(ch, random_density(3, rng))
    assert any("not unital" in str(w.message) for w in caught)


# ----------------------------------------------------------------------------
# irreducibility and cycles


def test_irreducibility_examples(rng):
    assert not is_irreducible(QuantumChannel([np.eye(2)]))
    a, b = random_channel(2, 2, rng), random_channel(2, 2, rng)
    blocks = [np.block([[Ka, np.zeros((2, 2))], [np.zeros((2, 2)), Kb]]) for Ka, Kb in zip(a.kraus, b.kraus)]
    assert not is_irreducible(QuantumChannel(blocks))
    for _ in range(5):
        x = rng.uniform(0.05, 0.95, size=2)
        assert is_irreducible(cds.build(cds.preset("fig2a", x=x)))


def test_irreducibility_agrees_with_subspace_search(rng):
    corpus = []
    for _ in range(20):
        d, k = int(rng.integers(2, 5)), int(rng.integers(1, 4))
        corpus.append(random_channel(d, k, rng))
    for _ in range(10):
        d1 = int(rng.integers(1, 3))
        a, b = random_channel(d1, 2, rng), random_channel(2, 2, rng)
        d = d1 + 2
        blocks = []
        for Ka, Kb in zip(a.kraus, b.kraus):
            M = np.zeros((d, d), dtype=complex)
            M[:d1, :d1], M[d1:, d1:] = Ka, Kb
            blocks.append(M)
        corpus.append(QuantumChannel(blocks))
    for ch in corpus:
        K = list(ch.kraus)
        assert is_irreducible(ch) == (not reducible_by_subspace_search(K, rng))


def test_spectral_radius_one(rng):
    for _ in range(5):
        ch = random_channel(int(rng.integers(2, 5)), 2, rng)
        assert abs(linalg.spectral_radius(ch.superop) - 1) < 1e-8


def test_maximal_cycle_depolarizing():
    cyc = maximal_cycle(depolarizing(3))
    assert cyc.period == 1
    assert np.allclose(cyc.projections[0], np.eye(3), atol=1e-10)


def test_maximal_cycle_of_family():
    ch = cds.build(cds.preset("fig2a"))
    cyc = maximal_cycle(ch)
    assert cyc.period == 5
    xi = np.exp(2j * np.pi / 5)
    for a in range(5):
        assert np.allclose(cyc.projections[a], np.diag(np.eye(5)[a]), atol=1e-9)
    assert np.allclose(ch(cyc.unitary), xi * cyc.unitary, atol=1e-10)
    for a in range(5):
        assert np.allclose(ch(cyc.projections[a]), cyc.projections[(a - 1) % 5], atol=1e-9)


def test_maximal_cycle_two_cycle_chain():
    instr, _ = embed(MarkovChain(np.array([[0.0, 1.0], [1.0, 0.0]])))
    cyc = maximal_cycle(instr.total())
    assert cyc.period == 2
    assert np.allclose(np.sort_complex(peripheral_spectrum(instr.total())), [-1, 1], atol=1e-9)


def test_maximal_cycle_requires_irreducible():
    with pytest.raises(NotIrreducible):
        maximal_cycle(QuantumChannel([np.eye(2)]))


def test_cycle_properties_random_x(rng):
    params = cds.preset("fig4a", x=rng.uniform(0.1, 0.9, size=3))
    ch = cds.build(params)
    cyc = maximal_cycle(ch)
    rho = invariant_state(ch).rho
    P = cyc.projections
    assert np.allclose(sum(P), np.eye(6), atol=1e-9)
    assert np.allclose(sum(p @ rho @ p for p in P), rho, atol=1e-9)
    xi = np.exp(2j * np.pi / cyc.period)
    X = ginibre(rng, 6, 6)
    for n in (1, 2):
        Un = np.linalg.matrix_power(cyc.unitary, n)
        assert np.allclose(ch(Un @ X), xi**n * Un @ ch(X), atol=1e-9)


# ----------------------------------------------------------------------------
# dilations


def test_stinespring_examples(rng):
    U = haar_unitary(3, rng)
    dil = stinespring(QuantumChannel([U]))
    assert dil.dim_e == 1 and np.allclose(dil.V, U, atol=1e-14)
    assert stinespring(cds.build(cds.preset("fig2a"))).dim_e == 2
    ch = random_channel(3, 3, rng)
    dil = stinespring(ch)
    assert dil.isometry_residual() <= 1e-12
    X = ginibre(rng, 3, 3)
    lifted = np.kron(X, np.eye(3))
    assert np.allclose(dil.V.conj().T @ lifted @ dil.V, ch(X), atol=1e-12)


def test_sandwich_with_environment_operator(rng):
    ch = random_channel(2, 3, rng)
    dil = stinespring(ch)
    X, O = ginibre(rng, 2, 2), ginibre(rng, 3, 3)
    assert np.allclose(dil.sandwich(X, O), dil.V.conj().T @ np.kron(X, O) @ dil.V, atol=1e-12)
    assert np.allclose(dil.sandwich(X, np.eye(3)), ch(X), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_random_channel_invariants(d, k, seed):
    rng = np.random.default_rng(seed)
    ch = random_channel(d, k, rng)
    rep = validate(ch)
    assert rep.passed
    rho = invariant_state(ch).rho
    assert np.allclose(ch.apply_dual(rho), rho, atol=1e-9)
    assert abs(np.trace(rho) - 1) < 1e-12
