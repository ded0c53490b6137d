import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qdbkit import cds
from qdbkit.channel import QuantumChannel, invariant_state, kms_adjoint_superop, maximal_cycle, mixture, validate
from qdbkit.ensembles import ginibre, haar_unitary, random_channel, random_density
from qdbkit.errors import NotAdmissible, NotUnitary
from qdbkit.symmetry import (
    JFamily,
    SymmetryOp,
    covariance_check,
    extend_admissible,
    is_admissible,
    qdb_check,
    reversal,
    reversal_superop,
    search_qdb,
)


@pytest.mark.parametrize("anti", [False, True])
def test_morphism_is_star_homomorphism(anti, rng):
    J = SymmetryOp(haar_unitary(3, rng), anti)
    X, Y = ginibre(rng, 3, 3), ginibre(rng, 3, 3)
    assert np.allclose(J.morphism(X @ Y), J.morphism(X) @ J.morphism(Y), atol=1e-12)
    assert np.allclose(J.morphism(X.conj().T), J.morphism(X).conj().T, atol=1e-12)
    assert np.allclose(J.inverse_morphism(J.morphism(X)), X, atol=1e-12)
    # j(X) = J X J^(-1) evaluated on vectors
    v = ginibre(rng, 3, 1)[:, 0]
    Jinv_v = np.conj(J.U.conj().T @ v) if anti else J.U.conj().T @ v
    assert np.allclose(J.morphism(X) @ v, J.apply(X @ Jinv_v), atol=1e-12)


@pytest.mark.parametrize("anti", [False, True])
def test_square_and_sharp(anti, rng):
    J = SymmetryOp(haar_unitary(3, rng), anti)
    v = ginibre(rng, 3, 1)[:, 0]
    assert np.allclose(J.square() @ v, J.apply(J.apply(v)), atol=1e-12)
    assert J.sharp(1j) == (-1j if anti else 1j)


def test_superop_conjugation_matches_definition(rng):
    ch = random_channel(3, 2, rng)
    for anti in (False, True):
        J = SymmetryOp(haar_unitary(3, rng), anti)
        S = J.conjugate_superop(ch.superop)
        X = ginibre(rng, 3, 3)
        direct = J.inverse_morphism(ch(J.morphism(X)))
        assert np.allclose((S @ X.reshape(-1)).reshape(3, 3), direct, atol=1e-12)


def test_non_unitary_rejected():
    with pytest.raises(NotUnitary):
        SymmetryOp(np.diag([1.0, 2.0]))


def test_identity_is_admissible(rng):
    ch = random_channel(3, 2, rng)
    rho = invariant_state(ch).rho
    adm = is_admissible(ch, rho, SymmetryOp(np.eye(3)))
    assert adm.admissible and abs(adm.eta - 1) < 1e-12


def test_conjugation_in_eigenbasis_of_state_is_admissible(rng):
    ch = random_channel(3, 2, rng)
    rho = invariant_state(ch).rho
    w, V = np.linalg.eigh(rho)
    # J x = V conj(V^H x): complex conjugation in the eigenbasis of rho
    J = SymmetryOp(V @ V.T, True)
    adm = is_admissible(ch, rho, J)
    assert adm.admissible and abs(adm.eta - 1) < 1e-10
    # j(rho) = rho  <=>  U rho^T U^H = rho
    assert np.allclose(J.U @ rho.T @ J.U.conj().T, rho, atol=1e-12)


def test_family_admissibility_eta_in_roots_of_unity():
    for name in ("fig2a", "fig2b", "fig4a", "fig4b"):
        params = cds.preset(name)
        ch = cds.build(params)
        adm = is_admissible(ch, np.eye(params.d) / params.d, cds.symmetry(params))
        assert adm.admissible
        assert abs(adm.eta ** params.d - 1) < 1e-10


def test_reversal_properties(rng):
    ch = random_channel(3, 2, rng)
    rho = invariant_state(ch).rho
    rev = reversal(ch, rho, SymmetryOp(np.eye(3)))
    assert rev.unital_residual() < 1e-10
    assert np.allclose(rev.apply_dual(rho), rho, atol=1e-10)
    assert validate(rev).min_choi_eigenvalue > -1e-10


def test_reversal_at_trace_state_is_dual(rng):
    U = haar_unitary(3, rng)
    ch = QuantumChannel([U])
    S = reversal_superop(ch, np.eye(3) / 3, SymmetryOp(np.eye(3)))
    assert np.allclose(S, ch.superop.conj().T, atol=1e-12)


def test_unitary_conjugation_fails_qdb_with_identity(rng):
    ch = QuantumChannel([haar_unitary(3, rng)])
    res = qdb_check(ch, np.eye(3) / 3, SymmetryOp(np.eye(3)))
    assert not res.holds and res.residual > 0.1


def test_qdb_requires_admissible(rng):
    ch = random_channel(3, 2, rng)
    rho = invariant_state(ch).rho
    with pytest.raises(NotAdmissible):
        qdb_check(ch, rho, SymmetryOp(haar_unitary(3, rng)))


def test_qdb_family_examples(rng):
    for _ in range(3):
        params = cds.CdsParams(5, 1, rng.uniform(0.05, 0.95, 2), (1,) * 5, True)
        res = qdb_check(cds.build(params), np.eye(5) / 5, cds.symmetry(params))
        assert res.holds and abs(res.eta - 1) < 1e-10
    params = cds.preset("fig2b")
    res = qdb_check(cds.build(params), np.eye(6) / 6, cds.symmetry(params))
    assert res.holds and abs(res.eta + 1) < 1e-10


def test_qdb_invariant_under_global_phase_of_unitary_j():
    params = cds.preset("fig4b")
    ch = cds.build(params)
    J = cds.symmetry(params)
    a = qdb_check(ch, np.eye(6) / 6, J)
    b = qdb_check(ch, np.eye(6) / 6, SymmetryOp(np.exp(0.7j) * J.U, False))
    assert a.holds and b.holds and abs(a.residual - b.residual) < 1e-12


def test_reversal_is_affine(rng):
    # two channels sharing the trace state
    a = QuantumChannel([haar_unitary(3, rng)])
    b = QuantumChannel([haar_unitary(3, rng)])
    rho = np.eye(3) / 3
    J = SymmetryOp(haar_unitary(3, rng), True)
    m = mixture([a, b], [0.3, 0.7])
    lhs = reversal_superop(m, rho, J)
    rhs = 0.3 * reversal_superop(a, rho, J) + 0.7 * reversal_superop(b, rho, J)
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_extend_admissible_odd_period():
    params = cds.CdsParams(5, 1, (0.3, 0.7), (1,) * 5, True)
    ch = cds.build(params)
    rho = np.eye(5) / 5
    J = cds.symmetry(params)
    pairs = extend_admissible(ch, rho, J)
    assert len(pairs) == 5
    assert np.allclose(pairs[0][0].U, J.U)
    xi = np.exp(2j * np.pi / 5)
    etas = sorted(np.angle(e) for _, e in pairs)
    assert np.allclose(etas, sorted(np.angle([xi**k for k in range(5)])), atol=1e-9)
    for Jn, eta in pairs:
        res = qdb_check(ch, rho, Jn)
        assert res.holds and abs(res.eta - eta) < 1e-9


def test_covariance_examples(rng):
    ch = cds.build(cds.preset("fig2a"))
    assert covariance_check(ch, SymmetryOp(np.eye(5))) == 0.0
    U = maximal_cycle(ch).unitary
    assert covariance_check(ch, SymmetryOp(U)) < 1e-10
    other = random_channel(3, 2, rng)
    assert covariance_check(other, SymmetryOp(haar_unitary(3, rng))) > 1e-3


# ----------------------------------------------------------------------------
# structured search


def brute_force_search(ch, rho, kinds, N, perms):
    """Direct scan of every candidate with the definitions, no congruence pruning."""
    d = ch.dim
    S = ch.superop
    Srho = kms_adjoint_superop(S, rho)
    hits = []
    for kind in kinds:
        anti = kind == "antiunitary"
        for perm in perms:
            Pi = np.zeros((d, d))
            Pi[list(perm), range(d)] = 1.0
            for ks in itertools.product(range(N), repeat=d - 1):
                z = np.exp(2j * np.pi * np.array((0,) + ks) / N)
                J = SymmetryOp(Pi * z[None, :], anti)
                if not np.allclose(J.morphism(rho), rho, atol=1e-9):
                    continue
                J2 = J.square()
                img = ch(J2)
                eta = np.vdot(J2, img) / np.vdot(J2, J2)
                if np.abs(img - eta * J2).max() > 1e-9:
                    continue
                if np.linalg.norm(J.conjugate_superop(Srho) - S) <= 1e-9:
                    hits.append((kind, tuple(perm), (0,) + ks))
    return sorted(hits)


def _signature(result, d, N):
    out = []
    for J, _ in result.found:
        perm = tuple(int(np.argmax(np.abs(J.U[:, a]))) for a in range(d))
        z = np.array([J.U[perm[a], a] for a in range(d)])
        if J.antiunitary:
            z = np.conj(z)  # U = conj(W) stores conjugated phases for anti-unitary J
        z = z / z[0]
        ks = tuple(int(np.rint(np.angle(v) * N / (2 * np.pi))) % N for v in z)
        out.append(("antiunitary" if J.antiunitary else "unitary", perm, ks))
    return sorted(out)


@pytest.mark.parametrize("name,N", [("fig2a", 4), ("counterexample", 4)])
def test_search_matches_brute_force(name, N):
    params = cds.preset(name)
    ch = cds.build(params)
    rho = np.eye(params.d) / params.d
    kinds = ("unitary",) if name == "counterexample" else ("unitary", "antiunitary")
    family = JFamily(kinds, N)
    result = search_qdb(ch, rho, family)
    oracle = brute_force_search(ch, rho, kinds, N, family.perms(params.d))
    assert _signature(result, params.d, N) == oracle
    assert len(oracle) > 0


def test_search_finds_constructed_symmetry():
    params = cds.CdsParams(5, 1, (0.3, 0.7), (1,) * 5, True)
    ch = cds.build(params)
    result = search_qdb(ch, np.eye(5) / 5, JFamily(("antiunitary",), 24))
    J = cds.symmetry(params)
    assert any(
        Jf.antiunitary and abs(abs(np.vdot(Jf.U, J.U)) - 5) < 1e-9 for Jf, _ in result.found
    )


def test_search_counterexample_eta():
    ch = cds.build(cds.counterexample_params())
    result = search_qdb(ch, np.eye(6) / 6, JFamily(("unitary",), 24))
    etas = [e for _, e in result.found]
    assert etas and all(abs(e + 1) < 1e-9 for e in etas)
    assert not any(abs(e - 1) < 1e-6 for e in etas)
    assert "restriction" in result.report


def test_search_empty_family():
    ch = cds.build(cds.preset("fig2a"))
    assert search_qdb(ch, np.eye(5) / 5, JFamily((), 24)).found == []


def test_search_threads_deterministic():
    ch = cds.build(cds.preset("fig2a"))
    a = search_qdb(ch, np.eye(5) / 5, JFamily(denominator=12), threads=1)
    b = search_qdb(ch, np.eye(5) / 5, JFamily(denominator=12), threads=4)
    assert a.report == b.report
    assert all(np.array_equal(x.U, y.U) for (x, _), (y, _) in zip(a.found, b.found))


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 4), st.booleans(), st.integers(0, 2**31 - 1))
def test_morphism_preserves_spectrum(d, anti, seed):
    rng = np.random.default_rng(seed)
    J = SymmetryOp(haar_unitary(d, rng), anti)
    rho = random_density(d, rng)
    a = np.sort(np.linalg.eigvalsh(rho))
    b = np.sort(np.linalg.eigvalsh(J.morphism(rho)))
    assert np.allclose(a, b, atol=1e-12)
