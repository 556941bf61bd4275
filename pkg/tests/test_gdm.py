import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gdmkit.basis import enumerate_configurations, pair_index
from gdmkit.errors import BasisTagError, DomainError
from gdmkit.gdm import (
    GDM,
    CIVector,
    change_basis,
    check_nrep,
    density_operators,
    diagonal_gdm,
    expectation,
    gdm_density,
    gdm_from_ci,
    one_rdm,
    pair_compound,
    slater_gdm,
)
from gdmkit.oracle import slater_civector

from conftest import random_civector
from fock import annihilators, fock_state, two_rdm


@pytest.mark.parametrize("K, N", [(4, 2), (5, 3), (6, 3), (6, 4), (7, 3), (8, 4)])
def test_gdm_matches_brute_force(K, N):
    psi = random_civector(K, N, seed=K * 10 + N)
    D = gdm_from_ci(psi)
    assert np.allclose(D.matrix, two_rdm(psi.coefficients, K, N), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_gdm_rules_hold_for_random_states(seed):
    psi = random_civector(7, 3, seed)
    report = check_nrep(gdm_from_ci(psi), oracle=True)
    assert report.passed, report.lines()


@pytest.mark.parametrize("K, N", [(5, 2), (6, 3), (7, 4), (8, 3)])
def test_slater_gdm_is_idempotent(K, N):
    for alpha in enumerate_configurations(K, N):
        D = gdm_from_ci(CIVector.single(alpha, K))
        assert np.allclose(D.matrix @ D.matrix, D.matrix, atol=1e-14)
        assert np.allclose(D.matrix, slater_gdm(alpha, K).matrix, atol=1e-14)


def test_three_electron_configuration_occupies_first_three_pairs():
    D = slater_gdm((1, 2, 3), 6)
    assert np.flatnonzero(np.diag(D.matrix)).tolist() == [0, 1, 2]
    assert D.trace() == 3


def test_disjoint_superposition():
    """Two configurations with no common pair give a diagonal GDM at one half."""
    K = 4
    psi = CIVector.from_configurations({(1, 2): 1 / np.sqrt(2), (3, 4): 1 / np.sqrt(2)}, K)
    D = gdm_from_ci(psi)
    expected = np.zeros((6, 6))
    expected[0, 0] = expected[5, 5] = 0.5
    expected[0, 5] = expected[5, 0] = 0.5
    assert np.allclose(D.matrix, expected)
    assert D.trace() == pytest.approx(1.0)
    assert D.trace_sq() == pytest.approx(1.0)


def test_disjoint_superposition_of_three_electrons():
    K = 6
    psi = CIVector.from_configurations({(1, 2, 3): 1 / np.sqrt(2), (4, 5, 6): 1 / np.sqrt(2)}, K)
    D = gdm_from_ci(psi)
    assert np.allclose(np.diag(D.matrix)[np.diag(D.matrix).real > 0], 0.5)
    assert D.trace_sq() == pytest.approx(1.5)
    assert np.allclose(D.matrix - np.diag(np.diag(D.matrix)), 0.0)


def test_unnormalized_vector_rejected():
    psi = CIVector.from_configurations({(1, 2): 1.0, (1, 3): 1.0}, 3)
    with pytest.raises(DomainError):
        gdm_from_ci(psi)


def test_single_electron_rejected():
    with pytest.raises(DomainError):
        gdm_from_ci(CIVector.single((1,), 3))


def test_slater_gdm_passes_all_rules():
    report = check_nrep(slater_gdm((1, 2, 3), 6), oracle=True)
    assert report.passed
    assert report["generability"].passed is True


def test_unreachable_pair_set_passes_cheap_rules_only():
    """Pairs (1,2), (1,3), (1,4) span four orbitals, so no three-electron state has them."""
    D = diagonal_gdm([1, 2, 4], N=3, K=6)
    assert check_nrep(D).passed
    report = check_nrep(D, oracle=True)
    assert report["generability"].passed is False
    assert report["pauli"].passed is False
    assert not report.passed


def test_exclusion_violation_detected():
    D = np.zeros((6, 6))
    D[0, 0] = 1.0
    D[1, 1] = 0.5
    D[2, 2] = 0.5
    D[3, 3] = 1.0
    D[0, 1] = D[1, 0] = 0.1
    report = check_nrep(GDM(D, 3))
    assert report["exclusion"].passed is False
    assert report["trace"].passed is True


@pytest.mark.parametrize(
    "tweak, rule",
    [
        (lambda M: M.__setitem__((0, 1), 1e-3), "hermitian"),
        (lambda M: M.__setitem__((3, 3), -0.5), "occupation"),
        (lambda M: M.__setitem__((4, 4), 0.5), "trace"),
    ],
)
def test_cheap_rules_detect(tweak, rule):
    M = slater_gdm((1, 2, 3), 5).matrix.copy()
    tweak(M)
    assert check_nrep(GDM(M, 3))[rule].passed is False


def test_report_lines_and_dict():
    report = check_nrep(slater_gdm((1, 2), 3), oracle=True)
    assert report.lines()[-1].split() == ["overall", "pass"]
    assert report.to_dict()["passed"] is True


@pytest.mark.parametrize("N", [2, 3, 4])
def test_identity_expectation_counts_pairs(N):
    psi = random_civector(6, N, seed=N)
    D = gdm_from_ci(psi)
    assert expectation(D, np.eye(D.G)).real == pytest.approx(N * (N - 1) / 2)


def test_expectation_matches_brute_force_pair_operator():
    K, N = 5, 3
    psi = random_civector(K, N, seed=11)
    rng = np.random.default_rng(0)
    G = K * (K - 1) // 2
    A = rng.normal(size=(G, G)) + 1j * rng.normal(size=(G, G))
    a = annihilators(K)
    pairs = [(i, j) for j in range(K) for i in range(j)]
    lowered = [a[m2] @ a[m1] for m1, m2 in pairs]
    # sum_{n,m} A[n, m] a+_n a_m
    op = sum(A[n, m] * lowered[n].T @ lowered[m] for n in range(G) for m in range(G))
    f = fock_state(psi.coefficients, K, N)
    assert expectation(gdm_from_ci(psi), A) == pytest.approx(np.vdot(f, op @ f), abs=1e-12)


def test_expectation_tag_mismatch():
    D = slater_gdm((1, 2), 3)

    class Tagged:
        matrix = np.eye(3)
        basis_tag = "eigen(eps=0.1,lam=0)"

    with pytest.raises(BasisTagError):
        expectation(D, Tagged())
    with pytest.raises(DomainError):
        expectation(D, np.eye(4))


def _random_unitary(n, seed):
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_change_basis_identity_and_round_trip():
    D = gdm_from_ci(random_civector(5, 3, seed=4))
    assert np.allclose(change_basis(D, np.eye(D.G)).matrix, D.matrix)
    U = _random_unitary(D.G, 1)
    there = change_basis(D, U, "rotated")
    back = change_basis(there, U.conj().T, "site")
    assert there.basis_tag == "rotated"
    assert np.allclose(back.matrix, D.matrix, atol=1e-12)
    assert there.trace_sq() == pytest.approx(D.trace_sq(), abs=1e-12)
    assert there.trace() == pytest.approx(D.trace(), abs=1e-12)


def test_change_basis_rejects_non_unitary():
    D = slater_gdm((1, 2), 3)
    with pytest.raises(DomainError):
        change_basis(D, 2 * np.eye(3))
    with pytest.raises(DomainError):
        change_basis(D, np.eye(4))


def test_pair_compound_of_orbital_rotation_matches_brute_force():
    """Rotating the orbitals of a configuration equals rotating its GDM by the compound matrix."""
    K = 5
    C = _random_unitary(K, 7)
    compound = pair_compound(C)
    assert np.allclose(compound @ compound.conj().T, np.eye(compound.shape[0]), atol=1e-12)
    psi = slater_civector(C, (1, 2, 4))
    D = gdm_from_ci(psi)
    rotated = change_basis(D, compound.conj().T, "orbital")
    target = np.zeros(compound.shape[0])
    for pair in [(1, 2), (1, 4), (2, 4)]:
        target[pair_index(pair) - 1] = 1.0
    assert np.allclose(rotated.matrix, np.diag(target), atol=1e-12)


@pytest.mark.parametrize("K, N", [(4, 2), (6, 3), (7, 4)])
def test_density_sums_to_electron_count(K, N):
    D = gdm_from_ci(random_civector(K, N, seed=K + N))
    rho = gdm_density(D)
    assert rho.sum() == pytest.approx(N, abs=1e-12)
    assert np.allclose(density_operators(K, N).sum(axis=0), 2 / (N - 1))


def test_density_matches_one_rdm_diagonal():
    K, N = 6, 3
    psi = random_civector(K, N, seed=3)
    D = gdm_from_ci(psi)
    a = annihilators(K)
    f = fock_state(psi.coefficients, K, N)
    gamma = one_rdm(D)
    for p in range(K):
        for q in range(K):
            assert gamma[p, q] == pytest.approx(np.vdot(f, a[q].T @ a[p] @ f), abs=1e-12)
    assert np.allclose(gdm_density(D), np.diag(gamma).real)


def test_density_requires_site_basis():
    D = slater_gdm((1, 2), 3).with_matrix(np.eye(3), "eigen(eps=0.1,lam=0)")
    with pytest.raises(BasisTagError):
        gdm_density(D)


def test_gdm_rejects_non_square():
    with pytest.raises(DomainError):
        GDM(np.zeros((2, 3)), 2)
