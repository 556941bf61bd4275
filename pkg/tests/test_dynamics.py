import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gdmkit.dynamics import (
    NucleiState,
    Schedule,
    adiabatic_blocks_evolve,
    eigen_tag,
    eigenprojection,
    fidelity_report,
    nonadiabatic_coupling,
    nuclear_forces,
    propagate_coupled,
    propagate_gdm,
    sudden_density,
)
from gdmkit.errors import BasisTagError, DegeneracyError, DomainError, StructureError
from gdmkit.gdm import change_basis, check_nrep, gdm_from_ci, slater_gdm
from gdmkit.model import geminal_parts

from conftest import random_civector


# -- schedules -----------------------------------------------------------------


def test_constant_schedule():
    s = Schedule.constant(0.1, 0.5, 0.01, 1.0)
    assert s.n_steps == 100
    assert s.eps(0.3) == 0.1 and s.lam(7.0) == 0.5


def test_sudden_schedule():
    s = Schedule.sudden(2.0, 0.05, 0.1, 5.0)
    assert s.lam(1.999) == 0.0 and s.lam(2.0) == 1.0
    assert s.eps(0.0) == 0.05


@settings(max_examples=50)
@given(st.floats(0.0, 5.0), st.floats(0.1, 10.0), st.sampled_from(["linear", "smooth", "ease_out"]))
def test_ramp_is_monotone_and_bounded(T1, width, shape):
    T2 = T1 + width
    s = Schedule.ramp(T1, T2, 0.2, 0.1, T2, shape=shape)
    t = np.linspace(0.0, T2 + 1.0, 200)
    lam = np.array([s.lam(x) for x in t])
    eps = np.array([s.eps(x) for x in t])
    assert lam[0] == 0.0 and s.lam(T2) == 1.0
    assert np.all(np.diff(lam) >= -1e-15)
    assert np.all((eps >= 0) & (eps <= 0.2 + 1e-15))
    assert s.eps(T1) == pytest.approx(0.2)


def test_ramp_with_removal():
    s = Schedule.ramp(1.0, 3.0, 0.2, 0.1, 6.0, T3=5.0)
    assert s.eps(3.0) == pytest.approx(0.2)
    assert s.eps(5.0) == pytest.approx(0.0)
    assert s.lam(6.0) == 1.0


@pytest.mark.parametrize(
    "kwargs",
    [
        {"T1": 2.0, "T2": 1.0},
        {"T1": 0.0, "T2": 1.0, "T3": 0.5},
        {"T1": 0.0, "T2": 1.0, "shape": "cubic"},
    ],
)
def test_ramp_rejects(kwargs):
    with pytest.raises(DomainError):
        Schedule.ramp(eps=0.1, dt=0.1, t_final=1.0, **kwargs)


@pytest.mark.parametrize("dt, t_final", [(0.0, 1.0), (-0.1, 1.0), (0.1, -1.0)])
def test_schedule_rejects_bad_times(dt, t_final):
    with pytest.raises(DomainError):
        Schedule.constant(0.0, 0.0, dt, t_final)


@pytest.mark.parametrize(
    "job, kind",
    [
        ({"type": "ramp", "T1": 1, "T2": 3, "dt": 0.1, "t_final": 4}, "ramp"),
        ({"type": "sudden", "T": 1, "dt": 0.1, "t_final": 4}, "sudden"),
        ({"type": "coupled", "dt": 0.1, "t_final": 4}, "constant"),
    ],
)
def test_schedule_from_job(job, kind):
    s = Schedule.from_job(job, eps=0.05)
    assert s.kind == kind
    assert s.n_steps == 40


@pytest.mark.parametrize("job", [{"type": "ramp", "dt": 0.1, "t_final": 1}, {"type": "warp", "dt": 0.1, "t_final": 1}])
def test_schedule_from_job_rejects(job):
    with pytest.raises(DomainError):
        Schedule.from_job(job)


# -- propagation ---------------------------------------------------------------


def test_eigenprojection_is_stationary(model):
    eps = 0.05
    D0 = eigenprojection(model, 3, eps, (1, 2, 4))
    traj = propagate_gdm(D0, model, 3, Schedule.constant(eps, 0.0, 0.5, 50.0), stride=10)
    assert np.abs(traj.final.matrix - D0.matrix).max() < 1e-11
    assert np.ptp(traj.energies) < 1e-11


def test_eigenprojection_is_a_valid_pure_state(model):
    D = eigenprojection(model, 3, 0.05, (1, 2, 3))
    assert np.allclose(D.matrix @ D.matrix, D.matrix, atol=1e-12)
    assert D.trace() == pytest.approx(3.0)
    assert check_nrep(D, oracle=True).passed


def test_eigenprojection_rejects_wrong_count(model):
    with pytest.raises(DomainError):
        eigenprojection(model, 3, 0.05, (1, 2))


def test_invariants_conserved_under_ramp(model):
    D0 = gdm_from_ci(random_civector(model.K, 3, seed=2))
    traj = propagate_gdm(D0, model, 3, Schedule.ramp(2.0, 8.0, 0.1, 0.05, 10.0), stride=20)
    assert np.allclose(traj.traces, 3.0, atol=1e-12)
    assert np.allclose(traj.trace_sq, D0.trace_sq(), atol=1e-11)
    assert traj.hermiticity.max() < 1e-12
    assert np.allclose(traj.densities.sum(axis=1), 3.0, atol=1e-12)
    header, table = traj.columns()
    assert header[0] == "t" and table.shape == (len(traj.times), len(header))


def test_constant_hamiltonian_conserves_energy(model):
    D0 = gdm_from_ci(random_civector(model.K, 3, seed=5))
    traj = propagate_gdm(D0, model, 3, Schedule.constant(0.05, 1.0, 0.05, 20.0), stride=40)
    assert np.ptp(traj.energies) < 1e-11


def test_propagation_rejects_tagged_or_invalid_gdm(model):
    D0 = eigenprojection(model, 3, 0.05, (1, 2, 3))
    sched = Schedule.constant(0.0, 0.0, 0.1, 1.0)
    with pytest.raises(BasisTagError):
        propagate_gdm(D0.with_matrix(D0.matrix, "eigen(eps=0,lam=0)"), model, 3, sched)
    with pytest.raises(DomainError):
        propagate_gdm(D0.with_matrix(2 * D0.matrix), model, 3, sched)
    with pytest.raises(DomainError):
        propagate_gdm(D0, model, 4, sched)


def test_non_interacting_drive_matches_fci(model):
    """With lam = 0 the pair dynamics is exact, so densities agree with the oracle."""
    sched = Schedule(lambda t: 0.3 * np.sin(0.7 * t), lambda t: 0.0, 0.05, 10.0)
    report = fidelity_report(model, 3, sched, stride=20)
    assert report["max_density_deviation"] < 1e-8
    assert report["max_energy_deviation"] < 1e-8
    assert report["n_samples"] == 11


# -- nonadiabatic coupling -----------------------------------------------------


def _analytic_coupling(model, N, eps, lam):
    parts = geminal_parts(model, N)
    E, V = np.linalg.eigh(parts.at(eps, lam))
    A = V.conj().T @ parts.interaction @ V
    gap = E[None, :] - E[:, None]
    np.fill_diagonal(gap, 1.0)
    M = A / gap
    np.fill_diagonal(M, 0.0)
    return M


def test_coupling_matches_perturbation_theory(crossing_model):
    eps, lam = 0.05, 0.3
    exact = _analytic_coupling(crossing_model, 3, eps, lam)
    errors = []
    for dlam in (1e-3, 5e-4):
        out = nonadiabatic_coupling(crossing_model, 3, eps, lam, dlam)
        M = out["M"]
        assert np.linalg.norm(M + M.conj().T) < 1e-12
        errors.append(np.linalg.norm(M - exact))
    assert errors[1] < 1e-4 * np.linalg.norm(exact)
    assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.1)


def test_coupling_scales_with_lambda_dot(crossing_model):
    a = nonadiabatic_coupling(crossing_model, 3, 0.05, 0.3, 1e-3)["M"]
    b = nonadiabatic_coupling(crossing_model, 3, 0.05, 0.3, 1e-3, lambda_dot=2.5)["M"]
    assert np.allclose(b, 2.5 * a)


def test_coupling_vanishes_without_interaction(free_chain):
    out = nonadiabatic_coupling(free_chain, 2, 0.1, 0.5, 1e-3)
    assert np.abs(out["M"]).max() < 1e-10


def test_coupling_rejects_degenerate_spectrum(crossing_model):
    with pytest.raises(DegeneracyError):
        nonadiabatic_coupling(crossing_model, 3, 0.0, 0.3, 1e-3)


def test_coupling_rejects_bad_step(crossing_model):
    with pytest.raises(DomainError):
        nonadiabatic_coupling(crossing_model, 3, 0.05, 0.3, 0.0)


# -- degenerate blocks ---------------------------------------------------------


def test_one_dimensional_blocks_do_not_move():
    D0 = np.diag([0.3, 0.5, 0.2]).astype(complex)
    out = adiabatic_blocks_evolve(D0, [[0], [1], [2]], lambda t: [np.zeros((1, 1))] * 3, np.linspace(0, 5, 11))
    assert np.array_equal(out, D0)


@pytest.mark.parametrize("w", [0.3, 1.0, -2.0])
def test_two_by_two_block_rotates(w):
    """Constant M = w [[0, -1], [1, 0]] rotates D by the angle w t."""
    D0 = np.zeros((3, 3), dtype=complex)
    D0[0, 0] = 1.0
    D0[2, 2] = 0.5
    M = w * np.array([[0.0, -1.0], [1.0, 0.0]])
    t = np.linspace(0.0, 2.0, 41)
    out = adiabatic_blocks_evolve(D0, [[0, 1], [2]], lambda s: [M, np.zeros((1, 1))], t)
    c, s = np.cos(w * 2.0), np.sin(w * 2.0)
    R = np.array([[c, s], [-s, c]])
    expected = R @ np.diag([1.0, 0.0]) @ R.T
    assert np.allclose(out[:2, :2], expected, atol=1e-12)
    assert out[2, 2] == 0.5
    assert np.trace(out).real == pytest.approx(1.5)


@pytest.mark.parametrize(
    "blocks, D0, n_coupling",
    [
        ([[0, 1], [1, 2]], np.eye(3), 2),
        ([[0, 1]], np.eye(3), 1),
        ([[0], [1, 2]], np.ones((3, 3)), 2),
        ([[0], [1, 2]], np.eye(3), 1),
    ],
)
def test_block_structure_errors(blocks, D0, n_coupling):
    with pytest.raises(StructureError):
        adiabatic_blocks_evolve(D0, blocks, lambda t: [np.zeros((len(b), len(b))) for b in blocks][:n_coupling], [0.0, 1.0])


def test_block_shape_mismatch():
    with pytest.raises(StructureError):
        adiabatic_blocks_evolve(np.eye(3), [[0], [1, 2]], lambda t: [np.zeros((1, 1)), np.zeros((3, 3))], [0.0, 1.0])


# -- coupled electron-nuclear dynamics -----------------------------------------


def test_frozen_nuclei_reproduce_fixed_propagation(model):
    D0 = eigenprojection(model, 3, 0.0, (1, 2, 3))
    nuclei = NucleiState.from_model(model)
    frozen = NucleiState(nuclei.positions, nuclei.velocities, nuclei.masses, np.zeros_like(nuclei.mobile))
    coupled = propagate_coupled(D0, frozen, model, 3, 0.1, 100, stride=25, require_mobile=False)
    fixed = propagate_gdm(D0, model, 3, Schedule.constant(0.0, 1.0, 0.1, 10.0), stride=25)
    assert np.abs(coupled.final.matrix - fixed.final.matrix).max() < 1e-13
    assert np.allclose(coupled.energies, fixed.energies, atol=1e-12)
    assert np.all(coupled.extra["R_1"] == nuclei.positions[0])


def test_coupled_requires_mobile_nucleus(model):
    D0 = eigenprojection(model, 3, 0.0, (1, 2, 3))
    nuclei = NucleiState.from_model(model)
    frozen = NucleiState(nuclei.positions, nuclei.velocities, nuclei.masses, np.zeros_like(nuclei.mobile))
    with pytest.raises(DomainError):
        propagate_coupled(D0, frozen, model, 3, 0.1, 10)


def test_mobile_nuclei_need_mass():
    with pytest.raises(DomainError):
        NucleiState([0.0], [0.0], [0.0], [True])


@pytest.mark.parametrize("seed", range(4))
def test_force_routes_agree(model, seed):
    D = gdm_from_ci(random_civector(model.K, 3, seed)).matrix
    R = model.nuclear_positions + np.random.default_rng(seed).uniform(-0.4, 0.4, size=2)
    a, b = nuclear_forces(D, model, 3, R)
    assert np.allclose(a, b, atol=1e-10)


def test_force_is_energy_gradient(model):
    D = gdm_from_ci(random_civector(model.K, 3, seed=3))
    R = model.nuclear_positions.copy()
    force, _ = nuclear_forces(D.matrix, model, 3, R)
    h = 1e-5
    for k in range(len(R)):
        dR = np.zeros_like(R)
        dR[k] = h

        def energy(pos):
            H = geminal_parts(model, 3, positions=pos).at(0.0, 1.0)
            return float(np.sum(D.matrix * H.T).real) + model.nuclear_repulsion(pos)

        assert force[k] == pytest.approx(-(energy(R + dR) - energy(R - dR)) / (2 * h), abs=1e-8)


def test_coupled_energy_ledger(model):
    D0 = eigenprojection(model, 3, 0.0, (1, 2, 3))
    traj = propagate_coupled(D0, NucleiState.from_model(model), model, 3, 0.1, 200, stride=50)
    e = traj.extra
    assert np.allclose(e["e_total"], e["e_electronic"] + e["e_kinetic"] + e["e_nuclear"])
    assert np.ptp(e["e_total"]) < 1e-6
    assert traj.summary["max_force_residual"] < 1e-10
    assert np.allclose(traj.traces, 3.0, atol=1e-12)


# -- sudden switch-on ----------------------------------------------------------


def test_sudden_density_conserves_electrons(model):
    D = eigenprojection(model, 3, 0.05, (1, 2, 3))
    out = sudden_density(D, model, 3, np.linspace(0, 100, 201), 0.05)
    assert np.allclose(out.density.sum(axis=1), 3.0, atol=1e-11)
    assert out.mean.sum() == pytest.approx(3.0, abs=1e-11)
    assert np.allclose(out.variance_coherent, 2 * out.variance)
    assert out.gdm.basis_tag == eigen_tag(0.05, 1.0)


def test_sudden_density_matches_propagation(model):
    D = eigenprojection(model, 3, 0.05, (1, 2, 3))
    out = sudden_density(D, model, 3, [0.0, 2.0, 5.0], 0.05)
    traj = propagate_gdm(D, model, 3, Schedule.constant(0.05, 1.0, 0.5, 5.0), stride=1)
    assert np.allclose(out.density[0], traj.densities[0], atol=1e-12)
    assert np.allclose(out.density[1], traj.densities[4], atol=1e-10)
    assert np.allclose(out.density[2], traj.densities[10], atol=1e-10)


def test_sudden_density_accepts_eigenbasis(model):
    eps = 0.05
    D = eigenprojection(model, 3, eps, (1, 2, 3))
    _, V0 = np.linalg.eigh(geminal_parts(model, 3).at(eps, 0.0))
    tagged = change_basis(D, V0.conj().T, eigen_tag(eps, 0.0))
    a = sudden_density(D, model, 3, [0.0, 3.0], eps)
    b = sudden_density(tagged, model, 3, [0.0, 3.0], eps)
    assert np.allclose(a.density, b.density, atol=1e-12)


def test_sudden_density_rejects_foreign_tag(model):
    D = slater_gdm((1, 2, 3), model.K).with_matrix(np.eye(66), eigen_tag(0.05, 1.0))
    with pytest.raises(BasisTagError):
        sudden_density(D, model, 3, [0.0], 0.05)
