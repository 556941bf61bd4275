"""
GDM time evolution.

The GDM obeys ``dD/dt = -i [H', D]`` with ``H' = (N - 1) H`` where ``H`` is the
effective two-electron Hamiltonian.  Every propagator here advances one step
with the exactly unitary midpoint exponential ``exp(-i H'(t + dt/2) dt)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .basis import as_configuration
from .errors import BasisTagError, DegeneracyError, DomainError, StructureError
from .gdm import GDM, SITE_BASIS, change_basis, check_nrep, density_operators, gdm_from_ci, pair_compound
from .linalg import align_phases, conjugate, degenerate_groups, match_states, skew_step, unitary_step
from .model import LatticeModel, geminal_parts, promote_one_body
from .oracle import fci_propagate, slater_civector

DEGENERACY_TOL = 1e-8

RAMP_SHAPES = {
    "linear": lambda s: s,
    "smooth": lambda s: s * s * (3.0 - 2.0 * s),
    "ease_out": lambda s: 1.0 - (1.0 - s) ** 2,
}


def eigen_tag(eps: float, lam: float) -> str:
    return f"eigen(eps={eps:.12g},lam={lam:.12g})"


def _ramp(t, start, stop, shape):
    if t <= start:
        return 0.0
    if t >= stop:
        return 1.0
    return RAMP_SHAPES[shape]((t - start) / (stop - start))


@dataclass(frozen=True)
class Schedule:
    """Time dependence of ``eps``, ``lam`` and optionally nuclear positions."""

    eps: Callable[[float], float]
    lam: Callable[[float], float]
    dt: float
    t_final: float
    positions: Callable[[float], Sequence[float]] | None = None
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError(f"dt must be positive, got {self.dt}")
        if self.t_final < 0:
            raise DomainError(f"t_final must be non-negative, got {self.t_final}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    @classmethod
    def constant(cls, eps, lam, dt, t_final):
        return cls(lambda t: eps, lambda t: lam, dt, t_final, kind="constant", params={"eps": eps, "lam": lam})

    @classmethod
    def sudden(cls, T, eps, dt, t_final):
        """``lam`` jumps from 0 to 1 at ``T``; ``eps`` fixed."""
        return cls(lambda t: eps, lambda t: 1.0 if t >= T else 0.0, dt, t_final, kind="sudden", params={"T": T, "eps": eps})

    @classmethod
    def ramp(cls, T1, T2, eps, dt, t_final, T3=None, shape="smooth", eps_shape="smooth"):
        """``eps`` rises to its target on [0, T1], ``lam`` goes 0 -> 1 on [T1, T2].

        With ``T3 > T2`` the perturbation is removed again on [T2, T3].
        ``T1 = 0`` starts with the full perturbation switched on.
        """
        if shape not in RAMP_SHAPES or eps_shape not in RAMP_SHAPES:
            raise DomainError(f"unknown ramp shape; expected one of {sorted(RAMP_SHAPES)}")
        if not 0 <= T1 < T2 or (T3 is not None and T3 < T2):
            raise DomainError(f"need 0 <= T1 < T2 <= T3, got T1={T1}, T2={T2}, T3={T3}")

        def eps_t(t):
            up = 1.0 if T1 == 0 else _ramp(t, 0.0, T1, eps_shape)
            down = 0.0 if T3 is None or T3 == T2 else _ramp(t, T2, T3, eps_shape)
            return eps * (up - down)

        return cls(
            eps_t,
            lambda t: _ramp(t, T1, T2, shape),
            dt,
            t_final,
            kind="ramp",
            params={"T1": T1, "T2": T2, "T3": T3, "eps": eps, "shape": shape},
        )

    @classmethod
    def from_job(cls, job: dict, eps: float = 0.0):
        """Build from ``{type, T, T1, T2, T3, dt, t_final}`` (plus optional ``shape``)."""
        kind = job.get("type", "ramp")
        try:
            dt, t_final = float(job["dt"]), float(job["t_final"])
            if kind == "sudden":
                return cls.sudden(float(job.get("T", 0.0)), eps, dt, t_final)
            if kind == "ramp":
                T3 = job.get("T3")
                return cls.ramp(
                    float(job.get("T1", 0.0)),
                    float(job["T2"]),
                    eps,
                    dt,
                    t_final,
                    T3=None if T3 is None else float(T3),
                    shape=job.get("shape", "smooth"),
                )
            if kind == "coupled":
                return cls.constant(eps, 1.0, dt, t_final)
        except KeyError as exc:
            raise DomainError(f"schedule lacks field {exc}") from None
        raise DomainError(f"unknown schedule type {kind!r}")


@dataclass
class Trajectory:
    times: np.ndarray
    energies: np.ndarray
    traces: np.ndarray
    trace_sq: np.ndarray
    hermiticity: np.ndarray
    densities: np.ndarray
    final: GDM
    states: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    def columns(self) -> tuple[list[str], np.ndarray]:
        """Trajectory CSV layout: t, energy, trace, trace_sq, rho_1..rho_K, extras."""
        K = self.densities.shape[1]
        names = ["t", "energy", "trace", "trace_sq"] + [f"rho_{k}" for k in range(1, K + 1)]
        cols = [self.times, self.energies, self.traces, self.trace_sq, *self.densities.T]
        for name, values in self.extra.items():
            names.append(name)
            cols.append(np.asarray(values))
        return names, np.column_stack(cols)


class _Recorder:
    def __init__(self, K, N, keep_states):
        self.rho = density_operators(K, N)
        self.keep = keep_states
        self.rows = {k: [] for k in ("t", "E", "tr", "tr2", "herm", "rho")}
        self.states = []

    def __call__(self, t, D, H, N):
        diag = np.diag(D)
        r = self.rows
        r["t"].append(t)
        r["E"].append(float(np.sum(D * H.T).real))
        r["tr"].append(float(diag.real.sum()))
        r["tr2"].append(float(np.vdot(D.conj().T, D).real))
        r["herm"].append(float(np.abs(D - D.conj().T).max()))
        r["rho"].append(self.rho @ diag.real)
        if self.keep:
            self.states.append(GDM(D.copy(), N))

    def trajectory(self, D, N, **extra):
        r = self.rows
        return Trajectory(
            np.array(r["t"]),
            np.array(r["E"]),
            np.array(r["tr"]),
            np.array(r["tr2"]),
            np.array(r["herm"]),
            np.array(r["rho"]),
            GDM(D, N),
            self.states,
            {k: np.asarray(v) for k, v in extra.items()},
        )


def _validate_initial(D0: GDM, N: int, G: int):
    if D0.basis_tag != SITE_BASIS:
        raise BasisTagError(f"propagation runs in the {SITE_BASIS!r} basis, got {D0.basis_tag!r}")
    if D0.n_electrons != N or D0.G != G:
        raise DomainError(f"GDM (N={D0.n_electrons}, G={D0.G}) does not match model (N={N}, G={G})")
    report = check_nrep(D0)
    if not report.passed:
        names = ", ".join(r.name for r in report.failed())
        raise DomainError(f"initial GDM violates necessary rules: {names}")


def propagate_gdm(D0: GDM, model: LatticeModel, N: int, schedule: Schedule, stride: int = 1, keep_states: bool = False) -> Trajectory:
    """Liouville-von Neumann propagation ``D <- U D U^+`` with midpoint exponentials.

    Observables (energy ``Tr[D H(t)]``, trace, ``Tr[D^2]``, spin-orbital
    densities) are recorded every ``stride`` steps and at the end.
    """
    parts = geminal_parts(model, N)
    _validate_initial(D0, N, parts.base.shape[0])
    dt, n_steps = schedule.dt, schedule.n_steps
    moving = schedule.positions is not None

    def hamiltonian(t):
        p = geminal_parts(model, N, positions=schedule.positions(t)) if moving else parts
        return p.at(schedule.eps(t), schedule.lam(t))

    rec = _Recorder(model.K, N, keep_states)
    D = D0.matrix.copy()
    rec(0.0, D, hamiltonian(0.0), N)
    key, U = None, None
    for step in range(n_steps):
        tm = (step + 0.5) * dt
        new_key = (schedule.eps(tm), schedule.lam(tm), tuple(schedule.positions(tm)) if moving else None)
        if new_key != key:
            U = unitary_step((N - 1) * hamiltonian(tm), dt)
            key = new_key
        D = conjugate(U, D)
        if (step + 1) % stride == 0 or step + 1 == n_steps:
            t = (step + 1) * dt
            rec(t, D, hamiltonian(t), N)
    return rec.trajectory(D, N)


def eigenprojection(model: LatticeModel, N: int, eps: float, alpha) -> GDM:
    """Slater-pair-basis GDM of the determinant of one-body eigenorbitals ``alpha``.

    Orbitals are the eigenvectors of ``h + eps v_p`` in ascending energy,
    numbered from 1.  The result projects onto the matching eigenvectors of
    the non-interacting pair Hamiltonian.
    """
    alpha = as_configuration(alpha)
    if alpha.N != N:
        raise DomainError(f"configuration {alpha.orbitals} does not hold N={N} electrons")
    _, C = np.linalg.eigh(model.h + eps * np.diag(model.v_p))
    W = pair_compound(C[:, np.array(alpha.orbitals) - 1])
    return GDM(W @ W.conj().T, N)


def fidelity_report(model: LatticeModel, N: int, schedule: Schedule, alpha=None, stride: int = 10) -> dict:
    """Max deviation of GDM-propagated density and energy from the FCI oracle.

    Starts both sides from the determinant ``alpha`` of non-interacting
    eigenorbitals at ``eps(0)`` (Aufbau when ``alpha`` is None).  No accuracy
    threshold is implied; interacting runs need not agree.
    """
    alpha = tuple(range(1, N + 1)) if alpha is None else tuple(alpha)
    eps0 = schedule.eps(0.0)
    _, C = np.linalg.eigh(model.h + eps0 * np.diag(model.v_p))
    psi0 = slater_civector(C, alpha)
    D0 = gdm_from_ci(psi0)
    gdm_run = propagate_gdm(D0, model, N, schedule, stride=stride)
    fci_run = fci_propagate(psi0, model, schedule, stride=stride)
    ddens = np.abs(gdm_run.densities - fci_run.densities)
    dE = np.abs(gdm_run.energies - fci_run.energies)
    return {
        "initial_configuration": list(alpha),
        "n_samples": int(len(gdm_run.times)),
        "max_density_deviation": float(ddens.max()),
        "max_energy_deviation": float(dE.max()),
        "final_density_deviation": float(ddens[-1].max()),
        "final_energy_deviation": float(dE[-1]),
        "fci_norm_drift": float(np.abs(fci_run.norms - 1).max()),
        "gdm_trace_drift": float(np.abs(gdm_run.traces - N * (N - 1) / 2).max()),
        "times": gdm_run.times,
        "gdm_energy": gdm_run.energies,
        "fci_energy": fci_run.energies,
    }


def adiabatic_leakage(model: LatticeModel, N: int, eps: float, T: float, alpha=None, dt: float = 0.05, shape: str = "ease_out") -> dict:
    """Coherence left behind by a finite-time ``lam`` ramp of duration ``T``.

    Starts from the eigenprojection of ``alpha`` at ``lam = 0``, ramps
    ``lam`` to 1 over ``T`` and returns the Frobenius norm of the
    off-diagonal part of ``D(T)`` in the ``lam = 1`` eigenbasis, together
    with the population error against frozen occupations.
    """
    alpha = tuple(range(1, N + 1)) if alpha is None else tuple(alpha)
    D0 = eigenprojection(model, N, eps, alpha)
    sched = Schedule.ramp(0.0, T, eps, dt, T, shape=shape)
    traj = propagate_gdm(D0, model, N, sched, stride=max(1, sched.n_steps))
    _, V1 = np.linalg.eigh(geminal_parts(model, N).at(eps, 1.0))
    Dfin = V1.conj().T @ traj.final.matrix @ V1
    off = Dfin - np.diag(np.diag(Dfin))
    return {
        "T": T,
        "leakage": float(np.linalg.norm(off)),
        "energy": float(traj.energies[-1]),
        "trace_sq": float(traj.trace_sq[-1]),
        "populations": np.diag(Dfin).real,
    }


def nonadiabatic_coupling(model: LatticeModel, N: int, eps: float, lam: float, dlam: float, lambda_dot: float = 1.0) -> dict:
    """Finite-difference coupling ``M_ij = <i| d/dt |j>`` at ``lam``.

    Eigenvectors at ``lam +- dlam`` are matched to those at ``lam`` by
    maximal overlap and rephased so each overlap is real positive; then
    ``M = V^+ (V_+ - V_-) / (2 dlam) * lambda_dot`` is antisymmetrized.
    Returns ``M``, the energies and the relative size of the symmetric part
    discarded by the antisymmetrization.
    """
    if not dlam > 0:
        raise DomainError(f"dlam must be positive, got {dlam}")
    parts = geminal_parts(model, N)
    E, V = np.linalg.eigh(parts.at(eps, lam))
    groups = degenerate_groups(E, DEGENERACY_TOL)
    if any(len(g) > 1 for g in groups):
        raise DegeneracyError(f"degenerate pair spectrum at eps={eps}, lam={lam}; raise eps")
    shifted = []
    for sign in (+1, -1):
        _, Vs = np.linalg.eigh(parts.at(eps, lam + sign * dlam))
        perm, overlaps = match_states(V, Vs)
        if overlaps.min() < np.cos(np.pi / 4):
            raise DomainError(f"dlam={dlam} too large: eigenbases at lam and lam{'+-'[sign < 0]}dlam barely overlap")
        shifted.append(align_phases(V, Vs[:, perm]))
    raw = V.conj().T @ (shifted[0] - shifted[1]) / (2 * dlam) * lambda_dot
    M = 0.5 * (raw - raw.conj().T)
    sym = 0.5 * (raw + raw.conj().T)
    scale = max(float(np.linalg.norm(M)), 1e-300)
    return {"M": M, "energies": E, "symmetric_residual": float(np.linalg.norm(sym)) / scale, "eigenvectors": V}


def adiabatic_blocks_evolve(D0: np.ndarray, blocks: Sequence[Sequence[int]], coupling: Callable[[float], Sequence[np.ndarray]], t_grid: Sequence[float]) -> np.ndarray:
    """Evolve a block-diagonal GDM inside degenerate subspaces.

    Each block obeys ``dD_mu/dt = -[M_mu, D_mu]`` and advances with
    ``D_mu <- exp(-M_mu dt) D_mu exp(M_mu dt)`` using the coupling at the
    step midpoint.  ``coupling(t)`` returns one skew-Hermitian matrix per
    block; ``blocks`` lists the 0-based indices of each subspace.
    """
    D = np.array(getattr(D0, "matrix", D0), dtype=complex)
    blocks = [np.asarray(b, dtype=np.intp) for b in blocks]
    covered = np.zeros(D.shape[0], dtype=bool)
    mask = np.zeros(D.shape, dtype=bool)
    for b in blocks:
        if covered[b].any():
            raise StructureError("blocks overlap")
        covered[b] = True
        mask[np.ix_(b, b)] = True
    if not covered.all():
        raise StructureError("blocks do not cover every state")
    if np.abs(D[~mask]).max(initial=0.0) > 0:
        raise StructureError("initial GDM has elements outside the declared blocks")
    t_grid = np.asarray(t_grid, dtype=float)
    for t0, t1 in zip(t_grid[:-1], t_grid[1:]):
        Ms = coupling(0.5 * (t0 + t1))
        if len(Ms) != len(blocks):
            raise StructureError(f"coupling returned {len(Ms)} blocks, expected {len(blocks)}")
        for b, M in zip(blocks, Ms):
            M = np.atleast_2d(np.asarray(M, dtype=complex))
            if M.shape != (len(b), len(b)):
                raise StructureError(f"coupling block shape {M.shape} does not match block size {len(b)}")
            U = skew_step(M, t1 - t0)
            sub = np.ix_(b, b)
            D[sub] = conjugate(U, D[sub])
    return D


@dataclass
class NucleiState:
    positions: np.ndarray
    velocities: np.ndarray
    masses: np.ndarray
    mobile: np.ndarray

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.velocities = np.asarray(self.velocities, dtype=float)
        self.masses = np.asarray(self.masses, dtype=float)
        self.mobile = np.asarray(self.mobile, dtype=bool)
        if np.any(self.masses[self.mobile] <= 0):
            raise DomainError("mobile nuclei need positive masses")

    @classmethod
    def from_model(cls, model: LatticeModel) -> "NucleiState":
        n = len(model.nuclei)
        return cls(
            model.nuclear_positions,
            np.zeros(n),
            np.array([nu.mass for nu in model.nuclei]),
            np.array([nu.mobile for nu in model.nuclei], dtype=bool),
        )

    def kinetic_energy(self) -> float:
        return float(0.5 * np.sum((self.masses * self.velocities**2)[self.mobile]))


def nuclear_forces(D: np.ndarray, model: LatticeModel, N: int, positions) -> tuple[np.ndarray, np.ndarray]:
    """Forces on the nuclei from the analytic gradient and from the density integral.

    Returns ``(gradient_force, density_force)``; both include the
    nucleus-nucleus repulsion and must agree.
    """
    grad_att = model.attraction_gradient(positions)
    nn = model.nuclear_repulsion_gradient(positions)
    # analytic route: -Tr[D dH/dR] with dH/dR the promoted one-body derivative
    grad_force = np.empty(len(grad_att))

    for k, g in enumerate(grad_att):
        dH = promote_one_body(np.kron(np.diag(g), np.eye(2))) / (N - 1)
        grad_force[k] = -float(np.sum(D * dH.T).real) - nn[k]
    # density route: -sum_x rho(x) dv(x; R)/dR
    occ = density_operators(model.K, N) @ np.diag(D).real
    site_density = occ[0::2] + occ[1::2]
    density_force = -(grad_att @ site_density) - nn
    return grad_force, density_force


def propagate_coupled(
    D0: GDM,
    nuclei: NucleiState,
    model: LatticeModel,
    N: int,
    dt: float,
    steps: int,
    eps: float = 0.0,
    lam: float = 1.0,
    stride: int = 1,
    require_mobile: bool = True,
) -> Trajectory:
    """Mixed quantum-classical run: GDM under ``H(R)``, nuclei by velocity Verlet.

    Each step: half-kick, drift, midpoint GDM step at ``(R_old + R_new)/2``,
    new forces, half-kick.  Extra trajectory columns hold nuclear positions
    and velocities, the energy ledger and the force cross-check residual.
    """
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    if require_mobile and not nuclei.mobile.any():
        raise DomainError("coupled propagation needs at least one mobile nucleus")
    parts = geminal_parts(model, N)
    _validate_initial(D0, N, parts.base.shape[0])
    R = nuclei.positions.copy()
    v = nuclei.velocities.copy()
    M = np.where(nuclei.mobile, nuclei.masses, np.inf)

    def hamiltonian(pos):
        return geminal_parts(model, N, positions=pos).at(eps, lam)

    rec = _Recorder(model.K, N, False)
    ledger = {f"R_{k + 1}": [] for k in range(len(R))}
    ledger.update({f"v_{k + 1}": [] for k in range(len(R))})
    ledger.update({"e_electronic": [], "e_kinetic": [], "e_nuclear": [], "e_total": [], "force_residual": []})

    def record(t, D, H, forces):
        rec(t, D, H, N)
        for k in range(len(R)):
            ledger[f"R_{k + 1}"].append(R[k])
            ledger[f"v_{k + 1}"].append(v[k])
        e_el = rec.rows["E"][-1]
        e_kin = float(0.5 * np.sum(np.where(nuclei.mobile, nuclei.masses * v**2, 0.0)))
        e_nn = model.nuclear_repulsion(R)
        ledger["e_electronic"].append(e_el)
        ledger["e_kinetic"].append(e_kin)
        ledger["e_nuclear"].append(e_nn)
        ledger["e_total"].append(e_el + e_kin + e_nn)
        ledger["force_residual"].append(float(np.abs(forces[0] - forces[1]).max(initial=0.0)))

    D = D0.matrix.copy()
    forces = nuclear_forces(D, model, N, R)
    max_force_residual = 0.0
    record(0.0, D, hamiltonian(R), forces)
    for step in range(steps):
        F = np.where(nuclei.mobile, forces[0], 0.0)
        v = v + 0.5 * dt * F / M
        R_new = R + dt * v
        U = unitary_step((N - 1) * hamiltonian(0.5 * (R + R_new)), dt)
        D = conjugate(U, D)
        R = R_new
        forces = nuclear_forces(D, model, N, R)
        max_force_residual = max(max_force_residual, float(np.abs(forces[0] - forces[1]).max(initial=0.0)))
        F = np.where(nuclei.mobile, forces[0], 0.0)
        v = v + 0.5 * dt * F / M
        if (step + 1) % stride == 0 or step + 1 == steps:
            record((step + 1) * dt, D, hamiltonian(R), forces)
    traj = rec.trajectory(D, N, **ledger)
    traj.summary["max_force_residual"] = max_force_residual
    return traj


@dataclass
class SuddenDensity:
    times: np.ndarray
    density: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    variance_coherent: np.ndarray
    energies: np.ndarray
    gdm: GDM

    def empirical_mean(self) -> np.ndarray:
        return self.density.mean(axis=0)

    def empirical_variance(self) -> np.ndarray:
        return self.density.var(axis=0)


def sudden_density(D: GDM, model: LatticeModel, N: int, t_grid, eps: float, T: float = 0.0) -> SuddenDensity:
    """Density after an instantaneous switch-on of the interaction at ``T``.

    ``D`` is the pre-switch GDM in the Slater-pair basis or in the
    non-interacting eigenbasis ``eigen_tag(eps, 0)``.  It is moved to the
    interacting eigenbasis, where ``D_mn(t) = exp(-i E'_mn (t - T)) D_mn(T)``
    with ``E'_mn = (N - 1)(E_m - E_n)``.

    The closed-form time average keeps diagonal and degenerate terms.
    ``variance`` is the half-sum ``1/2 sum_{p != q, E_p != E_q} |P_pq|^2``
    with ``P_pq = D_pq rho_qp``, which treats every ordered cosine as
    independent.  The ordered terms ``(p, q)`` and ``(q, p)`` are in fact
    one real cosine of amplitude ``2 |P_pq|``, so the long-time variance of
    the series is ``variance_coherent``, the full sum without the 1/2.
    """
    parts = geminal_parts(model, N)
    if D.basis_tag == SITE_BASIS:
        M = D.matrix
    elif D.basis_tag == eigen_tag(eps, 0.0):
        _, V0 = np.linalg.eigh(parts.at(eps, 0.0))
        M = V0 @ D.matrix @ V0.conj().T
    else:
        raise BasisTagError(f"expected a non-interacting GDM ({SITE_BASIS!r} or {eigen_tag(eps, 0.0)!r}), got {D.basis_tag!r}")
    E, V = np.linalg.eigh(parts.at(eps, 1.0))
    interacting = change_basis(GDM(M, N), V.conj().T, eigen_tag(eps, 1.0))
    DI = interacting.matrix
    rho_site = density_operators(model.K, N)
    # rho_nm(x) in the interacting basis, stacked over x: shape (K, G, G)
    rho = np.einsum("gn,xg,gm->xnm", V.conj(), rho_site, V, optimize=True)
    P = DI[None, :, :] * np.transpose(rho, (0, 2, 1))
    Ep = (N - 1) * E
    scale = max(float(Ep.max() - Ep.min()), 1e-300)
    degenerate = np.abs(Ep[:, None] - Ep[None, :]) < DEGENERACY_TOL * scale
    mean = P[:, degenerate].real.sum(axis=1)
    variance_coherent = (np.abs(P[:, ~degenerate]) ** 2).sum(axis=1)

    t = np.asarray(t_grid, dtype=float)
    density = np.empty((t.size, model.K))
    chunk = 2048
    for start in range(0, t.size, chunk):
        tt = t[start:start + chunk] - T
        phase = np.exp(-1j * np.outer(tt, Ep))
        # rho(x,t) = sum_mn u_m P_mn(x) conj(u_n),  u_m = exp(-i E'_m t)
        density[start:start + chunk] = np.einsum("tm,xmn,tn->tx", phase, P, phase.conj(), optimize=True).real
    return SuddenDensity(t, density, mean, 0.5 * variance_coherent, variance_coherent, E, interacting)
