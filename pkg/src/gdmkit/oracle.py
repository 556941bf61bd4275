"""
Full configuration interaction on the lattice models.

Determinants are bit-coded (spin-orbital ``k`` <-> bit ``k - 1``) and ordered
like :func:`gdmkit.basis.enumerate_configurations`, so CI vectors produced
here feed straight into :func:`gdmkit.gdm.gdm_from_ci`.  The many-body
Hamiltonian is

    H = sum_pq (h + eps v_p)_pq a+_p a_q + lam sum_{p<q} v(site p, site q) n_p n_q

which is exactly the pair sum of the effective two-electron Hamiltonian.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .basis import enumerate_configurations
from .errors import DomainError, ResourceLimitError
from .gdm import CIVector
from .linalg import unitary_step
from .model import LatticeModel

DEFAULT_LIMIT = 50_000
DENSE_LIMIT = 2_000


@lru_cache(maxsize=16)
def _determinants(K, N):
    masks = np.array([c.bitmask() for c in enumerate_configurations(K, N)], dtype=np.int64)
    masks.flags.writeable = False
    return masks, {int(m): i for i, m in enumerate(masks)}


def _popcount(x: int) -> int:
    return bin(x).count("1")


@lru_cache(maxsize=16)
def _hop_structure(K, N, hop_pairs):
    """Single excitations ``a+_q a_p`` along the given (p, q) pairs.

    Returns arrays ``(row, col, p, q, sign)`` for every determinant ``col``
    with ``p`` occupied and ``q`` empty; ``row`` is the resulting determinant.
    """
    masks, index = _determinants(K, N)
    rows, cols, ps, qs, signs = [], [], [], [], []
    for col, mask in enumerate(masks):
        mask = int(mask)
        for p, q in hop_pairs:
            if not (mask >> p) & 1 or (mask >> q) & 1:
                continue
            lo, hi = (p, q) if p < q else (q, p)
            between = mask & (((1 << hi) - 1) ^ ((1 << (lo + 1)) - 1))
            new = (mask ^ (1 << p)) | (1 << q)
            rows.append(index[new])
            cols.append(col)
            ps.append(p)
            qs.append(q)
            signs.append(-1.0 if _popcount(between) % 2 else 1.0)
    ints = tuple(np.array(a, dtype=np.intp) for a in (rows, cols, ps, qs))
    return ints + (np.array(signs, dtype=float),)


@lru_cache(maxsize=16)
def _occupations(K, N):
    masks, _ = _determinants(K, N)
    occ = ((masks[:, None] >> np.arange(K)[None, :]) & 1).astype(float)
    occ.flags.writeable = False
    return occ


@dataclass(frozen=True, eq=False)
class FCIOperatorSet:
    """Many-body Hamiltonian pieces over the determinant basis.

    ``H(eps, lam) = one_body + eps * perturbation + lam * interaction``.
    Dense arrays below :data:`DENSE_LIMIT`, CSR matrices above.
    """

    model: LatticeModel
    n_electrons: int
    one_body: object
    perturbation: object
    interaction: object
    positions: tuple | None = None

    @property
    def dim(self) -> int:
        return self.one_body.shape[0]

    def hamiltonian(self, eps: float, lam: float):
        return self.one_body + eps * self.perturbation + lam * self.interaction

    def occupations(self) -> np.ndarray:
        """0/1 occupation table, shape ``(dim, K)``."""
        return _occupations(self.model.K, self.n_electrons)


def _one_body_operator(h, K, N, dense):
    masks, _ = _determinants(K, N)
    dim = len(masks)
    occ = _occupations(K, N)
    diag = occ @ np.diag(h).real
    hop_pairs = tuple((p, q) for p in range(K) for q in range(K) if p != q and h[q, p] != 0)
    rows, cols, ps, qs, signs = _hop_structure(K, N, hop_pairs)
    vals = h[qs, ps] * signs if len(rows) else np.zeros(0)
    M = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr() + sp.diags(diag)
    return M.toarray() if dense else M.tocsr()


def fci_operators(model: LatticeModel, N: int, positions=None, limit: int = DEFAULT_LIMIT) -> FCIOperatorSet:
    K = model.K
    if not 0 < N <= K:
        raise DomainError(f"need 0 < N <= K, got N={N}, K={K}")
    dim = comb(K, N)
    if dim > limit:
        raise ResourceLimitError(f"FCI dimension C({K},{N}) = {dim} exceeds the limit {limit}")
    dense = dim <= DENSE_LIMIT
    h = model.one_body(positions)
    one = _one_body_operator(h, K, N, dense)
    pert = _one_body_operator(np.diag(model.v_p), K, N, dense)
    occ = _occupations(K, N)
    site = np.arange(K) // 2
    V = model.v_sites[site[:, None], site[None, :]]
    # sum over p < q of v n_p n_q = 0.5 * (n V n - sum_p v_pp n_p)
    inter_diag = 0.5 * (np.einsum("ip,pq,iq->i", occ, V, occ) - occ @ np.diag(V))
    inter = np.diag(inter_diag) if dense else sp.diags(inter_diag).tocsr()
    return FCIOperatorSet(model, N, one, pert, inter, None if positions is None else tuple(positions))


def fci_solve(model: LatticeModel, N: int, eps: float, lam: float, k: int = 1, limit: int = DEFAULT_LIMIT, ops: FCIOperatorSet | None = None):
    """The ``k`` lowest eigenpairs as ``[(energy, CIVector), ...]``, ascending."""
    ops = fci_operators(model, N, limit=limit) if ops is None else ops
    H = ops.hamiltonian(eps, lam)
    k = min(k, ops.dim)
    if sp.issparse(H):
        E, V = eigsh(H, k=k, which="SA", tol=1e-13)
    else:
        E, V = np.linalg.eigh(H)
    order = np.argsort(E)[:k]
    return [(float(E[i]), CIVector(V[:, i], N, model.K)) for i in order]


def apply_hamiltonian(ops: FCIOperatorSet, eps: float, lam: float, psi: CIVector) -> np.ndarray:
    return ops.hamiltonian(eps, lam) @ psi.coefficients


def wavefunction_expectation(psi: CIVector, observable: str, ops: FCIOperatorSet | None = None, eps: float = 0.0, lam: float = 0.0, orbital: int | None = None):
    """Expectation of ``'energy'`` or ``'density'`` for a CI vector.

    ``'density'`` returns the occupation of the 1-based spin-orbital
    ``orbital``, or the full occupation vector when ``orbital`` is None.
    """
    c = psi.coefficients
    if observable == "energy":
        if ops is None:
            raise DomainError("energy expectation needs an FCIOperatorSet")
        return float(np.vdot(c, ops.hamiltonian(eps, lam) @ c).real)
    if observable == "density":
        occ = _occupations(psi.n_orbitals, psi.n_electrons)
        dens = (np.abs(c) ** 2) @ occ
        if orbital is None:
            return dens
        if not 1 <= orbital <= psi.n_orbitals:
            raise DomainError(f"orbital {orbital} outside 1..{psi.n_orbitals}")
        return float(dens[orbital - 1])
    raise DomainError(f"unknown observable {observable!r}; expected 'energy' or 'density'")


def slater_civector(C: np.ndarray, alpha) -> CIVector:
    """CI vector of the determinant of orbitals ``C[:, alpha - 1]`` over site determinants."""
    C = np.asarray(C)
    K = C.shape[0]
    cols = np.array(list(alpha)) - 1
    N = len(cols)
    sub = C[:, cols]
    coeffs = np.array([np.linalg.det(sub[list(np.array(c.orbitals) - 1), :]) for c in enumerate_configurations(K, N)])
    return CIVector(coeffs, N, K)


@dataclass
class FCITrajectory:
    times: np.ndarray
    energies: np.ndarray
    densities: np.ndarray
    norms: np.ndarray
    states: list
    final: CIVector


def fci_propagate(psi0: CIVector, model: LatticeModel, schedule, stride: int = 1, keep_states: bool = False, ops: FCIOperatorSet | None = None) -> FCITrajectory:
    """Propagate a CI vector with midpoint exponentials ``exp(-i H(t + dt/2) dt)``.

    ``schedule`` provides ``eps(t)``, ``lam(t)``, ``dt`` and ``t_final``
    (see :class:`gdmkit.dynamics.Schedule`); nuclear positions from
    ``schedule.positions(t)`` are honoured when present.
    """
    N, K = psi0.n_electrons, psi0.n_orbitals
    dt, n_steps = schedule.dt, schedule.n_steps
    if dt <= 0:
        raise DomainError(f"dt must be positive, got {dt}")
    moving = getattr(schedule, "positions", None) is not None
    base_ops = fci_operators(model, N) if ops is None else ops

    def hamiltonian(t):
        o = fci_operators(model, N, positions=schedule.positions(t)) if moving else base_ops
        H = o.hamiltonian(schedule.eps(t), schedule.lam(t))
        return H.toarray() if sp.issparse(H) else H

    occ = _occupations(K, N)
    c = psi0.coefficients.copy()
    times, energies, dens, norms, states = [], [], [], [], []

    def record(step, c):
        t = step * dt
        times.append(t)
        energies.append(float(np.vdot(c, hamiltonian(t) @ c).real))
        dens.append((np.abs(c) ** 2) @ occ)
        norms.append(float(np.linalg.norm(c)))
        if keep_states:
            states.append(CIVector(c.copy(), N, K))

    record(0, c)
    key, U = None, None
    for step in range(n_steps):
        tm = (step + 0.5) * dt
        new_key = (schedule.eps(tm), schedule.lam(tm), None if not moving else tuple(schedule.positions(tm)))
        if new_key != key:
            U = unitary_step(hamiltonian(tm), dt)
            key = new_key
        c = U @ c
        if (step + 1) % stride == 0 or step + 1 == n_steps:
            record(step + 1, c)
    return FCITrajectory(np.array(times), np.array(energies), np.array(dens), np.array(norms), states, CIVector(c, N, K))
