"""
Adiabatic continuation of geminal eigencurves.

With ``eps > 0`` the pair spectrum of ``H(eps, lam)`` is simple, so a GDM
that is diagonal in the eigenbasis at ``lam = 0`` stays diagonal while the
interaction is switched on slowly.  Its energy at ``lam`` is the sum of the
occupied eigencurves.  This module samples the curves on a ``lam`` grid,
connects them by eigenvector overlap, and assembles energies for initial
configurations.

Curves are labelled 1, 2, ... by their energy rank at ``lam = 0``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .basis import Configuration, GeminalBasis, as_configuration, pair_set_is_generable
from .errors import CoverageError, DomainError, GridResolutionError
from .gdm import pair_compound
from .linalg import align_phases, match_margins, match_states
from .model import LatticeModel, geminal_parts
from .oracle import DENSE_LIMIT, fci_operators, fci_solve, slater_civector

AMBIGUITY = 0.5
MAX_DEPTH = 8
CROSSING_RESOLUTION = 1e-4
DEFAULT_CANDIDATES = 200


@dataclass(frozen=True)
class Crossing:
    """Two tracked curves swap energy order between ``lam_lo`` and ``lam_hi``."""

    lam_lo: float
    lam_hi: float
    curve_a: int
    curve_b: int


@dataclass(eq=False)
class EigenCurveSet:
    """Tracked eigencurves of the pair Hamiltonian over a ``lam`` grid.

    ``energies[p, i]`` and ``vectors[p, :, i]`` belong to curve ``i + 1`` at
    ``lambdas[p]``.  The grid contains any points inserted by refinement.
    Every curve is tracked; ``k`` only bounds which curves count as scanned.
    """

    model: LatticeModel
    n_electrons: int
    epsilon: float
    k: int
    lambdas: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray
    permutations: list
    crossings: list
    orbital_energies: np.ndarray
    orbitals: np.ndarray
    curve_pairs: list
    max_residual: float
    min_overlap: float
    refined_points: int = 0

    @property
    def G(self) -> int:
        return self.energies.shape[1]

    @property
    def n_pairs(self) -> int:
        return self.n_electrons * (self.n_electrons - 1) // 2

    def curve(self, label: int) -> np.ndarray:
        return self.energies[:, label - 1]

    def curve_for_pair(self, pair) -> int:
        """Label of the curve that starts as the orbital pair ``(a, b)`` at ``lam = 0``."""
        return self._pair_lookup[tuple(sorted(pair))]

    @property
    def _pair_lookup(self) -> dict:
        return {p: i + 1 for i, p in enumerate(self.curve_pairs)}

    def lipschitz_bound(self) -> float:
        """Largest slope ``|dE/dlam|`` over all curves, from Hellmann-Feynman at the grid points."""
        inter = geminal_parts(self.model, self.n_electrons).interaction
        slopes = np.einsum("pgi,g,pgi->pi", self.vectors.conj(), np.diag(inter).real, self.vectors).real
        return float(np.abs(slopes).max())

    def rows(self, n_curves: int | None = None):
        """``(lambda, tracked_index, energy, crossing_flag)`` rows for the first curves."""
        n = self.k if n_curves is None else n_curves
        flagged = set()
        for c in self.crossings:
            for label in (c.curve_a, c.curve_b):
                flagged.add((c.lam_lo, label))
                flagged.add((c.lam_hi, label))
        out = []
        for p, lam in enumerate(self.lambdas):
            for i in range(n):
                out.append((float(lam), i + 1, float(self.energies[p, i]), int((float(lam), i + 1) in flagged)))
        return out


class _Point:
    __slots__ = ("lam", "E", "V")

    def __init__(self, parts, eps, lam):
        H = parts.at(eps, lam)
        self.lam = float(lam)
        self.E, self.V = np.linalg.eigh(H)


def _residual(parts, eps, point) -> float:
    H = parts.at(eps, point.lam)
    return float(np.abs(H @ point.V - point.V * point.E).max())


def _connect(parts, eps, a, b, order_a, depth, stats):
    """Link point ``a`` to ``b``; returns ``[(point, order), ...]`` ending at ``b``.

    An interval is bisected when any match is ambiguous (counted against
    :data:`MAX_DEPTH`) or when two tracked curves swap energy order and the
    interval is still wider than :data:`CROSSING_RESOLUTION`.  The second
    rule puts every crossing on the same dyadic sub-grid whatever the
    starting spacing, so a narrow avoided crossing is resolved the same way
    on a grid and on its refinements.
    """
    perm, overlaps = match_states(a.V[:, order_a], b.V)
    margins = match_margins(a.V[:, order_a], b.V, perm)
    ambiguous = margins.min() < AMBIGUITY
    swapped = not np.array_equal(perm, order_a) and b.lam - a.lam > CROSSING_RESOLUTION
    if not ambiguous and not swapped:
        stats["min_overlap"] = min(stats["min_overlap"], float(overlaps.min()))
        return [(b, perm)]
    if ambiguous and depth >= MAX_DEPTH:
        raise GridResolutionError(
            f"eigenvector tracking ambiguous between lam={a.lam:.6g} and lam={b.lam:.6g} "
            f"after {MAX_DEPTH} refinements (overlap margin {margins.min():.3f})"
        )
    mid = _Point(parts, eps, 0.5 * (a.lam + b.lam))
    stats["refined"] += 1
    step = depth + 1 if ambiguous else depth
    first = _connect(parts, eps, a, mid, order_a, step, stats)
    return first + _connect(parts, eps, mid, b, first[-1][1], step, stats)


def _find_crossings(lams, energies):
    crossings = []
    iu = np.triu_indices(energies.shape[1], 1)
    for p in range(len(lams) - 1):
        da = (energies[p][:, None] - energies[p][None, :])[iu]
        db = (energies[p + 1][:, None] - energies[p + 1][None, :])[iu]
        for n in np.nonzero(da * db < 0)[0]:
            crossings.append(Crossing(float(lams[p]), float(lams[p + 1]), int(iu[0][n]) + 1, int(iu[1][n]) + 1))
    return crossings


def one_body_orbitals(model: LatticeModel, eps: float):
    """Eigenpairs of ``h + eps v_p``, ascending; orbital ``j`` is column ``j - 1``."""
    return np.linalg.eigh(model.h + eps * np.diag(model.v_p))


def scan_curves(model: LatticeModel, N: int, eps: float, lambdas, k: int | None = None) -> EigenCurveSet:
    """Diagonalize ``H(eps, lam)`` on the grid and connect the eigencurves.

    Adjacent points are matched by maximal-overlap assignment.  When any
    match beats its runner-up overlap by less than 0.5 the interval is
    bisected, up to 8 times; intervals where two curves swap energy order
    are bisected down to a width of 1e-4.
    A crossing is recorded wherever two tracked curves swap energy order.
    """
    if not eps > 0:
        raise DomainError(f"curve tracking needs eps > 0 for a simple spectrum, got {eps}")
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.ndim != 1 or lambdas.size == 0 or np.any(np.diff(lambdas) <= 0):
        raise DomainError("lambda grid must be a non-empty ascending sequence")
    if lambdas[0] != 0.0:
        raise DomainError("lambda grid must start at 0 so curves can be labelled")
    if lambdas.min() < 0 or lambdas.max() > 1:
        raise DomainError("lambda grid must lie in [0, 1]")
    parts = geminal_parts(model, N)
    G = parts.base.shape[0]
    P = N * (N - 1) // 2
    k = G if k is None else int(k)
    if not P <= k <= G:
        raise DomainError(f"need N(N-1)/2 = {P} <= k <= G = {G}, got k={k}")

    stats = {"refined": 0, "min_overlap": 1.0}
    first = _Point(parts, eps, lambdas[0])
    chain = [(first, np.arange(G))]
    for lam in lambdas[1:]:
        a, order = chain[-1]
        chain.extend(_connect(parts, eps, a, _Point(parts, eps, lam), order, 0, stats))

    lams = np.array([pt.lam for pt, _ in chain])
    energies = np.array([pt.E[order] for pt, order in chain])
    vectors = np.empty((len(chain), G, G))
    vectors[0] = first.V
    for p in range(1, len(chain)):
        pt, order = chain[p]
        vectors[p] = align_phases(vectors[p - 1], pt.V[:, order])

    e, C = one_body_orbitals(model, eps)
    W = pair_compound(C)
    owner = np.argmax(np.abs(vectors[0].T @ W), axis=1)
    basis = GeminalBasis(model.K)
    curve_pairs = [basis.pair(int(n) + 1) for n in owner]
    if len(set(curve_pairs)) != G:
        raise DomainError("lam = 0 curves do not map one-to-one onto orbital pairs; raise eps")

    return EigenCurveSet(
        model=model,
        n_electrons=N,
        epsilon=float(eps),
        k=k,
        lambdas=lams,
        energies=energies,
        vectors=vectors,
        permutations=[order for _, order in chain],
        crossings=_find_crossings(lams, energies),
        orbital_energies=e,
        orbitals=C,
        curve_pairs=curve_pairs,
        max_residual=max(_residual(parts, eps, pt) for pt, _ in chain),
        min_overlap=stats["min_overlap"],
        refined_points=stats["refined"],
    )


@dataclass
class FCIRecord:
    fci_energy: float
    deviation: float
    fci_ground: float
    tracked: bool


@dataclass
class AdiabaticSolution:
    """Frozen-occupation energy of a set of occupied curves."""

    initial_configuration: tuple | None
    occupied_curves: tuple
    lambdas: np.ndarray
    energy_lambda: np.ndarray
    representable: bool
    populations: dict
    epsilon: float
    fci: FCIRecord | None = None
    notes: list = field(default_factory=list)

    @property
    def final_energy(self) -> float:
        return float(self.energy_lambda[-1])

    def to_dict(self, seed: int | None = None) -> dict:
        out = {
            "initial_configuration": None if self.initial_configuration is None else list(self.initial_configuration),
            "occupied_curves": list(self.occupied_curves),
            "energy_lambda": [[float(l), float(E)] for l, E in zip(self.lambdas, self.energy_lambda)],
            "final_energy": self.final_energy,
            "representable": bool(self.representable),
            "epsilon": self.epsilon,
            "seed": seed,
        }
        if self.fci is not None:
            out["fci_energy"] = self.fci.fci_energy
            out["deviation"] = self.fci.deviation
            out["fci_ground_energy"] = self.fci.fci_ground
        return out


def solution_for_curves(curves: EigenCurveSet, labels) -> AdiabaticSolution:
    """Assemble the energy of an arbitrary set of occupied curves.

    The set is representable when the orbital pairs of its curves at
    ``lam = 0`` are exactly the pairs of one N-orbital configuration.
    """
    labels = tuple(sorted(int(c) for c in labels))
    P = curves.n_pairs
    if len(labels) != P or len(set(labels)) != P:
        raise DomainError(f"need {P} distinct curves, got {labels}")
    if min(labels) < 1 or max(labels) > curves.G:
        raise DomainError(f"curve labels must lie in 1..{curves.G}")
    uncovered = [c for c in labels if c > curves.k]
    if uncovered:
        raise CoverageError(f"curves {uncovered} lie beyond the {curves.k} scanned curves")
    pairs = [curves.curve_pairs[c - 1] for c in labels]
    representable = pair_set_is_generable(pairs, curves.n_electrons)
    alpha = tuple(sorted({o for p in pairs for o in p})) if representable else None
    energy = curves.energies[:, np.array(labels) - 1].sum(axis=1)
    return AdiabaticSolution(alpha, labels, curves.lambdas, energy, representable, {c: 1.0 for c in labels}, curves.epsilon)


def adiabatic_energy(curves: EigenCurveSet, alpha0, fci: "FCICurves | None" = None) -> AdiabaticSolution:
    """Occupy the curves seeded by the pairs of ``alpha0`` and sum them.

    ``alpha0`` lists 1-based one-body eigenorbitals of ``h + eps v_p`` in
    ascending energy.  With ``fci`` the FCI state continued from the same
    determinant is compared at ``lam = 1``.
    """
    alpha = as_configuration(alpha0)
    N = curves.n_electrons
    if alpha.N != N:
        raise DomainError(f"configuration {alpha.orbitals} holds {alpha.N} electrons, expected {N}")
    alpha.check_range(curves.model.K)
    labels = [curves.curve_for_pair(p) for p in alpha.pairs()]
    sol = solution_for_curves(curves, labels)
    sol.initial_configuration = alpha.orbitals
    if fci is not None:
        sol.fci = fci.compare(alpha, sol.final_energy)
    return sol


def lowest_block(curves: EigenCurveSet, fci: "FCICurves | None" = None) -> AdiabaticSolution:
    """Occupy the N(N-1)/2 lowest curves at ``lam = 1`` and trace them back."""
    labels = np.argsort(curves.energies[-1], kind="stable")[: curves.n_pairs] + 1
    sol = solution_for_curves(curves, labels)
    if fci is not None and sol.representable:
        sol.fci = fci.compare(Configuration(sol.initial_configuration), sol.final_energy)
    return sol


@dataclass(eq=False)
class FCICurves:
    """FCI eigenstates on the same ``lam`` grid, connected by overlap."""

    curves: EigenCurveSet
    energies: np.ndarray
    start_vectors: np.ndarray
    ground: float
    tracked: bool

    @classmethod
    def build(cls, curves: EigenCurveSet) -> "FCICurves":
        model, N, eps = curves.model, curves.n_electrons, curves.epsilon
        ops = fci_operators(model, N)
        if ops.dim > DENSE_LIMIT:
            E1, _ = fci_solve(model, N, eps, 1.0, k=1, ops=ops)[0]
            return cls(curves, np.empty((0, 0)), np.empty((0, 0)), E1, False)
        E0, V0 = np.linalg.eigh(ops.hamiltonian(eps, 0.0))
        V, rows = V0, [E0]
        for lam in curves.lambdas[1:]:
            E, Vn = np.linalg.eigh(ops.hamiltonian(eps, lam))
            perm, _ = match_states(V, Vn)
            V = Vn[:, perm]
            rows.append(E[perm])
        energies = np.array(rows)
        return cls(curves, energies, V0, float(energies[-1].min()), True)

    def compare(self, alpha: Configuration, final_energy: float) -> FCIRecord:
        if not self.tracked:
            return FCIRecord(self.ground, final_energy - self.ground, self.ground, False)
        det = slater_civector(self.curves.orbitals, alpha.orbitals).coefficients
        start = int(np.argmax(np.abs(self.start_vectors.T @ det)))
        E = float(self.energies[-1, start])
        return FCIRecord(E, final_energy - E, self.ground, True)


def configurations_by_energy(e: np.ndarray, N: int):
    """Yield N-orbital configurations (1-based) in ascending total orbital energy."""
    K = len(e)
    if not 0 < N <= K:
        raise DomainError(f"need 0 < N <= K, got N={N}, K={K}")
    start = tuple(range(N))
    heap = [(float(e[list(start)].sum()), start)]
    seen = {start}
    while heap:
        total, idx = heapq.heappop(heap)
        yield Configuration(tuple(i + 1 for i in idx)), total
        for j in range(N):
            nxt = idx[j] + 1
            limit = idx[j + 1] if j + 1 < N else K
            if nxt < limit:
                new = idx[:j] + (nxt,) + idx[j + 1:]
                if new not in seen:
                    seen.add(new)
                    heapq.heappush(heap, (total + float(e[nxt] - e[idx[j]]), new))


@dataclass
class SearchResult:
    ranked: list
    skipped: list
    lowest_block: AdiabaticSolution
    fci_ground: float | None

    @property
    def ground(self) -> AdiabaticSolution:
        valid = [s for s in self.ranked if s.representable]
        if not valid:
            raise DomainError("no representable candidate")
        return valid[0]


def ground_state_search(curves: EigenCurveSet, limit: int = DEFAULT_CANDIDATES, oracle: bool = False) -> SearchResult:
    """Evaluate initial configurations, lowest one-body energy first, and rank them.

    Candidates whose curves lie beyond the scanned ``k`` are skipped and
    listed.  The first representable entry of ``ranked`` is the ground state.
    """
    if limit < 1:
        raise DomainError(f"candidate limit must be positive, got {limit}")
    fci = FCICurves.build(curves) if oracle else None
    ranked, skipped = [], []
    for n, (alpha, _) in enumerate(configurations_by_energy(curves.orbital_energies, curves.n_electrons)):
        if n >= limit:
            break
        try:
            ranked.append(adiabatic_energy(curves, alpha, fci))
        except CoverageError:
            skipped.append(alpha.orbitals)
    if not ranked:
        raise DomainError("no candidate configuration is covered by the scanned curves; raise k")
    ranked.sort(key=lambda s: s.final_energy)
    return SearchResult(ranked, skipped, lowest_block(curves, fci), None if fci is None else fci.ground)


def derivative_jumps(solution: AdiabaticSolution, curves: EigenCurveSet) -> list[dict]:
    """Slope change of ``E(lam)`` across crossings that involve an occupied curve.

    For each such crossing interval ``[l_p, l_p+1]`` the one-sided slopes of
    the neighbouring intervals are compared.  ``swap_kink`` is the slope
    change the energy would show if the two curves exchanged population at
    the crossing, and ``tolerance`` bounds a smooth function's slope change
    over the same stencil by twice the largest curvature of ``E`` sampled
    just outside it.
    """
    lam, E = solution.lambdas, solution.energy_lambda
    occupied = set(solution.occupied_curves)
    slopes = np.diff(E) / np.diff(lam)
    mids = 0.5 * (lam[1:] + lam[:-1])
    curv = np.abs(np.diff(slopes) / np.diff(mids)) if len(slopes) > 1 else np.zeros(1)
    out = []
    for c in curves.crossings:
        if (c.curve_a in occupied) == (c.curve_b in occupied):
            continue
        p = int(np.searchsorted(lam, c.lam_lo))
        if p < 1 or p + 2 >= len(lam):
            continue
        jump = abs(slopes[p + 1] - slopes[p - 1])
        span = mids[p + 1] - mids[p - 1]
        # curvature sampled outside the stencil, so a kink cannot excuse itself
        outside = np.r_[curv[max(p - 4, 0):max(p - 1, 0)], curv[p + 1:p + 4]]
        tol = 2.0 * span * float(outside.max(initial=0.0))
        a, b = curves.curve(c.curve_a), curves.curve(c.curve_b)
        kink = abs((a[p + 2] - a[p + 1]) / (lam[p + 2] - lam[p + 1]) - (b[p] - b[p - 1]) / (lam[p] - lam[p - 1]))
        kink_b = abs((b[p + 2] - b[p + 1]) / (lam[p + 2] - lam[p + 1]) - (a[p] - a[p - 1]) / (lam[p] - lam[p - 1]))
        out.append({"crossing": c, "jump": float(jump), "tolerance": tol, "swap_kink": float(max(kink, kink_b))})
    return out


def epsilon_sequence(model: LatticeModel, N: int, eps_values, lambdas, alpha0=None, k: int | None = None) -> list[tuple[float, float]]:
    """Final energies of one candidate for a decreasing sequence of ``eps``."""
    alpha0 = tuple(range(1, N + 1)) if alpha0 is None else tuple(alpha0)
    out = []
    for eps in eps_values:
        curves = scan_curves(model, N, eps, lambdas, k)
        out.append((float(eps), adiabatic_energy(curves, alpha0).final_energy))
    return out
