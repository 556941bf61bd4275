"""
Finite 1-D lattice models and the effective two-electron Hamiltonian.

A model is a chain of ``n_sites`` sites at positions ``0, d, 2d, ...`` with a
finite-difference kinetic term, softened attraction to point nuclei, a
position-diagonal electron-electron interaction and a seeded random one-body
perturbation ``v_p`` that breaks every lattice and spin symmetry.

The pair Hamiltonian acting on antisymmetrized spin-orbital pairs is

    H(eps, lam) = [h + eps * v_p]_pair / (N - 1) + lam * V

where ``[.]_pair`` promotes a one-body matrix to pairs and ``V`` is diagonal
with entries ``v(site(a1), site(a2))``.  With this normalization
``Tr[D H]`` is the total N-electron energy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .basis import GeminalBasis, SpinOrbitalBasis
from .errors import DomainError

INTERACTIONS = ("soft_coulomb", "hubbard", "none")


@dataclass(frozen=True)
class Nucleus:
    charge: float
    position: float
    mobile: bool = False
    mass: float = 1836.15267343


@dataclass(frozen=True)
class Interaction:
    type: str = "soft_coulomb"
    strength: float = 1.0

    def __post_init__(self):
        if self.type not in INTERACTIONS:
            raise DomainError(f"unknown interaction type {self.type!r}; expected one of {INTERACTIONS}")


@dataclass(frozen=True, eq=False)
class LatticeModel:
    """Immutable lattice model; all matrices are derived lazily and cached.

    ``h`` is the spin-orbital one-body matrix (K x K) for the stored nuclear
    positions, ``v_p`` the diagonal of the perturbation (length K) and
    ``v_sites`` the site-pair interaction table.
    """

    n_sites: int
    spacing: float = 1.0
    softening: float = 1.0
    nuclei: tuple[Nucleus, ...] = ()
    interaction: Interaction = field(default_factory=Interaction)
    perturbation_seed: int = 0

    def __post_init__(self):
        if self.n_sites < 2:
            raise DomainError(f"n_sites must be >= 2, got {self.n_sites}")
        if not self.spacing > 0:
            raise DomainError(f"spacing must be positive, got {self.spacing}")
        if not self.softening > 0:
            raise DomainError(f"softening must be positive, got {self.softening}")
        for nuc in self.nuclei:
            if nuc.mobile and not nuc.mass > 0:
                raise DomainError(f"mobile nucleus needs positive mass, got {nuc.mass}")
        object.__setattr__(self, "nuclei", tuple(self.nuclei))

    @property
    def basis(self) -> SpinOrbitalBasis:
        return SpinOrbitalBasis(self.n_sites, self.spacing)

    @property
    def K(self) -> int:
        return 2 * self.n_sites

    @property
    def geminal_basis(self) -> GeminalBasis:
        return GeminalBasis(self.K)

    @cached_property
    def site_positions(self) -> np.ndarray:
        return self.spacing * np.arange(self.n_sites, dtype=float)

    @property
    def hopping(self) -> float:
        """Nearest-neighbour hopping amplitude ``t = 1 / (2 d^2)``."""
        return 0.5 / self.spacing**2

    @property
    def nuclear_positions(self) -> np.ndarray:
        return np.array([n.position for n in self.nuclei], dtype=float)

    @property
    def nuclear_charges(self) -> np.ndarray:
        return np.array([n.charge for n in self.nuclei], dtype=float)

    def kinetic_sites(self) -> np.ndarray:
        n, t = self.n_sites, self.hopping
        T = np.diag(np.full(n, 2 * t))
        idx = np.arange(n - 1)
        T[idx, idx + 1] = T[idx + 1, idx] = -t
        return T

    def attraction_sites(self, positions=None) -> np.ndarray:
        """Diagonal nuclear attraction per site, ``-sum_k Z_k / sqrt((x-R_k)^2 + s^2)``."""
        R = self.nuclear_positions if positions is None else np.asarray(positions, float)
        if R.size == 0:
            return np.zeros(self.n_sites)
        dx = self.site_positions[:, None] - R[None, :]
        return -(self.nuclear_charges[None, :] / np.sqrt(dx**2 + self.softening**2)).sum(axis=1)

    def attraction_gradient(self, positions=None) -> np.ndarray:
        """``d/dR_k`` of the per-site attraction; shape ``(n_nuclei, n_sites)``."""
        R = self.nuclear_positions if positions is None else np.asarray(positions, float)
        dx = self.site_positions[None, :] - R[:, None]
        # d/dR [-Z / sqrt(dx^2 + s^2)] with dx = x - R
        return -self.nuclear_charges[:, None] * dx / (dx**2 + self.softening**2) ** 1.5

    def one_body_sites(self, positions=None) -> np.ndarray:
        return self.kinetic_sites() + np.diag(self.attraction_sites(positions))

    def one_body(self, positions=None) -> np.ndarray:
        """Spin-orbital one-body matrix ``h`` (spin-diagonal)."""
        if positions is None:
            return self.h
        return np.kron(self.one_body_sites(positions), np.eye(2))

    @cached_property
    def h(self) -> np.ndarray:
        h = np.kron(self.one_body_sites(), np.eye(2))
        h.flags.writeable = False
        return h

    @cached_property
    def v_p(self) -> np.ndarray:
        """Seeded perturbation, one uniform [-1, 1] value per spin-orbital."""
        rng = np.random.default_rng(self.perturbation_seed)
        v = rng.uniform(-1.0, 1.0, size=self.K)
        v.flags.writeable = False
        return v

    @cached_property
    def v_sites(self) -> np.ndarray:
        kind, g = self.interaction.type, self.interaction.strength
        n = self.n_sites
        if kind == "hubbard":
            v = g * np.eye(n)
        elif kind == "soft_coulomb":
            dx = self.site_positions[:, None] - self.site_positions[None, :]
            v = g / np.sqrt(dx**2 + self.softening**2)
        else:
            v = np.zeros((n, n))
        v.flags.writeable = False
        return v

    def nuclear_repulsion(self, positions=None) -> float:
        R = self.nuclear_positions if positions is None else np.asarray(positions, float)
        Z = self.nuclear_charges
        e = 0.0
        for i in range(len(R)):
            for j in range(i + 1, len(R)):
                e += Z[i] * Z[j] / np.sqrt((R[i] - R[j]) ** 2 + self.softening**2)
        return e

    def nuclear_repulsion_gradient(self, positions=None) -> np.ndarray:
        R = self.nuclear_positions if positions is None else np.asarray(positions, float)
        Z = self.nuclear_charges
        g = np.zeros(len(R))
        for i in range(len(R)):
            for j in range(len(R)):
                if i != j:
                    dR = R[i] - R[j]
                    g[i] -= Z[i] * Z[j] * dR / (dR**2 + self.softening**2) ** 1.5
        return g

    def with_positions(self, positions: Sequence[float]) -> "LatticeModel":
        nuclei = tuple(replace(n, position=float(r)) for n, r in zip(self.nuclei, positions))
        return replace(self, nuclei=nuclei)

    def with_seed(self, seed: int) -> "LatticeModel":
        return replace(self, perturbation_seed=int(seed))

    def to_dict(self) -> dict:
        return {
            "n_sites": self.n_sites,
            "spacing": self.spacing,
            "softening": self.softening,
            "nuclei": [
                {"charge": n.charge, "position": n.position, "mobile": n.mobile, "mass": n.mass}
                for n in self.nuclei
            ],
            "interaction": {"type": self.interaction.type, "strength": self.interaction.strength},
            "perturbation_seed": self.perturbation_seed,
        }


def build_model(config: dict) -> LatticeModel:
    """Validate a model description (as loaded from JSON) and build the model."""
    if not isinstance(config, dict):
        raise DomainError("model description must be a JSON object")
    known = {"n_sites", "spacing", "softening", "nuclei", "interaction", "perturbation_seed"}
    unknown = set(config) - known
    if unknown:
        raise DomainError(f"unknown model fields: {sorted(unknown)}")
    if "n_sites" not in config:
        raise DomainError("model description lacks 'n_sites'")
    try:
        n_sites = config["n_sites"]
        if isinstance(n_sites, bool) or int(n_sites) != n_sites:
            raise DomainError(f"n_sites must be an integer, got {n_sites!r}")
        nuclei = []
        for raw in config.get("nuclei", []):
            nuclei.append(
                Nucleus(
                    charge=float(raw["charge"]),
                    position=float(raw["position"]),
                    mobile=bool(raw.get("mobile", False)),
                    mass=float(raw.get("mass", Nucleus.mass)),
                )
            )
        inter = config.get("interaction", {"type": "none", "strength": 0.0})
        interaction = Interaction(str(inter.get("type", "soft_coulomb")), float(inter.get("strength", 1.0)))
        return LatticeModel(
            n_sites=int(n_sites),
            spacing=float(config.get("spacing", 1.0)),
            softening=float(config.get("softening", 1.0)),
            nuclei=tuple(nuclei),
            interaction=interaction,
            perturbation_seed=int(config.get("perturbation_seed", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"malformed model description: {exc}") from exc


def load_model(path) -> LatticeModel:
    try:
        config = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: invalid JSON ({exc})") from exc
    return build_model(config)


def promote_one_body(h: np.ndarray) -> np.ndarray:
    """Matrix of ``h(1) + h(2)`` between normalized antisymmetric pairs.

    Two-electron Slater-Condon rules in closed form: for pairs
    ``a = (a1, a2)`` and ``b = (b1, b2)``

        h[a1,b1] d[a2,b2] - h[a1,b2] d[a2,b1] - h[a2,b1] d[a1,b2] + h[a2,b2] d[a1,b1]
    """
    h = np.asarray(h)
    K = h.shape[0]
    a1, a2 = GeminalBasis(K).arrays()
    eye = np.eye(K)
    A1, B1 = a1[:, None], a1[None, :]
    A2, B2 = a2[:, None], a2[None, :]
    return (
        h[A1, B1] * eye[A2, B2]
        - h[A1, B2] * eye[A2, B1]
        - h[A2, B1] * eye[A1, B2]
        + h[A2, B2] * eye[A1, B1]
    )


def pair_interaction(model: LatticeModel) -> np.ndarray:
    """Diagonal of the two-body term over flat pair indices."""
    a1, a2 = model.geminal_basis.arrays()
    return model.v_sites[a1 // 2, a2 // 2].copy()


@dataclass(frozen=True, eq=False)
class TwoElectronHamiltonian:
    matrix: np.ndarray
    n_electrons: int
    epsilon: float
    lam: float
    basis_tag: str = "site"

    @property
    def G(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class GeminalParts:
    """``H(eps, lam) = base + eps * perturbation + lam * interaction``."""

    base: np.ndarray
    perturbation: np.ndarray
    interaction: np.ndarray
    n_electrons: int

    def at(self, eps: float, lam: float) -> np.ndarray:
        return self.base + eps * self.perturbation + lam * self.interaction


def geminal_parts(model: LatticeModel, N: int, positions=None) -> GeminalParts:
    if N < 2:
        raise DomainError(f"the pair Hamiltonian needs N >= 2 electrons, got N={N}")
    if N > model.K:
        raise DomainError(f"N={N} electrons do not fit in K={model.K} spin-orbitals")
    scale = 1.0 / (N - 1)
    base = promote_one_body(model.one_body(positions)) * scale
    pert = promote_one_body(np.diag(model.v_p)) * scale
    inter = np.diag(pair_interaction(model))
    return GeminalParts(base, pert, inter, N)


def geminal_hamiltonian(model: LatticeModel, N: int, eps: float, lam: float, positions=None) -> TwoElectronHamiltonian:
    """Effective two-electron Hamiltonian over the flat pair basis."""
    parts = geminal_parts(model, N, positions)
    return TwoElectronHamiltonian(parts.at(eps, lam), N, float(eps), float(lam))


def helium_scaling(Z: float, N: int) -> tuple[float, float, float]:
    """Return ``(a, lam, prefactor)`` mapping a (Z, N) atom onto scaled helium.

    ``a = Z/2``, ``lam = 2(N-1)/Z`` and ``prefactor = (Z/2)^2 / (N-1)``.
    """
    if not Z > 0:
        raise DomainError(f"nuclear charge must be positive, got {Z}")
    if N < 2:
        raise DomainError(f"need N >= 2 electrons, got {N}")
    a = Z / 2
    return a, 2 * (N - 1) / Z, a**2 / (N - 1)


def verify_scaling_identity(T, U, W, Z: float, N: int) -> float:
    """Residual of the atom-to-helium mapping as a matrix identity.

    ``T``, ``U`` and ``W`` are the kinetic, unit-charge nuclear attraction
    and electron-electron matrices in some basis.  Under the scaling
    ``r -> a r`` the helium-form operators have matrices ``T/a^2``, ``U/a``
    and ``W/a`` in the same basis.  Returns the Frobenius norm of

        (T - Z U)/(N - 1) + W - prefactor * (T/a^2 - 2 U/a + lam W/a)
    """
    T, U, W = (np.asarray(m) for m in (T, U, W))
    if not (T.ndim == 2 and T.shape[0] == T.shape[1] and T.shape == U.shape == W.shape):
        raise DomainError(f"T, U, W must be square and equal-sized, got {T.shape}, {U.shape}, {W.shape}")
    a, lam, pref = helium_scaling(Z, N)
    lhs = (T - Z * U) / (N - 1) + W
    rhs = pref * (T / a**2 - 2 * U / a + lam * W / a)
    return float(np.linalg.norm(lhs - rhs))


def default_model() -> LatticeModel:
    """Six-site, three-electron soft-Coulomb chain (K=12, G=66)."""
    from importlib import resources

    text = resources.files("gdmkit.models").joinpath("default.json").read_text()
    return build_model(json.loads(text))
