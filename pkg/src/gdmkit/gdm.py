"""
Geminal density matrices.

The GDM of an N-electron state is ``D[m, n] = <a+_n a_m>`` over flat pair
indices, where ``a_m = a_{m2} a_{m1}`` removes the pair ``m = (m1, m2)``.
With this convention ``<A> = Tr[D A]`` for any pair operator ``A`` with
matrix elements ``A[n, m] = <n|A|m>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .basis import (
    Configuration,
    GeminalBasis,
    as_configuration,
    enumerate_configurations,
    pair_index,
    pair_set_is_generable,
)
from .errors import BasisTagError, DomainError

SITE_BASIS = "site"

HERMITIAN_TOL = 1e-12
PHYSICAL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GDM:
    matrix: np.ndarray
    n_electrons: int
    basis_tag: str = SITE_BASIS

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"GDM must be a square matrix, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)

    @property
    def G(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_pairs(self) -> int:
        return self.n_electrons * (self.n_electrons - 1) // 2

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def trace_sq(self) -> float:
        m = self.matrix
        return float(np.vdot(m.conj().T, m).real)

    def with_matrix(self, matrix, basis_tag=None) -> "GDM":
        return GDM(matrix, self.n_electrons, self.basis_tag if basis_tag is None else basis_tag)


@dataclass(frozen=True, eq=False)
class CIVector:
    """Coefficients over ``enumerate_configurations(n_orbitals, n_electrons)``."""

    coefficients: np.ndarray
    n_electrons: int
    n_orbitals: int

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex).ravel()
        expected = comb(self.n_orbitals, self.n_electrons)
        if c.size != expected:
            raise DomainError(f"expected {expected} coefficients for K={self.n_orbitals}, N={self.n_electrons}; got {c.size}")
        object.__setattr__(self, "coefficients", c)

    @property
    def configurations(self) -> list[Configuration]:
        return enumerate_configurations(self.n_orbitals, self.n_electrons)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))

    def normalized(self) -> "CIVector":
        return CIVector(self.coefficients / self.norm(), self.n_electrons, self.n_orbitals)

    @classmethod
    def from_configurations(cls, amplitudes: dict, K: int) -> "CIVector":
        """Build from ``{configuration: amplitude}``; not normalized."""
        amplitudes = {as_configuration(k): v for k, v in amplitudes.items()}
        Ns = {c.N for c in amplitudes}
        if len(Ns) != 1:
            raise DomainError("all configurations must have the same electron count")
        N = Ns.pop()
        index = _config_index(K, N)
        c = np.zeros(comb(K, N), dtype=complex)
        for conf, amp in amplitudes.items():
            conf.check_range(K)
            c[index[conf.orbitals]] += amp
        return cls(c, N, K)

    @classmethod
    def single(cls, alpha, K: int) -> "CIVector":
        return cls.from_configurations({as_configuration(alpha): 1.0}, K)


@lru_cache(maxsize=None)
def _config_index(K, N):
    if N == 0:
        return {(): 0}
    return {c.orbitals: i for i, c in enumerate(enumerate_configurations(K, N))}


@lru_cache(maxsize=32)
def _pair_extraction(K, N):
    """Sparse map (configuration, pair) -> (reduced configuration, sign).

    Returns flat arrays ``(conf, red, pair, sign)`` with one entry per pair
    contained in each configuration.
    """
    reduced_index = _config_index(K, N - 2)
    conf_i, red_i, pair_i, sign = [], [], [], []
    for ci, conf in enumerate(enumerate_configurations(K, N)):
        orbs = conf.orbitals
        for p in range(N):
            for q in range(p + 1, N):
                rest = orbs[:p] + orbs[p + 1:q] + orbs[q + 1:]
                conf_i.append(ci)
                red_i.append(reduced_index[rest])
                pair_i.append(pair_index((orbs[p], orbs[q])) - 1)
                # 1-based positions p+1, q+1: (-1)^(p+1 + q+1 - 1)
                sign.append(-1.0 if (p + q + 1) % 2 else 1.0)
    arrays = tuple(np.array(a) for a in (conf_i, red_i, pair_i, sign))
    for a in arrays:
        a.flags.writeable = False
    return arrays


def gdm_from_ci(psi: CIVector, tol: float = PHYSICAL_TOL) -> GDM:
    """GDM of a CI vector in the spin-orbital Slater-pair basis.

    ``D[m, n] = sum_r A[r, m] conj(A[r, n])`` where ``A[r, m] = C_alpha S_alpha[m]``
    for the configuration ``alpha = r + m`` obtained by adding the pair
    ``m`` to the (N-2)-electron reduced configuration ``r``.
    """
    K, N = psi.n_orbitals, psi.n_electrons
    if N < 2:
        raise DomainError(f"a GDM needs at least two electrons, got N={N}")
    norm2 = float(np.vdot(psi.coefficients, psi.coefficients).real)
    if abs(norm2 - 1.0) > tol:
        raise DomainError(f"CI vector is not normalized: |C|^2 = {norm2!r}")
    conf_i, red_i, pair_i, sign = _pair_extraction(K, N)
    A = np.zeros((comb(K, N - 2), K * (K - 1) // 2), dtype=complex)
    A[red_i, pair_i] = psi.coefficients[conf_i] * sign
    return GDM(A.T @ A.conj(), N)


def slater_gdm(alpha, K: int) -> GDM:
    """GDM of a single configuration: ones at the contained pairs."""
    alpha = as_configuration(alpha)
    alpha.check_range(K)
    G = K * (K - 1) // 2
    D = np.zeros((G, G), dtype=complex)
    for pair in alpha.pairs():
        n = pair_index(pair) - 1
        D[n, n] = 1.0
    return GDM(D, alpha.N)


def diagonal_gdm(flat_indices, N: int, K: int, basis_tag: str = SITE_BASIS) -> GDM:
    """Diagonal GDM with ones at the given 1-based flat indices."""
    G = K * (K - 1) // 2
    D = np.zeros((G, G), dtype=complex)
    for n in flat_indices:
        D[int(n) - 1, int(n) - 1] = 1.0
    return GDM(D, N, basis_tag)


def pair_compound(C: np.ndarray) -> np.ndarray:
    """Pair-space image of a one-body basis change.

    Column ``(a, b)`` of the result holds the amplitudes of the normalized
    antisymmetric pair built from orbitals ``C[:, a]`` and ``C[:, b]``:
    ``C[p, a] C[q, b] - C[p, b] C[q, a]`` at row ``(p, q)``.  Unitary when
    ``C`` is.
    """
    C = np.asarray(C)
    K = C.shape[0]
    p, q = GeminalBasis(K).arrays()
    a, b = GeminalBasis(C.shape[1]).arrays()
    return C[p][:, a] * C[q][:, b] - C[p][:, b] * C[q][:, a]


def one_rdm(D: GDM, K: int | None = None) -> np.ndarray:
    """Contract a Slater-pair-basis GDM to the 1-RDM ``g[p, q] = <a+_q a_p>``."""
    _require_tag(D, SITE_BASIS)
    N = D.n_electrons
    if K is None:
        K = int(round((1 + np.sqrt(1 + 8 * D.G)) / 2))
    first, second = GeminalBasis(K).arrays()
    idx = np.full((K, K), -1, dtype=np.intp)
    idx[first, second] = np.arange(D.G)
    idx[second, first] = np.arange(D.G)
    sgn = np.where(np.arange(K)[:, None] < np.arange(K)[None, :], 1.0, -1.0)
    gamma = np.zeros((K, K), dtype=complex)
    M = D.matrix
    for r in range(K):
        rows = idx[:, r]
        ok = rows >= 0
        sub = M[np.ix_(rows[ok], rows[ok])]
        s = sgn[ok, r]
        gamma[np.ix_(ok, ok)] += s[:, None] * sub * s[None, :]
    return gamma / (N - 1)


@dataclass
class RuleResult:
    name: str
    residual: float
    passed: bool | None
    note: str = ""

    @property
    def verdict(self) -> str:
        return {True: "pass", False: "FAIL", None: "n/a"}[self.passed]


@dataclass
class NRepReport:
    """Outcome of the necessary N-representability checks.

    A passing report does not certify N-representability.
    """

    rules: list[RuleResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed is not False for r in self.rules)

    def failed(self) -> list[RuleResult]:
        return [r for r in self.rules if r.passed is False]

    def __getitem__(self, name) -> RuleResult:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)

    def lines(self) -> list[str]:
        out = [f"{r.name:<14} {r.verdict:<5} residual={r.residual:.3e}" + (f"  {r.note}" if r.note else "") for r in self.rules]
        out.append(f"{'overall':<14} {'pass' if self.passed else 'FAIL'}")
        return out

    def to_dict(self) -> dict:
        return {
            "rules": [{"name": r.name, "residual": r.residual, "verdict": r.verdict, "note": r.note} for r in self.rules],
            "passed": self.passed,
        }


def check_nrep(D: GDM, oracle: bool = False, tol: float = PHYSICAL_TOL) -> NRepReport:
    """Evaluate the cheap necessary rules, optionally with oracle cross-checks.

    Cheap rules: Hermiticity, ``0 <= D_nn <= 1``, ``Tr D = N(N-1)/2``,
    ``0 <= Tr D^2 <= N(N-1)/2`` and the exclusion rule (a unit diagonal
    entry forces the rest of its row and column to zero).

    The oracle adds positive semidefiniteness of ``D``, Pauli bounds on the
    contracted 1-RDM and, for 0/1-diagonal matrices in the Slater-pair
    basis, generability of the occupied pair set by one configuration.
    """
    M = np.asarray(D.matrix)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"GDM must be square, got {M.shape}")
    N = D.n_electrons
    npairs = N * (N - 1) / 2
    report = NRepReport()

    herm = float(np.linalg.norm(M - M.conj().T))
    report.rules.append(RuleResult("hermitian", herm, herm <= tol))

    diag = np.diag(M)
    occ = max(0.0, float(-diag.real.min()), float(diag.real.max() - 1.0), float(np.abs(diag.imag).max()))
    report.rules.append(RuleResult("occupation", occ, occ <= tol))

    tr = abs(float(diag.real.sum()) - npairs)
    report.rules.append(RuleResult("trace", tr, tr <= tol))

    tr2 = float(np.vdot(M.conj().T, M).real)
    excess = max(0.0, -tr2, tr2 - npairs)
    report.rules.append(RuleResult("trace_squared", excess, excess <= tol, f"Tr[D^2]={tr2:.12g}"))

    full = np.abs(diag.real - 1.0) <= tol
    off = np.abs(M.copy())
    np.fill_diagonal(off, 0.0)
    excl = float(max(off[full].max(initial=0.0), off[:, full].max(initial=0.0)))
    report.rules.append(RuleResult("exclusion", excl, excl <= tol))

    if oracle:
        report.rules.extend(_oracle_rules(D, tol))
    return report


def _oracle_rules(D: GDM, tol: float) -> list[RuleResult]:
    M = 0.5 * (D.matrix + D.matrix.conj().T)
    N = D.n_electrons
    rules = []
    w = np.linalg.eigvalsh(M)
    psd = max(0.0, float(-w.min()))
    rules.append(RuleResult("psd", psd, psd <= tol))

    if D.basis_tag != SITE_BASIS:
        rules.append(RuleResult("pauli", 0.0, None, "needs Slater-pair basis"))
        rules.append(RuleResult("generability", 0.0, None, "needs Slater-pair basis"))
        return rules
    K = int(round((1 + np.sqrt(1 + 8 * D.G)) / 2))
    occ = np.linalg.eigvalsh(0.5 * (one_rdm(D, K) + one_rdm(D, K).conj().T))
    pauli = max(0.0, float(-occ.min()), float(occ.max() - 1.0))
    rules.append(RuleResult("pauli", pauli, pauli <= tol, f"1-RDM occupations in [{occ.min():.6g}, {occ.max():.6g}]"))

    diag = np.diag(M).real
    off = M - np.diag(np.diag(M))
    zero_one = np.all((np.abs(diag) <= tol) | (np.abs(diag - 1) <= tol)) and np.abs(off).max(initial=0.0) <= tol
    if not zero_one:
        rules.append(RuleResult("generability", 0.0, None, "applies to 0/1 diagonal matrices only"))
        return rules
    occupied = [GeminalBasis(K).pair(n + 1) for n in np.flatnonzero(np.abs(diag - 1) <= tol)]
    ok = pair_set_is_generable(occupied, N)
    orbitals = sorted({o for p in occupied for o in p})
    note = f"pairs {occupied} span orbitals {orbitals}"
    rules.append(RuleResult("generability", 0.0 if ok else float(len(orbitals) - N), ok, note))
    return rules


def _require_tag(D, tag):
    if D.basis_tag != tag:
        raise BasisTagError(f"expected a GDM in basis {tag!r}, got {D.basis_tag!r}")


def expectation(D: GDM, A) -> complex:
    """``Tr[D A]``; ``A`` may carry a ``basis_tag`` that must match ``D``."""
    tag = getattr(A, "basis_tag", None)
    if tag is not None and tag != D.basis_tag:
        raise BasisTagError(f"operator basis {tag!r} differs from GDM basis {D.basis_tag!r}")
    A = np.asarray(getattr(A, "matrix", A))
    if A.shape != D.matrix.shape:
        raise DomainError(f"operator shape {A.shape} differs from GDM shape {D.matrix.shape}")
    # Tr[D A] = sum_mn D_mn A_nm
    return complex(np.sum(D.matrix * A.T))


def change_basis(D: GDM, U: np.ndarray, basis_tag: str | None = None, tol: float = PHYSICAL_TOL) -> GDM:
    """``D' = U D U^dagger``."""
    U = np.asarray(U)
    if U.shape != D.matrix.shape:
        raise DomainError(f"transformation shape {U.shape} differs from GDM shape {D.matrix.shape}")
    err = float(np.linalg.norm(U @ U.conj().T - np.eye(U.shape[0])))
    if err > tol:
        raise DomainError(f"transformation is not unitary (|U U^+ - 1| = {err:.3e})")
    return D.with_matrix(U @ D.matrix @ U.conj().T, basis_tag)


def density_operators(K: int, N: int) -> np.ndarray:
    """Diagonals of the pair-space density operators, shape ``(K, G)``.

    Row ``p`` holds ``([a1 == p] + [a2 == p]) / (N - 1)`` so that
    ``Tr[D rho_p]`` is the occupation of spin-orbital ``p``.
    """
    first, second = GeminalBasis(K).arrays()
    rho = np.zeros((K, len(first)))
    cols = np.arange(len(first))
    rho[first, cols] += 1.0
    rho[second, cols] += 1.0
    return rho / (N - 1)


def gdm_density(D: GDM, K: int | None = None) -> np.ndarray:
    """Spin-orbital occupations ``Tr[D rho_p]`` of a Slater-pair-basis GDM."""
    _require_tag(D, SITE_BASIS)
    if K is None:
        K = int(round((1 + np.sqrt(1 + 8 * D.G)) / 2))
    return density_operators(K, D.n_electrons) @ np.diag(D.matrix).real
