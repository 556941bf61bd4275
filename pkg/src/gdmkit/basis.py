"""
Spin-orbital and geminal bookkeeping.

Spin-orbitals are numbered 1..K with K = 2 * n_sites.  Orbital ``k`` lives on
site ``ceil(k / 2)`` (1-based) with spin up for odd ``k`` and spin down for
even ``k``.  Pairs ``(i, j)`` with ``i < j`` are flattened in the order

    (1,2), (1,3), (2,3), (1,4), (2,4), (3,4), ...

i.e. ``pair_index((i, j)) = (j - 1)(j - 2)/2 + i``.  All public indices are
1-based; array positions are ``index - 1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DomainError, PairNotPresentError

UP, DOWN = 0, 1


@dataclass(frozen=True)
class SpinOrbitalBasis:
    """Site-major, spin-minor spin-orbital basis of a 1-D lattice."""

    n_sites: int
    spacing: float = 1.0

    def __post_init__(self):
        if self.n_sites < 1:
            raise DomainError(f"n_sites must be positive, got {self.n_sites}")
        if self.spacing <= 0:
            raise DomainError(f"spacing must be positive, got {self.spacing}")

    @property
    def K(self) -> int:
        return 2 * self.n_sites

    def site(self, k: int) -> int:
        """1-based site of spin-orbital ``k``."""
        self._check(k)
        return (k + 1) // 2

    def spin(self, k: int) -> int:
        """``UP`` (0) for odd ``k``, ``DOWN`` (1) for even ``k``."""
        self._check(k)
        return UP if k % 2 == 1 else DOWN

    def orbital(self, site: int, spin: int) -> int:
        if not 1 <= site <= self.n_sites or spin not in (UP, DOWN):
            raise DomainError(f"no spin-orbital at site={site}, spin={spin}")
        return 2 * site - 1 + spin

    def _check(self, k):
        if not 1 <= k <= self.K:
            raise DomainError(f"spin-orbital {k} outside 1..{self.K}")


@dataclass(frozen=True)
class Configuration:
    """Occupied spin-orbitals of a Slater determinant, strictly increasing."""

    orbitals: tuple[int, ...]

    def __post_init__(self):
        orbs = tuple(int(o) for o in self.orbitals)
        object.__setattr__(self, "orbitals", orbs)
        if any(o < 1 for o in orbs):
            raise DomainError(f"orbital indices are 1-based: {orbs}")
        if any(b <= a for a, b in zip(orbs, orbs[1:])):
            raise DomainError(f"configuration must be strictly increasing: {orbs}")

    @property
    def N(self) -> int:
        return len(self.orbitals)

    def __iter__(self) -> Iterator[int]:
        return iter(self.orbitals)

    def __len__(self) -> int:
        return len(self.orbitals)

    def __contains__(self, k) -> bool:
        return k in self.orbitals

    def __getitem__(self, i):
        return self.orbitals[i]

    def pairs(self) -> list[tuple[int, int]]:
        """All ``N(N-1)/2`` ordered pairs contained in the configuration."""
        return list(itertools.combinations(self.orbitals, 2))

    def bitmask(self) -> int:
        mask = 0
        for o in self.orbitals:
            mask |= 1 << (o - 1)
        return mask

    @classmethod
    def from_bitmask(cls, mask: int) -> "Configuration":
        orbs = []
        k = 1
        while mask:
            if mask & 1:
                orbs.append(k)
            mask >>= 1
            k += 1
        return cls(tuple(orbs))

    def check_range(self, K: int):
        if self.orbitals and self.orbitals[-1] > K:
            raise DomainError(f"configuration {self.orbitals} exceeds K={K}")


def as_configuration(alpha) -> Configuration:
    return alpha if isinstance(alpha, Configuration) else Configuration(tuple(alpha))


def pair_index(pair: Sequence[int], K: int | None = None) -> int:
    """Flat 1-based geminal index of the pair ``(i, j)``, ``i < j``."""
    i, j = (int(p) for p in pair)
    if not 1 <= i < j:
        raise DomainError(f"pair must satisfy 1 <= i < j, got {(i, j)}")
    if K is not None and j > K:
        raise DomainError(f"pair {(i, j)} exceeds K={K}")
    return (j - 1) * (j - 2) // 2 + i


def pair_from_index(n: int, K: int | None = None) -> tuple[int, int]:
    """Inverse of :func:`pair_index`."""
    n = int(n)
    if n < 1 or (K is not None and n > K * (K - 1) // 2):
        raise DomainError(f"geminal index {n} out of range")
    # largest j with (j-1)(j-2)/2 < n
    j = int((3 + np.sqrt(8 * n - 7)) // 2)
    while (j - 1) * (j - 2) // 2 >= n:
        j -= 1
    while (j) * (j - 1) // 2 < n:
        j += 1
    i = n - (j - 1) * (j - 2) // 2
    return i, j


@dataclass(frozen=True)
class GeminalBasis:
    """Antisymmetrized spin-orbital pairs in the canonical flat order."""

    K: int
    pairs: tuple[tuple[int, int], ...] = field(init=False, repr=False)

    def __post_init__(self):
        if self.K < 2:
            raise DomainError(f"need at least two spin-orbitals, got K={self.K}")
        object.__setattr__(self, "pairs", _pair_list(self.K))

    @property
    def G(self) -> int:
        return self.K * (self.K - 1) // 2

    def index(self, pair) -> int:
        return pair_index(pair, self.K)

    def pair(self, n: int) -> tuple[int, int]:
        return pair_from_index(n, self.K)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """0-based orbital arrays ``(first, second)`` over flat indices."""
        return _pair_arrays(self.K)


@lru_cache(maxsize=None)
def _pair_list(K):
    return tuple((i, j) for j in range(2, K + 1) for i in range(1, j))


@lru_cache(maxsize=None)
def _pair_arrays(K):
    pairs = np.array(_pair_list(K), dtype=np.intp) - 1
    first, second = pairs[:, 0].copy(), pairs[:, 1].copy()
    first.flags.writeable = False
    second.flags.writeable = False
    return first, second


def reduced_configuration(alpha, m: Sequence[int]) -> tuple[Configuration, int]:
    """Remove the pair ``m`` from ``alpha``.

    Returns the remaining ``N - 2`` orbitals and the sign
    ``(-1) ** (I[m1] + I[m2] - 1)`` where ``I`` are 1-based positions in
    ``alpha``.  This is the sign of ``a_{m2} a_{m1}`` acting on the
    determinant.
    """
    alpha = as_configuration(alpha)
    m1, m2 = m
    if m1 == m2:
        raise DomainError(f"pair must hold two distinct orbitals, got {tuple(m)}")
    try:
        i1 = alpha.orbitals.index(m1) + 1
        i2 = alpha.orbitals.index(m2) + 1
    except ValueError:
        raise PairNotPresentError(f"pair {tuple(m)} not contained in {alpha.orbitals}") from None
    rest = tuple(o for o in alpha.orbitals if o != m1 and o != m2)
    sign = -1 if (i1 + i2 - 1) % 2 else 1
    return Configuration(rest), sign


def enumerate_configurations(K: int, N: int) -> list[Configuration]:
    """All ``C(K, N)`` configurations in lexicographic order."""
    if not 0 < N <= K:
        raise DomainError(f"need 0 < N <= K, got N={N}, K={K}")
    return [Configuration(c) for c in itertools.combinations(range(1, K + 1), N)]


def n_configurations(K: int, N: int) -> int:
    return comb(K, N)


def configuration_index_map(configs: Iterable[Configuration]) -> dict[tuple[int, ...], int]:
    return {c.orbitals: i for i, c in enumerate(configs)}


def pair_set_is_generable(pairs: Iterable[Sequence[int]], N: int) -> bool:
    """True when the pairs are exactly those of a single N-orbital configuration."""
    pairs = {tuple(sorted(p)) for p in pairs}
    if len(pairs) != N * (N - 1) // 2:
        return False
    orbitals = sorted({o for p in pairs for o in p})
    if len(orbitals) != N:
        return False
    return pairs == set(itertools.combinations(orbitals, 2))
