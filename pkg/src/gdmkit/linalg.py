"""Small dense linear-algebra helpers shared by the propagators."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment


def unitary_step(H: np.ndarray, dt: float) -> np.ndarray:
    """``exp(-i H dt)`` for Hermitian ``H`` via its eigendecomposition.

    Exactly unitary up to rounding, which a Taylor or Pade exponential
    does not guarantee.
    """
    E, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * E * dt)) @ V.conj().T


def skew_step(M: np.ndarray, dt: float) -> np.ndarray:
    """``exp(-M dt)`` for skew-Hermitian ``M``."""
    # M = i A with A = -i M Hermitian, so exp(-M dt) = exp(-i A dt)
    return unitary_step(-1j * np.asarray(M), dt)


def conjugate(U: np.ndarray, D: np.ndarray) -> np.ndarray:
    return U @ D @ U.conj().T


def match_states(V_ref: np.ndarray, V_new: np.ndarray):
    """Assign columns of ``V_new`` to columns of ``V_ref`` by maximal |overlap|.

    Returns ``(perm, overlaps)`` where column ``perm[i]`` of ``V_new``
    continues column ``i`` of ``V_ref`` and ``overlaps[i]`` is the absolute
    overlap of that match.
    """
    S = np.abs(V_ref.conj().T @ V_new)
    rows, cols = linear_sum_assignment(-S)
    perm = np.empty(S.shape[0], dtype=np.intp)
    perm[rows] = cols
    return perm, S[np.arange(S.shape[0]), perm]


def match_margins(V_ref: np.ndarray, V_new: np.ndarray, perm: np.ndarray) -> np.ndarray:
    """How clearly each match beats the runner-up.

    ``margins[i]`` is the matched |overlap| of column ``i`` minus its
    largest |overlap| with any other column of ``V_new``.  Never exceeds
    the matched overlap itself.
    """
    S = np.abs(V_ref.conj().T @ V_new)
    rows = np.arange(S.shape[0])
    matched = S[rows, perm]
    S[rows, perm] = -np.inf
    return matched - S.max(axis=1, initial=0.0)


def align_phases(V_ref: np.ndarray, V_new: np.ndarray) -> np.ndarray:
    """Rephase columns of ``V_new`` so each overlap with ``V_ref`` is real positive."""
    ov = np.einsum("ij,ij->j", V_ref.conj(), V_new)
    phase = np.where(np.abs(ov) > 0, ov / np.maximum(np.abs(ov), 1e-300), 1.0)
    return V_new * phase.conj()[None, :]


def degenerate_groups(E: np.ndarray, rel_tol: float = 1e-8) -> list[list[int]]:
    """Group sorted eigenvalues whose gap is below ``rel_tol`` times the spectral range."""
    E = np.asarray(E)
    if E.size == 0:
        return []
    scale = max(float(E.max() - E.min()), 1e-300)
    groups = [[0]]
    for i in range(1, E.size):
        if E[i] - E[i - 1] < rel_tol * scale:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups
