"""Brute-force second quantization in the full Fock space (small K only).

Independent of the package's sign bookkeeping: operators are dense
Jordan-Wigner matrices and determinants are built by applying creation
operators to the vacuum.
"""

from functools import lru_cache
from itertools import combinations

import numpy as np


@lru_cache(maxsize=8)
def annihilators(K):
    """``a[k]`` for k = 0..K-1 as dense ``2^K x 2^K`` matrices; bit k <-> orbital k+1."""
    dim = 1 << K
    ops = []
    for k in range(K):
        a = np.zeros((dim, dim))
        for state in range(dim):
            if (state >> k) & 1:
                sign = (-1) ** bin(state & ((1 << k) - 1)).count("1")
                a[state ^ (1 << k), state] = sign
        ops.append(a)
    return tuple(ops)


def fock_state(coefficients, K, N):
    """Embed CI coefficients over lexicographic configurations as a Fock vector.

    Configuration ``(k1 < k2 < ...)`` maps to ``a+_k1 a+_k2 ... |0>``.
    """
    a = annihilators(K)
    vec = np.zeros(1 << K, dtype=complex)
    vacuum = np.zeros(1 << K)
    vacuum[0] = 1.0
    for c, conf in zip(coefficients, combinations(range(K), N)):
        if c == 0:
            continue
        state = vacuum
        for k in reversed(conf):
            state = a[k].T @ state
        vec += c * state
    return vec


def two_rdm(coefficients, K, N):
    """``D[m, n] = <psi| a+_n1 a+_n2 a_m2 a_m1 |psi>`` over flat pairs."""
    a = annihilators(K)
    psi = fock_state(coefficients, K, N)
    pairs = [(i, j) for j in range(K) for i in range(j)]
    removed = [a[m2] @ (a[m1] @ psi) for m1, m2 in pairs]
    G = len(pairs)
    D = np.empty((G, G), dtype=complex)
    for m in range(G):
        for n in range(G):
            D[m, n] = np.vdot(removed[n], removed[m])
    return D


def hamiltonian(h, v_pair, K, N):
    """Number-conserving Hamiltonian restricted to the N-electron sector.

    ``H = sum_pq h_pq a+_p a_q + sum_{p<q} v_pair[p, q] n_p n_q``.
    Returns the matrix over lexicographic configurations.
    """
    a = annihilators(K)
    H = sum(h[p, q] * a[p].T @ a[q] for p in range(K) for q in range(K) if h[p, q] != 0)
    n = [a[p].T @ a[p] for p in range(K)]
    for p in range(K):
        for q in range(p + 1, K):
            if v_pair[p, q] != 0:
                H = H + v_pair[p, q] * n[p] @ n[q]
    confs = list(combinations(range(K), N))
    vectors = np.array([fock_state(np.eye(len(confs))[i], K, N) for i in range(len(confs))]).T
    return vectors.conj().T @ H @ vectors
