"""Independent reference computations used to cross-check the package."""

from __future__ import annotations

import itertools

import numpy as np

from sqn.states import ProductState, tensor_expand


def dense_gram(states: list[ProductState]) -> np.ndarray:
    vecs = np.array([tensor_expand(s) for s in states])
    return vecs.conj() @ vecs.T


def hermitian_basis(D: int) -> list[np.ndarray]:
    """Real-linear basis of D x D Hermitian matrices (generalized Gell-Mann plus diagonal units)."""
    out = []
    for m in range(D):
        e = np.zeros((D, D), dtype=complex)
        e[m, m] = 1
        out.append(e)
    for m, n in itertools.combinations(range(D), 2):
        s = np.zeros((D, D), dtype=complex)
        s[m, n] = s[n, m] = 1
        a = np.zeros((D, D), dtype=complex)
        a[m, n], a[n, m] = -1j, 1j
        out += [s, a]
    return out


def dense_solution_dimension(states: list[ProductState], X: tuple[int, ...], rtol: float = 1e-9) -> tuple[int, np.ndarray]:
    """Dimension of {E Hermitian : <psi_k|(I x E)|psi_l> = 0 for k != l} by brute force.

    Returns the dimension and one solution matrix from the nullspace.
    """
    n = states[0].n
    dims = states[0].dims
    Xbar = [t for t in range(1, n + 1) if t not in X]
    order = [t - 1 for t in Xbar] + [t - 1 for t in X]
    Dx = int(np.prod([dims[t - 1] for t in X]))
    mats = []
    for s in states:
        v = tensor_expand(s).reshape(dims).transpose(order).reshape(-1, Dx)
        mats.append(v)
    basis = hermitian_basis(Dx)
    M = np.array(mats)
    C = np.einsum("kxi,lxj->klij", M.conj(), M)
    off = ~np.eye(len(states), dtype=bool)
    C = C[off]
    C = C[np.abs(C).reshape(len(C), -1).max(axis=1) > 0]
    if not len(C):
        return len(basis), np.eye(Dx)
    # row entry for basis element H is sum_ab C[a, b] H[b, a]
    H = np.array(basis)
    A = np.einsum("kab,rba->kr", C, H)
    A = np.vstack([A.real, A.imag])
    _, sv, vh = np.linalg.svd(A, full_matrices=A.shape[0] < A.shape[1])
    rank = int(np.sum(sv > rtol * sv[0]))
    null = vh[rank:]
    sol = np.einsum("r,rab->ab", null[0], H) if len(null) else np.zeros((Dx, Dx))
    return len(basis) - rank, sol
