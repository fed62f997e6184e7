"""Numerical triviality test for orthogonality-preserving measurements on a party subset.

For product states |psi_k> = |a_k>_X |b_k>_Xbar, an operator E on X preserves
orthogonality iff <a_k|E|a_l> <b_k|b_l> = 0 for every pair k < l. Each
non-vacuous pair gives one complex linear equation on E. E is parametrized by
D^2 reals: the real matrix P with P[m,m] = E[m,m] and, for m < n,
P[m,n] = Re E[m,n], P[n,m] = Im E[m,n].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.sparse import csr_matrix

from .construction import StateSet
from .states import DEFAULT_TOL, CapExceededError, ProductState, Tolerance

DEFAULT_CAP = 128
MIN_GAP = 1e3
_CHUNK = 4096


@dataclass
class ConstraintSystem:
    X: tuple[int, ...]
    dim_x: int
    rows: csr_matrix
    provenance: list[list[tuple[int, int]]]
    n_states: int
    n_pairs: int
    n_nonvacuous: int

    @property
    def n_params(self) -> int:
        return self.dim_x**2


@dataclass
class HermitianSolutionSpace:
    dim_x: int
    dimension: int
    basis: list[np.ndarray]
    residual: float
    identity_residual: float
    spectral_gap: float
    smallest_kept: float
    largest_discarded: float
    verdict: str
    witness: np.ndarray | None = None

    def summary(self) -> dict:
        return {
            "dim_x": self.dim_x,
            "nullspace_dim": self.dimension,
            "residual": self.residual,
            "identity_residual": self.identity_residual,
            "spectral_gap": self.spectral_gap if math.isfinite(self.spectral_gap) else "inf",
            "verdict": self.verdict,
        }


def _x_part(s: ProductState, X: Sequence[int]) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for t in X:
        out = np.kron(out, s.factors[t - 1])
    return out / np.linalg.norm(out)


def _xbar_gram(states: Sequence[ProductState], Xbar: Sequence[int]) -> np.ndarray:
    gram = np.ones((len(states), len(states)), dtype=complex)
    for t in Xbar:
        fs = np.array([s.factors[t - 1] / np.linalg.norm(s.factors[t - 1]) for s in states])
        gram *= fs.conj() @ fs.T
    return gram


def _param_entries(m: np.ndarray, n: np.ndarray, w: np.ndarray, D: int):
    """Map coefficients w on E[m, n] to (column, complex coefficient) on P."""
    diag = m == n
    up = m < n
    lo = m > n
    cols = np.concatenate(
        [m[diag] * D + m[diag], m[up] * D + n[up], n[up] * D + m[up], n[lo] * D + m[lo], m[lo] * D + n[lo]]
    )
    vals = np.concatenate([w[diag], w[up], 1j * w[up], w[lo], -1j * w[lo]])
    return cols, vals


def assemble_constraints(
    states: Sequence[ProductState],
    X: Sequence[int],
    cap: int = DEFAULT_CAP,
    tol: Tolerance = DEFAULT_TOL,
) -> ConstraintSystem:
    states = list(states)
    X = tuple(sorted(X))
    if not states:
        raise ValueError("no states")
    dims = states[0].dims
    if any(s.dims != dims for s in states):
        raise ValueError("states do not share party dimensions")
    n = len(dims)
    if not X or any(not 1 <= t <= n for t in X):
        raise ValueError(f"invalid party subset {X}")
    D = math.prod(dims[t - 1] for t in X)
    if D > cap:
        raise CapExceededError(f"joint dimension {D} on X={X} exceeds cap {cap}; use the structural checker")
    Xbar = tuple(t for t in range(1, n + 1) if t not in X)
    gram = _xbar_gram(states, Xbar)
    parts = [_x_part(s, X) for s in states]
    supp = [np.flatnonzero(np.abs(a) > tol.abs_zero) for a in parts]

    seen: dict[tuple, int] = {}
    provenance: list[list[tuple[int, int]]] = []
    rr, cc, vv = [], [], []
    n_pairs = n_nonvacuous = 0
    for k in range(len(states)):
        for l in range(k + 1, len(states)):
            n_pairs += 1
            if abs(gram[k, l]) <= tol.abs_zero:
                continue
            n_nonvacuous += 1
            m = np.repeat(supp[k], len(supp[l]))
            nn = np.tile(supp[l], len(supp[k]))
            w = np.conj(parts[k][m]) * parts[l][nn]
            cols, vals = _param_entries(m, nn, w, D)
            order = np.argsort(cols, kind="stable")
            cols, vals = cols[order], vals[order]
            # merge repeated columns, then normalise the phase for deduplication
            ucols, inv = np.unique(cols, return_inverse=True)
            uvals = np.zeros(len(ucols), dtype=complex)
            np.add.at(uvals, inv, vals)
            keep = np.abs(uvals) > tol.abs_zero
            ucols, uvals = ucols[keep], uvals[keep]
            if not len(ucols):
                continue
            uvals = uvals * (abs(uvals[0]) / uvals[0]) / np.linalg.norm(uvals)
            key = (tuple(ucols), tuple(np.round(uvals, 12)))
            if key in seen:
                provenance[seen[key]].append((k, l))
                continue
            seen[key] = len(provenance)
            provenance.append([(k, l)])
            r = 2 * seen[key]
            rr.extend([r] * len(ucols) + [r + 1] * len(ucols))
            cc.extend(list(ucols) * 2)
            vv.extend(list(uvals.real) + list(uvals.imag))
    rows = csr_matrix((vv, (rr, cc)), shape=(2 * len(provenance), D * D))
    rows.eliminate_zeros()
    return ConstraintSystem(X, D, rows, provenance, len(states), n_pairs, n_nonvacuous)


def params_to_matrix(p: np.ndarray, D: int) -> np.ndarray:
    P = np.asarray(p, dtype=float).reshape(D, D)
    upper = np.triu(P, 1) + 1j * np.triu(P.T, 1)
    return np.diag(np.diag(P)).astype(complex) + upper + upper.conj().T


def matrix_to_params(E: np.ndarray) -> np.ndarray:
    D = E.shape[0]
    P = np.diag(np.diag(E).real)
    iu = np.triu_indices(D, 1)
    P[iu] = E[iu].real
    P[(iu[1], iu[0])] = E[iu].imag
    return P.reshape(-1)


def _triangular_factor(rows: csr_matrix) -> np.ndarray:
    """R factor of the row matrix, accumulated chunk by chunk to bound memory."""
    p = rows.shape[1]
    R = np.zeros((0, p))
    for start in range(0, rows.shape[0], _CHUNK):
        block = np.vstack([R, rows[start : start + _CHUNK].toarray()])
        R = scipy.linalg.qr(block, mode="r", check_finite=False)[0][: min(block.shape[0], p)]
    return R


def _orthonormal_hermitian(mats: list[np.ndarray]) -> list[np.ndarray]:
    if not mats:
        return []
    V = np.array([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in mats]).T
    Q, _ = np.linalg.qr(V)
    D = mats[0].shape[0]
    out = []
    for col in Q.T:
        E = (col[: D * D] + 1j * col[D * D :]).reshape(D, D)
        out.append((E + E.conj().T) / 2)
    return out


def solve_nullspace(cs: ConstraintSystem, tol: Tolerance = DEFAULT_TOL, min_gap: float = MIN_GAP) -> HermitianSolutionSpace:
    D, p = cs.dim_x, cs.n_params
    if cs.rows.shape[0]:
        R = _triangular_factor(cs.rows)
        R = np.vstack([R, np.zeros((p - R.shape[0], p))]) if R.shape[0] < p else R
        _, s, vt = scipy.linalg.svd(R, check_finite=False)
    else:
        s, vt = np.zeros(p), np.eye(p)
    top = float(s[0]) if len(s) else 0.0
    rank = int(np.sum(s > tol.rel_nullspace * top)) if top > 0 else 0
    kept = float(s[rank - 1]) if rank else float("inf")
    discarded = float(s[rank]) if rank < p else 0.0
    gap = float(kept / discarded) if discarded > 0 else float("inf")

    null = vt[rank:]
    basis = _orthonormal_hermitian([params_to_matrix(v, D) for v in null])
    A = cs.rows
    residual = max((float(np.max(np.abs(A @ matrix_to_params(E)), initial=0.0)) for E in basis), default=0.0)
    ident = np.eye(D) / math.sqrt(D)
    identity_residual = float(np.max(np.abs(A @ matrix_to_params(ident)), initial=0.0))

    witness = None
    if len(basis) > 1:
        # traceless part of the basis element farthest from the identity
        proj = [E - np.trace(E) / D * np.eye(D) for E in basis]
        witness = max(proj, key=np.linalg.norm)
        witness = witness / np.linalg.norm(witness)
    if gap < min_gap or identity_residual > tol.rel_nullspace:
        verdict = "inconclusive"
    elif len(basis) == 1 and _identity_like(basis[0], tol):
        verdict = "trivial"
    else:
        verdict = "nontrivial"
    return HermitianSolutionSpace(D, len(basis), basis, residual, identity_residual, gap, kept, discarded, verdict, witness)


def _identity_like(E: np.ndarray, tol: Tolerance) -> bool:
    D = E.shape[0]
    dev = E - np.trace(E) / D * np.eye(D)
    return np.linalg.norm(dev) <= tol.rel_nullspace * max(np.linalg.norm(E), 1e-300)


@dataclass
class PartyResult:
    party: int
    X: tuple[int, ...]
    status: str
    rows: int = 0
    pairs: int = 0
    nonvacuous: int = 0
    space: HermitianSolutionSpace | None = None
    message: str = ""

    def as_dict(self) -> dict:
        out = {"party": self.party, "X": list(self.X), "status": self.status, "message": self.message}
        if self.space is not None:
            out.update({"constraint_rows": self.rows, "state_pairs": self.pairs, "nonvacuous_pairs": self.nonvacuous})
            out.update(self.space.summary())
        return out


@dataclass
class NumericalVerdict:
    verdict: str
    parties: dict[int, PartyResult] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"verdict": self.verdict, "parties": {str(i): r.as_dict() for i, r in self.parties.items()}}


def certify_party(
    states: Sequence[ProductState], X: Sequence[int], cap: int = DEFAULT_CAP, tol: Tolerance = DEFAULT_TOL
) -> tuple[ConstraintSystem, HermitianSolutionSpace]:
    cs = assemble_constraints(states, X, cap, tol)
    return cs, solve_nullspace(cs, tol)


def certify_strong_nonlocality_numerical(
    s: StateSet | Sequence[ProductState],
    parties: Sequence[int] | None = None,
    cap: int = DEFAULT_CAP,
    tol: Tolerance = DEFAULT_TOL,
) -> NumericalVerdict:
    states = s.expand() if isinstance(s, StateSet) else list(s)
    n = states[0].n
    parties = list(parties) if parties is not None else list(range(1, n + 1))
    results: dict[int, PartyResult] = {}
    for i in parties:
        X = tuple(t for t in range(1, n + 1) if t != i)
        try:
            cs, space = certify_party(states, X, cap, tol)
        except CapExceededError as exc:
            results[i] = PartyResult(i, X, "skipped", message=str(exc))
            continue
        results[i] = PartyResult(i, X, space.verdict, cs.rows.shape[0], cs.n_pairs, cs.n_nonvacuous, space)
    statuses = {r.status for r in results.values()}
    if "nontrivial" in statuses:
        verdict = "refuted"
    elif "inconclusive" in statuses:
        verdict = "inconclusive"
    elif "skipped" in statuses:
        verdict = "skipped"
    else:
        verdict = "certified"
    return NumericalVerdict(verdict, results)
