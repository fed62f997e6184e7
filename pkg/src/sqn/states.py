"""Local vectors, product states and the shared tolerance policy.

States are kept unnormalized throughout. Local vectors come from four label
kinds: ``zero`` (|0>), ``top`` (|d-1>), ``alpha`` (Fourier vectors on levels
0..d-2) and ``beta`` (Fourier vectors on levels 1..d-1).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

# dense expansion limit for tensor_expand (number of amplitudes)
DEFAULT_EXPAND_CAP = 1 << 22


class InvalidLabelError(ValueError):
    pass


class DimensionMismatchError(ValueError):
    pass


class CapExceededError(ValueError):
    pass


class Kind(str, Enum):
    ZERO = "zero"
    TOP = "top"
    ALPHA = "alpha"
    BETA = "beta"

    @property
    def spread(self) -> bool:
        return self in (Kind.ALPHA, Kind.BETA)

    @property
    def zero_like(self) -> bool:
        return self in (Kind.ZERO, Kind.ALPHA)

    def flipped(self) -> "Kind":
        return _FLIP[self]


_FLIP = {Kind.ZERO: Kind.TOP, Kind.TOP: Kind.ZERO, Kind.ALPHA: Kind.BETA, Kind.BETA: Kind.ALPHA}


@dataclass(frozen=True)
class LocalLabel:
    kind: Kind
    k: int = 0

    @classmethod
    def zero(cls) -> "LocalLabel":
        return cls(Kind.ZERO)

    @classmethod
    def top(cls) -> "LocalLabel":
        return cls(Kind.TOP)

    @classmethod
    def alpha(cls, k: int) -> "LocalLabel":
        return cls(Kind.ALPHA, k)

    @classmethod
    def beta(cls, k: int) -> "LocalLabel":
        return cls(Kind.BETA, k)

    def validate(self, d: int) -> None:
        if d < 3:
            raise InvalidLabelError(f"local dimension must be >= 3, got {d}")
        if self.kind.spread and not 0 <= self.k <= d - 2:
            raise InvalidLabelError(f"{self.kind.value} index {self.k} out of range for d={d}")
        if not self.kind.spread and self.k != 0:
            raise InvalidLabelError(f"{self.kind.value} carries no index")


@dataclass(frozen=True)
class Tolerance:
    abs_zero: float = 1e-10
    rel_nullspace: float = 1e-8
    completeness: float = 1e-12

    def __post_init__(self) -> None:
        for name in ("abs_zero", "rel_nullspace", "completeness"):
            if not getattr(self, name) > 0:
                raise ValueError(f"tolerance {name} must be strictly positive")


DEFAULT_TOL = Tolerance()


def root_of_unity(m: int, power: int) -> complex:
    """exp(2*pi*i*power/m), exact whenever the result is one of 1, i, -1, -i."""
    power %= m
    if (4 * power) % m == 0:
        return (1, 1j, -1, -1j)[(4 * power) // m]
    return complex(math.cos(2 * math.pi * power / m), math.sin(2 * math.pi * power / m))


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def local_vector(label: LocalLabel, d: int) -> np.ndarray:
    label.validate(d)
    v = np.zeros(d, dtype=complex)
    if label.kind is Kind.ZERO:
        v[0] = 1
    elif label.kind is Kind.TOP:
        v[d - 1] = 1
    else:
        shift = 0 if label.kind is Kind.ALPHA else 1
        for u in range(d - 1):
            v[u + shift] = root_of_unity(d - 1, label.k * u)
    return _frozen(v)


def basis_vector(d: int, level: int) -> np.ndarray:
    if not 0 <= level < d:
        raise InvalidLabelError(f"level {level} out of range for d={d}")
    v = np.zeros(d, dtype=complex)
    v[level] = 1
    return _frozen(v)


@dataclass(frozen=True, eq=False)
class ProductState:
    """Unnormalized product state; ``origin`` is (block id, index tuple) when known."""

    factors: tuple[np.ndarray, ...]
    origin: tuple | None = None

    def __post_init__(self) -> None:
        fs = tuple(_frozen(np.array(f, dtype=complex)) for f in self.factors)
        if not fs:
            raise DimensionMismatchError("a product state needs at least one factor")
        for f in fs:
            if f.ndim != 1 or not np.any(f):
                raise ValueError("each factor must be a nonzero 1-D vector")
        object.__setattr__(self, "factors", fs)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(len(f) for f in self.factors)

    @property
    def n(self) -> int:
        return len(self.factors)

    def norm2(self) -> float:
        return float(np.prod([np.vdot(f, f).real for f in self.factors]))


def inner_product(a: ProductState, b: ProductState) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    if a.dims != b.dims:
        raise DimensionMismatchError(f"dims {a.dims} vs {b.dims}")
    out = 1 + 0j
    for fa, fb in zip(a.factors, b.factors):
        out *= np.vdot(fa, fb)
    return complex(out)


def tensor_expand(s: ProductState, cap: int = DEFAULT_EXPAND_CAP) -> np.ndarray:
    """Kronecker expansion in party order (row-major: party 1 is the slowest index)."""
    size = math.prod(s.dims)
    if size > cap:
        raise CapExceededError(f"expansion of size {size} exceeds cap {cap}")
    out = np.ones(1, dtype=complex)
    for f in s.factors:
        out = np.kron(out, f)
    return out


def support(v: np.ndarray, tol: float = DEFAULT_TOL.abs_zero) -> frozenset[int]:
    return frozenset(int(i) for i in np.flatnonzero(np.abs(v) > tol))


def canonical_vector(v: np.ndarray, tol: float = DEFAULT_TOL.abs_zero) -> np.ndarray:
    """Rescale so that the first nonzero amplitude is real and positive (norm kept)."""
    idx = np.flatnonzero(np.abs(v) > tol)
    if not len(idx):
        raise ValueError("zero vector has no canonical form")
    lead = v[idx[0]]
    return np.asarray(v, dtype=complex) * (abs(lead) / lead)


def same_ray(a: ProductState, b: ProductState, tol: float = DEFAULT_TOL.abs_zero) -> bool:
    """Factor-wise equality after canonical scaling."""
    if a.dims != b.dims:
        return False
    return all(
        np.allclose(canonical_vector(fa, tol), canonical_vector(fb, tol), atol=tol, rtol=0)
        for fa, fb in zip(a.factors, b.factors)
    )


def computational_basis(dims: Sequence[int]) -> list[ProductState]:
    """All computational product basis states, row-major order."""
    return [
        ProductState(tuple(basis_vector(d, i) for d, i in zip(dims, idx)), origin=(("basis",), idx))
        for idx in itertools.product(*(range(d) for d in dims))
    ]


def max_overlap(states: Iterable[ProductState]) -> tuple[float, tuple[int, int] | None]:
    """Largest |<a|b>| over distinct pairs, with the offending pair."""
    states = list(states)
    worst, pair = 0.0, None
    if len(states) < 2:
        return worst, pair
    # per-party Gram matrices multiply out to the full Gram matrix
    gram = np.ones((len(states), len(states)), dtype=complex)
    for t in range(states[0].n):
        fs = np.array([s.factors[t] for s in states])
        gram *= fs.conj() @ fs.T
    mag = np.abs(gram)
    np.fill_diagonal(mag, 0.0)
    k, l = np.unravel_index(int(np.argmax(mag)), mag.shape)
    worst = float(mag[k, l])
    if worst > 0:
        pair = (int(min(k, l)), int(max(k, l)))
    return worst, pair
