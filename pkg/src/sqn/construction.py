"""Builders for the product sets E (qutrits), F (general dims) and O (odd party count).

Every set is a union of symbolic blocks. A block is fixed by a class (C or D)
and an index set q: parties in q carry a spread of Fourier vectors, the others
a single basis vector. Labels follow a left-to-right recursion in which each
party inherits "zero-like" or "top-like" from its predecessor and flips it
when the party belongs to q.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .states import Kind, LocalLabel, ProductState, local_vector


class ParityError(ValueError):
    pass


Box = tuple[frozenset[int], ...]


def label_levels(kind: Kind, d: int) -> frozenset[int]:
    """Computational support of a block label on one party."""
    if kind is Kind.ZERO:
        return frozenset({0})
    if kind is Kind.TOP:
        return frozenset({d - 1})
    if kind is Kind.ALPHA:
        return frozenset(range(d - 1))
    return frozenset(range(1, d))


@dataclass(frozen=True)
class SymbolicBlock:
    cls: str
    q: tuple[int, ...]
    labels: tuple[Kind, ...]
    dims: tuple[int, ...]

    @property
    def block_id(self) -> tuple[str, tuple[int, ...]]:
        return (self.cls, self.q)

    @property
    def name(self) -> str:
        return f"{self.cls}{{{','.join(map(str, self.q))}}}"

    @property
    def size(self) -> int:
        return math.prod(self.dims[t - 1] - 1 for t in self.q)

    def box(self) -> Box:
        return tuple(label_levels(k, d) for k, d in zip(self.labels, self.dims))

    def sort_key(self) -> tuple:
        return (self.cls, len(self.q), self.q, self.labels)

    def expand(self) -> list[ProductState]:
        """States of the block, lexicographic in the spread-index tuple."""
        spread = [t - 1 for t in self.q]
        ranges = [range(self.dims[t] - 1) for t in spread]
        out = []
        for idx in itertools.product(*ranges):
            ks = dict(zip(spread, idx))
            factors = []
            for t, (kind, d) in enumerate(zip(self.labels, self.dims)):
                factors.append(local_vector(LocalLabel(kind, ks.get(t, 0)), d))
            out.append(ProductState(tuple(factors), origin=(self.block_id, idx)))
        return out


def block_from_labels(labels: Sequence[Kind], dims: Sequence[int]) -> SymbolicBlock:
    """Rebuild class and index set from a label tuple (used for derived sets)."""
    labels = tuple(Kind(k) for k in labels)
    cls = "C" if labels[0].zero_like else "D"
    q = tuple(t + 1 for t, k in enumerate(labels) if k.spread)
    return SymbolicBlock(cls, q, labels, tuple(dims))


@dataclass(frozen=True)
class StateSet:
    name: str
    dims: tuple[int, ...]
    blocks: tuple[SymbolicBlock, ...]
    family: str = "derived"

    def __post_init__(self) -> None:
        object.__setattr__(self, "dims", tuple(self.dims))
        object.__setattr__(self, "blocks", tuple(sorted(self.blocks, key=SymbolicBlock.sort_key)))
        for b in self.blocks:
            if b.dims != self.dims:
                raise ValueError(f"block {b.name} has dims {b.dims}, set has {self.dims}")

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def cardinality(self) -> int:
        return sum(b.size for b in self.blocks)

    def expand(self) -> list[ProductState]:
        return [s for b in self.blocks for s in b.expand()]

    def block(self, block_id) -> SymbolicBlock:
        for b in self.blocks:
            if b.block_id == tuple(block_id):
                return b
        raise KeyError(block_id)

    @property
    def claims_strong_nonlocality(self) -> bool:
        return self.family in ("E", "F") and self.n > 3


def enumerate_subsets(n: int, parity: str) -> list[tuple[int, ...]]:
    """Subsets of {1..n} of the given size parity, ordered by size then lexicographically."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if parity not in ("odd", "even"):
        raise ValueError("parity must be 'odd' or 'even'")
    start = 1 if parity == "odd" else 0
    return [c for r in range(start, n + 1, 2) for c in itertools.combinations(range(1, n + 1), r)]


def build_block(q: Iterable[int], cls: str, dims: Sequence[int], parity: str | None = None) -> SymbolicBlock:
    dims = tuple(int(d) for d in dims)
    q = tuple(sorted(set(q)))
    if cls not in ("C", "D"):
        raise ValueError(f"class must be C or D, got {cls!r}")
    if any(d < 3 for d in dims):
        raise ValueError(f"all dimensions must be >= 3, got {dims}")
    if any(not 1 <= t <= len(dims) for t in q):
        raise ValueError(f"index set {q} not within 1..{len(dims)}")
    if parity is not None and (len(q) % 2 == 1) != (parity == "odd"):
        raise ParityError(f"|q|={len(q)} does not have {parity} parity")
    labels = []
    zero_like = cls == "C"
    for t in range(1, len(dims) + 1):
        if t in q:
            # the first party keeps its class orientation, later ones flip it
            if t > 1:
                zero_like = not zero_like
            labels.append(Kind.ALPHA if zero_like else Kind.BETA)
        else:
            labels.append(Kind.ZERO if zero_like else Kind.TOP)
    return SymbolicBlock(cls, q, tuple(labels), dims)


def _build(dims: Sequence[int], parity: str, family: str, name: str) -> StateSet:
    dims = tuple(int(d) for d in dims)
    blocks = [build_block(q, c, dims, parity) for c in ("C", "D") for q in enumerate_subsets(len(dims), parity)]
    return StateSet(name, dims, tuple(blocks), family)


def build_F(dims: Sequence[int]) -> StateSet:
    if len(dims) < 2 or len(dims) % 2:
        raise ParityError(f"F needs an even number of parties, got {len(dims)}")
    return _build(dims, "odd", "F", "F(" + ",".join(map(str, dims)) + ")")


def build_E(n: int) -> StateSet:
    if n < 2 or n % 2:
        raise ParityError(f"E needs an even number of parties, got {n}")
    return _build((3,) * n, "odd", "E", f"E({n})")


def build_O(dims: Sequence[int]) -> StateSet:
    if len(dims) < 3 or len(dims) % 2 == 0:
        raise ParityError(f"O needs an odd number (>= 3) of parties, got {len(dims)}")
    return _build(dims, "even", "O", "O(" + ",".join(map(str, dims)) + ")")


def build_family(family: str, dims: Sequence[int]) -> StateSet:
    family = family.upper()
    if family == "E":
        if any(d != 3 for d in dims):
            raise ValueError("family E is defined on qutrits only; use F")
        return build_E(len(dims))
    if family == "F":
        return build_F(dims)
    if family == "O":
        return build_O(dims)
    raise ValueError(f"unknown family {family!r}")


def cardinality(dims: Sequence[int]) -> int:
    return math.prod(dims) - math.prod(d - 2 for d in dims)


def counting_identity(n: int) -> tuple[int, int]:
    """Both sides of 2 * sum_i C(n, 2i-1) 2^(2i-1) = 3^n - 1."""
    lhs = 2 * sum(math.comb(n, 2 * i - 1) * 2 ** (2 * i - 1) for i in range(1, n // 2 + 1))
    return lhs, 3**n - 1


def middle_box(dims: Sequence[int]) -> Box:
    return tuple(frozenset(range(1, d - 1)) for d in dims)


def box_cells(box: Box) -> Iterable[tuple[int, ...]]:
    return itertools.product(*(sorted(s) for s in box))


@dataclass
class TilingReport:
    disjoint: bool
    covers_complement: bool
    overlaps: list[tuple[str, str]]
    missing: int
    extra: int

    @property
    def ok(self) -> bool:
        return self.disjoint and self.covers_complement


def check_tiling(s: StateSet) -> TilingReport:
    """Exact set check: block boxes are disjoint and tile the cube minus the middle box."""
    owner: dict[tuple[int, ...], str] = {}
    overlaps = []
    for b in s.blocks:
        for cell in box_cells(b.box()):
            if cell in owner:
                overlaps.append((owner[cell], b.name))
            else:
                owner[cell] = b.name
    cube = set(itertools.product(*(range(d) for d in s.dims)))
    target = cube - set(box_cells(middle_box(s.dims)))
    covered = set(owner)
    return TilingReport(
        disjoint=not overlaps,
        covers_complement=covered == target,
        overlaps=overlaps,
        missing=len(target - covered),
        extra=len(covered - target),
    )
