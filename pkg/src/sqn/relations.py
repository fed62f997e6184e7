"""Subsystem removal, relabelling and cyclic permutation of symbolic sets."""

from __future__ import annotations

import math
from collections import Counter

from .construction import StateSet, block_from_labels


def _check_party(s: StateSet, i: int) -> None:
    if not 1 <= i <= s.n:
        raise ValueError(f"party index {i} outside 1..{s.n}")


def strip_subsystem(s: StateSet, i: int) -> StateSet:
    """Keep the blocks spread on party i, then delete that party (later parties shift down)."""
    _check_party(s, i)
    dims = s.dims[: i - 1] + s.dims[i:]
    blocks = []
    for b in s.blocks:
        if i not in b.q:
            continue
        labels = b.labels[: i - 1] + b.labels[i:]
        blocks.append(block_from_labels(labels, dims))
    return StateSet(f"strip({s.name},{i})", dims, tuple(blocks), "derived")


def relabel_flip(s: StateSet, pivot: int) -> StateSet:
    """Swap zero<->top and alpha<->beta on every party j > pivot (pivot may be 0)."""
    if not 0 <= pivot <= s.n:
        raise ValueError(f"pivot {pivot} outside 0..{s.n}")
    blocks = []
    for b in s.blocks:
        labels = tuple(k.flipped() if t > pivot else k for t, k in enumerate(b.labels, start=1))
        blocks.append(block_from_labels(labels, s.dims))
    return StateSet(f"flip({s.name},{pivot})", s.dims, tuple(blocks), "derived")


def strip_and_flip(s: StateSet, i: int) -> StateSet:
    """Remove party i and flip every party that came after it in the original order.

    After removal those parties sit at positions >= i, so the flip pivot in the
    stripped set's own numbering is i - 1.
    """
    return relabel_flip(strip_subsystem(s, i), i - 1)


def cyclic_permute(s: StateSet, j: int) -> StateSet:
    """Reorder parties as (j, j+1, ..., n, 1, ..., j-1)."""
    _check_party(s, j)
    order = list(range(j - 1, s.n)) + list(range(j - 1))
    dims = tuple(s.dims[t] for t in order)
    blocks = [block_from_labels(tuple(b.labels[t] for t in order), dims) for b in s.blocks]
    return StateSet(f"P{j}({s.name})", dims, tuple(blocks), "derived")


def set_equal(a: StateSet, b: StateSet) -> bool:
    """Same dims and the same multiset of label tuples (class tags are derived, not compared)."""
    if a.dims != b.dims:
        return False
    return Counter(x.labels for x in a.blocks) == Counter(x.labels for x in b.blocks)


def surviving_sizes(s: StateSet, i: int) -> Counter:
    """Index-set sizes among class-C blocks after stripping party i."""
    return Counter(len(b.q) for b in strip_subsystem(s, i).blocks if b.cls == "C")


def removal_count_identity(n: int, k: int) -> tuple[int, int]:
    """C(n, k-1) against C(n+1, k) - C(n, k): index sets of size k containing n+1."""
    return math.comb(n, k - 1), math.comb(n + 1, k) - math.comb(n, k)
