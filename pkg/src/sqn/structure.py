"""Projection boxes and the structural test for local irreducibility on a party subset.

Blocks are handled through their computational boxes only. A box is a tuple
with one set of levels per party. ``X`` is always a tuple of 1-based party
indices; its complement is taken inside ``1..n``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .construction import Box, StateSet, SymbolicBlock
from .states import DEFAULT_TOL, ProductState, support

CONDITION_I_INTERPRETATION = (
    "set containment: for every row-major X-basis position i except the last, the basis tail from i lies in "
    "the union of X-boxes of blocks whose complement boxes meet the complement cells attached to position i"
)


@dataclass(frozen=True)
class BoxBlock:
    """One block reduced to its box; ``id`` is any hashable, ``name`` is for reports."""

    id: object
    name: str
    box: Box


@dataclass(frozen=True)
class ProjectionBox:
    parties: tuple[int, ...]
    sets: tuple[frozenset[int], ...]
    owner: object

    def cells(self) -> set[tuple[int, ...]]:
        return set(itertools.product(*(sorted(s) for s in self.sets)))


def blocks_of(s: StateSet) -> list[BoxBlock]:
    return [BoxBlock(b.block_id, b.name, b.box()) for b in s.blocks]


def blocks_from_states(states: Sequence[ProductState], tol: float = DEFAULT_TOL.abs_zero) -> list[BoxBlock]:
    """Group explicit product states by support box.

    Each group must contain as many states as its box has cells; otherwise the
    states do not span their box and the structural test does not apply.
    """
    groups: dict[Box, list[int]] = {}
    for k, s in enumerate(states):
        box = tuple(support(f, tol) for f in s.factors)
        groups.setdefault(box, []).append(k)
    out = []
    for box, members in groups.items():
        if len(members) != math.prod(len(x) for x in box):
            raise ValueError(f"states {members} do not span their support box; structural test not applicable")
        name = "box(" + ";".join(",".join(map(str, sorted(x))) for x in box) + ")"
        out.append(BoxBlock(tuple(members), name, box))
    return out


def _restrict(box: Box, parties: Sequence[int]) -> tuple[frozenset[int], ...]:
    return tuple(box[t - 1] for t in parties)


def complement(X: Sequence[int], n: int) -> tuple[int, ...]:
    xs = set(X)
    return tuple(t for t in range(1, n + 1) if t not in xs)


def projection_box(block: SymbolicBlock | BoxBlock, X: Sequence[int]) -> ProjectionBox:
    X = tuple(X)
    if not X:
        raise ValueError("party subset X must be nonempty")
    if isinstance(block, SymbolicBlock):
        box, owner = block.box(), block.block_id
    else:
        box, owner = block.box, block.id
    return ProjectionBox(X, _restrict(box, X), owner)


def _meets(a: tuple[frozenset[int], ...], b: tuple[frozenset[int], ...]) -> bool:
    return all(x & y for x, y in zip(a, b))


def _overlap_size(a: tuple[frozenset[int], ...], b: tuple[frozenset[int], ...]) -> int:
    return math.prod(len(x & y) for x, y in zip(a, b))


def _contains(big: tuple[frozenset[int], ...], small: tuple[frozenset[int], ...]) -> bool:
    """Product-set containment; an empty product is contained in anything."""
    if any(not s for s in small):
        return True
    return all(s <= b for s, b in zip(small, big))


def _cells(sets: tuple[frozenset[int], ...]) -> set[tuple[int, ...]]:
    return set(itertools.product(*(sorted(s) for s in sets)))


@dataclass
class Connectivity:
    connected: bool
    components: list[list[int]]
    witness: tuple[list[object], list[object]] | None = None


def is_connected(blocks: Sequence[BoxBlock], X: Sequence[int]) -> Connectivity:
    """Connectivity of the graph joining blocks whose X-boxes intersect.

    When disconnected, ``witness`` is a bipartition (one component vs the
    rest) whose X-unions are disjoint.
    """
    if not blocks:
        raise ValueError("need at least one block")
    proj = [_restrict(b.box, X) for b in blocks]
    rows, cols = [], []
    for a, b in itertools.combinations(range(len(blocks)), 2):
        if _meets(proj[a], proj[b]):
            rows.append(a)
            cols.append(b)
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(blocks), len(blocks)))
    ncomp, labels = connected_components(graph, directed=False)
    components = [[k for k in range(len(blocks)) if labels[k] == c] for c in range(ncomp)]
    witness = None
    if ncomp > 1:
        first = set(components[0])
        witness = (
            [blocks[k].id for k in components[0]],
            [blocks[k].id for k in range(len(blocks)) if k not in first],
        )
    return Connectivity(ncomp == 1, components, witness)


@dataclass
class PIRecord:
    target: object
    covering: list[object]
    common_point: tuple[int, ...]
    upi_flag: bool
    witness: object | None = None


def _pi_candidates(target: int, blocks: Sequence[BoxBlock], X: Sequence[int], Xbar: Sequence[int]):
    """Yield (point, members) for every complement point whose blocks cover the target on X.

    Members are the other blocks that contain the point on the complement and
    meet the target on X. If any PI set exists with common point v, this
    member list for v is one as well, so the search is exhaustive.
    """
    tX = _restrict(blocks[target].box, X)
    need = _cells(tX)
    projX = [_restrict(b.box, X) for b in blocks]
    projXbar = [_restrict(b.box, Xbar) for b in blocks]
    for v in itertools.product(*(sorted(set().union(*(p[j] for p in projXbar))) for j in range(len(Xbar)))):
        members = [
            k
            for k in range(len(blocks))
            if k != target and all(v[j] in projXbar[k][j] for j in range(len(Xbar))) and _meets(projX[k], tX)
        ]
        covered = set()
        for k in members:
            covered |= _cells(projX[k]) & need
        if covered == need:
            yield v, members


def find_pi(target: BoxBlock, X: Sequence[int], blocks: Sequence[BoxBlock]) -> PIRecord | None:
    """PI set of ``target`` on X, preferring one with a single-cell overlap member (UPI)."""
    n = len(target.box)
    Xbar = complement(X, n)
    if not Xbar:
        raise ValueError("X must be a proper subset of the parties")
    idx = next((k for k, b in enumerate(blocks) if b.id == target.id), None)
    pool = list(blocks) if idx is not None else list(blocks) + [target]
    t = idx if idx is not None else len(pool) - 1
    tX = _restrict(target.box, X)
    first = None
    for v, members in _pi_candidates(t, pool, X, Xbar):
        single = [k for k in members if _overlap_size(_restrict(pool[k].box, X), tX) == 1]
        rec = PIRecord(
            target.id, [pool[k].id for k in members], v, bool(single), pool[single[0]].id if single else None
        )
        if single:
            return rec
        if first is None:
            first = rec
    return first


@dataclass
class SetSequence:
    groups: list[list[object]]
    leftover: list[object] = field(default_factory=list)

    @property
    def exhaustive(self) -> bool:
        return not self.leftover


class NoUPIError(ValueError):
    pass


def build_set_sequence(
    blocks: Sequence[BoxBlock], X: Sequence[int], pi: dict[object, PIRecord | None] | None = None
) -> SetSequence:
    """Breadth-first layering starting from all blocks that own a UPI set."""
    if pi is None:
        pi = {b.id: find_pi(b, X, blocks) for b in blocks}
    g1 = [k for k, b in enumerate(blocks) if pi.get(b.id) is not None and pi[b.id].upi_flag]
    if not g1:
        raise NoUPIError("no block has a UPI set on this party subset")
    proj = [_restrict(b.box, X) for b in blocks]
    assigned = set(g1)
    layers = [g1]
    while True:
        nxt = [
            k
            for k in range(len(blocks))
            if k not in assigned and any(_meets(proj[k], proj[j]) for j in layers[-1])
        ]
        if not nxt:
            break
        assigned.update(nxt)
        layers.append(nxt)
    leftover = [blocks[k].id for k in range(len(blocks)) if k not in assigned]
    return SetSequence([[blocks[k].id for k in layer] for layer in layers], leftover)


@dataclass
class ConditionResult:
    passed: bool
    detail: dict


@dataclass
class ConditionReport:
    X: tuple[int, ...]
    i: ConditionResult
    ii: ConditionResult
    iii: ConditionResult
    iv: ConditionResult

    @property
    def all_pass(self) -> bool:
        return self.i.passed and self.ii.passed and self.iii.passed and self.iv.passed

    def as_dict(self) -> dict:
        return {
            "X": list(self.X),
            "i": {"passed": self.i.passed, **self.i.detail},
            "ii": {"passed": self.ii.passed, **self.ii.detail},
            "iii": {"passed": self.iii.passed, **self.iii.detail},
            "iv": {"passed": self.iv.passed, **self.iv.detail},
            "all_pass": self.all_pass,
        }


def _condition_i(blocks: Sequence[BoxBlock], X: Sequence[int], Xbar: Sequence[int]) -> ConditionResult:
    dims = [max(max(b.box[t - 1]) for b in blocks) + 1 for t in range(1, len(blocks[0].box) + 1)]
    basis = list(itertools.product(*(range(dims[t - 1]) for t in X)))
    position = {p: k for k, p in enumerate(basis)}
    cellsX = [_cells(_restrict(b.box, X)) for b in blocks]
    cellsXbar = [_cells(_restrict(b.box, Xbar)) for b in blocks]
    cache: dict[frozenset, int] = {}
    for i in range(len(basis) - 1):
        point = basis[i]
        V = frozenset().union(*(cellsXbar[k] for k in range(len(blocks)) if point in cellsX[k]))
        if V not in cache:
            S = set().union(*(cellsX[k] for k in range(len(blocks)) if cellsXbar[k] & V))
            # largest basis position outside S; the tail from i is inside S iff this lies below i
            missing = [position[p] for p in basis if p not in S]
            cache[V] = max(missing) if missing else -1
        if cache[V] >= i:
            return ConditionResult(
                False,
                {"failing_index": i, "point": list(point), "interpretation": CONDITION_I_INTERPRETATION},
            )
    return ConditionResult(True, {"checked_indices": len(basis) - 1, "interpretation": CONDITION_I_INTERPRETATION})


def _condition_iii(
    blocks: Sequence[BoxBlock], X: Sequence[int], Xbar: Sequence[int], seq: SetSequence
) -> ConditionResult:
    index = {b.id: k for k, b in enumerate(blocks)}
    proj = [_restrict(b.box, X) for b in blocks]
    witnesses = []
    for x in range(len(seq.groups) - 1):
        prev = [index[i] for i in seq.groups[x]]
        for bid in seq.groups[x + 1]:
            k = index[bid]
            found = None
            for v, members in _pi_candidates(k, blocks, X, Xbar):
                for j in prev:
                    inter_prev = tuple(a & b for a, b in zip(proj[k], proj[j]))
                    if not all(inter_prev):
                        continue
                    for m in members:
                        inter_m = tuple(a & b for a, b in zip(proj[k], proj[m]))
                        if _contains(inter_prev, inter_m):
                            found = (blocks[j].name, blocks[m].name, list(v))
                            break
                    if found:
                        break
                if found:
                    break
            if found is None:
                return ConditionResult(False, {"failing_block": blocks[k].name, "layer": x + 2})
            witnesses.append({"block": blocks[k].name, "previous": found[0], "pi_member": found[1]})
    return ConditionResult(True, {"layers": len(seq.groups), "witness_count": len(witnesses)})


def check_conditions(blocks: Sequence[BoxBlock], X: Sequence[int]) -> ConditionReport:
    """Evaluate the four structural conditions independently on party subset X."""
    X = tuple(sorted(X))
    n = len(blocks[0].box)
    Xbar = complement(X, n)
    if not X or not Xbar:
        raise ValueError("X must be a nonempty proper subset of the parties")

    cond_i = _condition_i(blocks, X, Xbar)

    pi = {b.id: find_pi(b, X, blocks) for b in blocks}
    lacking = [b.name for b in blocks if pi[b.id] is None]
    cond_ii = ConditionResult(
        not lacking,
        {"blocks_without_pi": lacking, "upi_blocks": sum(1 for r in pi.values() if r is not None and r.upi_flag)},
    )

    try:
        seq = build_set_sequence(blocks, X, pi)
    except NoUPIError:
        cond_iii = ConditionResult(False, {"reason": "no block has a UPI set"})
    else:
        if not seq.exhaustive:
            names = {b.id: b.name for b in blocks}
            cond_iii = ConditionResult(
                False, {"reason": "set sequence does not reach every block", "leftover": [names[i] for i in seq.leftover]}
            )
        else:
            cond_iii = _condition_iii(blocks, X, Xbar, seq)

    conn = is_connected(blocks, X)
    detail = {"components": len(conn.components)}
    if conn.witness is not None:
        names = {b.id: b.name for b in blocks}
        detail["witness"] = [[names[i] for i in part] for part in conn.witness]
    cond_iv = ConditionResult(conn.connected, detail)
    return ConditionReport(X, cond_i, cond_ii, cond_iii, cond_iv)


@dataclass
class StructuralVerdict:
    verdict: str
    parties: dict[int, ConditionReport]
    in_claim: bool = True

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "in_claim": self.in_claim,
            "parties": {str(i): r.as_dict() for i, r in self.parties.items()},
        }


def strong_nonlocality_structural(s: StateSet | Sequence[BoxBlock], parties: Sequence[int] | None = None) -> StructuralVerdict:
    """Run the conditions on every X_i = {1..n} minus {i}; certified only if all pass."""
    if isinstance(s, StateSet):
        blocks, in_claim = blocks_of(s), s.claims_strong_nonlocality
    else:
        blocks, in_claim = list(s), False
    n = len(blocks[0].box)
    parties = list(parties) if parties is not None else list(range(1, n + 1))
    reports = {i: check_conditions(blocks, complement((i,), n)) for i in parties}
    verdict = "certified" if all(r.all_pass for r in reports.values()) else "not certified"
    return StructuralVerdict(verdict, reports, in_claim)
