"""Entanglement-assisted discrimination of the block sets, simulated on sparse vectors.

Registers are named ``P1..Pn`` (P1 is Alice's system, P(j+1) is Bob j's),
``a1..a(n-1)`` (Alice's halves of the shared pairs) and ``b1..b(n-1)``
(Bob j's halves). Every ancilla is a qutrit.

Bob j's first measurement compares the *group* of his level (0 for level 0,
2 for level d-1, 1 for anything in between) with his ancilla level; outcome
``o`` means ``b_j = group + o (mod 3)``. Alice then reads her level and all
``a_j`` and learns the block. The within-block stage uses Fourier readouts;
for Bob this needs Alice's Fourier outcome on ``a_j`` to fix the phases.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .construction import StateSet, SymbolicBlock, label_levels
from .states import DEFAULT_TOL, Kind, ProductState, Tolerance, root_of_unity

DENSE_LIMIT = 10**6
LOG2_3 = math.log2(3)


class ProtocolError(RuntimeError):
    pass


class ProtocolFailure(ProtocolError):
    def __init__(self, message: str, transcript: "ProtocolTranscript"):
        super().__init__(message)
        self.transcript = transcript


def group_of(level: int, d: int) -> int:
    if level == 0:
        return 0
    return 2 if level == d - 1 else 1


def levels_of_group(g: int, d: int) -> frozenset[int]:
    return frozenset({0}) if g == 0 else frozenset({d - 1}) if g == 2 else frozenset(range(1, d - 1))


_GROUPS = {Kind.ZERO: {0}, Kind.ALPHA: {0, 1}, Kind.BETA: {1, 2}, Kind.TOP: {2}}


@dataclass(frozen=True, eq=False)
class Operator:
    """Projector: a sum of disjoint computational boxes, or |v><v| for a unit vector v."""

    label: str
    boxes: tuple[tuple[frozenset[int], ...], ...] = ()
    vector: np.ndarray | None = None
    value: object = None

    @cached_property
    def cells(self) -> frozenset[tuple[int, ...]]:
        return frozenset(c for box in self.boxes for c in itertools.product(*box))


@dataclass(frozen=True, eq=False)
class MeasurementSpec:
    name: str
    registers: tuple[str, ...]
    dims: tuple[int, ...]
    operators: tuple[Operator, ...]

    @property
    def size(self) -> int:
        return math.prod(self.dims)

    def operator_matrix(self, op: Operator) -> np.ndarray:
        if op.vector is not None:
            return np.outer(op.vector, op.vector.conj())
        diag = np.zeros(self.size)
        for box in op.boxes:
            for cell in itertools.product(*(sorted(s) for s in box)):
                diag[np.ravel_multi_index(cell, self.dims)] += 1
        return np.diag(diag).astype(complex)

    def completeness_residual(self) -> float:
        if all(op.vector is None for op in self.operators):
            # disjointly-summed diagonal projectors: sum M^dag M is the coverage count
            cover = np.zeros(self.dims, dtype=int)
            for op in self.operators:
                for box in op.boxes:
                    cover[np.ix_(*(sorted(s) for s in box))] += 1
            return float(np.max(np.abs(cover - 1)))
        total = sum(self.operator_matrix(op).conj().T @ self.operator_matrix(op) for op in self.operators)
        return float(np.max(np.abs(total - np.eye(self.size))))


@dataclass(frozen=True, eq=False)
class ProtocolState:
    """Sparse amplitudes keyed by index tuples; released registers sit at index 0 in keys."""

    registers: tuple[str, ...]
    dims: tuple[int, ...]
    amps: Mapping[tuple[int, ...], complex]
    released: tuple[tuple[tuple[str, ...], np.ndarray], ...] = ()

    def position(self, name: str) -> int:
        return self.registers.index(name)

    def norm2(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amps.values()))

    @property
    def released_names(self) -> set[str]:
        return {r for regs, _ in self.released for r in regs}

    def to_dense(self) -> np.ndarray:
        size = math.prod(self.dims)
        if size > DENSE_LIMIT:
            raise ValueError(f"dense expansion of size {size} exceeds {DENSE_LIMIT}")
        out = np.zeros(self.dims, dtype=complex)
        rel = [([self.position(r) for r in regs], [self.dims[self.position(r)] for r in regs], v) for regs, v in self.released]
        for key, amp in self.amps.items():
            entries = [(list(key), amp)]
            for pos, dims, v in rel:
                nxt = []
                for k, a in entries:
                    for j, cell in enumerate(itertools.product(*(range(d) for d in dims))):
                        if v[j] != 0:
                            k2 = list(k)
                            for p, c in zip(pos, cell):
                                k2[p] = c
                            nxt.append((k2, a * v[j]))
                entries = nxt
            for k, a in entries:
                out[tuple(k)] += a
        return out.reshape(-1)


def register_layout(dims: Sequence[int]) -> tuple[tuple[str, ...], tuple[int, ...]]:
    n = len(dims)
    names = tuple(f"P{t}" for t in range(1, n + 1))
    names += tuple(f"a{j}" for j in range(1, n)) + tuple(f"b{j}" for j in range(1, n))
    return names, tuple(dims) + (3,) * (2 * (n - 1))


def attach_entanglement(s: ProductState) -> ProtocolState:
    """s tensor (sum_i |ii>) for each (a_j, b_j); unnormalized like the input."""
    n = s.n
    names, dims = register_layout(s.dims)
    supports = [np.flatnonzero(f) for f in s.factors]
    amps = {}
    for levels in itertools.product(*supports):
        a = complex(np.prod([f[x] for f, x in zip(s.factors, levels)]))
        for anc in itertools.product(range(3), repeat=n - 1):
            amps[tuple(levels) + anc + anc] = a
    return ProtocolState(names, dims, amps)


@dataclass
class Branch:
    label: str
    probability: float
    state: ProtocolState
    value: object = None


def _apply(ps: ProtocolState, m: MeasurementSpec, op: Operator) -> ProtocolState:
    pos = [ps.position(r) for r in m.registers]
    if set(m.registers) & ps.released_names:
        raise ProtocolError(f"{m.name} acts on released registers")
    if op.vector is None:
        cells = op.cells
        amps = {k: a for k, a in ps.amps.items() if tuple(k[p] for p in pos) in cells}
        return ProtocolState(ps.registers, ps.dims, amps, ps.released)
    amps: dict[tuple[int, ...], complex] = {}
    vc = op.vector.conj()
    for k, a in ps.amps.items():
        j = 0
        for p, d in zip(pos, m.dims):
            j = j * d + k[p]
        if vc[j] == 0:
            continue
        rest = list(k)
        for p in pos:
            rest[p] = 0
        rest = tuple(rest)
        amps[rest] = amps.get(rest, 0) + vc[j] * a
    return ProtocolState(ps.registers, ps.dims, amps, ps.released + ((m.registers, op.vector),))


def outcome_probabilities(ps: ProtocolState, m: MeasurementSpec) -> dict[str, float]:
    total = ps.norm2()
    return {op.label: _apply(ps, m, op).norm2() / total for op in m.operators}


def apply_measurement(ps: ProtocolState, m: MeasurementSpec, tol: Tolerance = DEFAULT_TOL) -> list[Branch]:
    """Born-rule branches with probability above tol.completeness."""
    total = ps.norm2()
    if total == 0:
        raise ProtocolError("state has zero norm")
    out = []
    for op in m.operators:
        post = _apply(ps, m, op)
        p = post.norm2() / total
        if p > tol.completeness:
            out.append(Branch(op.label, p, post, op.value))
    return out


def bob_measurement(j: int, d: int) -> MeasurementSpec:
    """Bob j's three-outcome measurement on (P(j+1), b_j)."""
    if d < 3:
        raise ValueError("local dimension must be >= 3")
    ops = []
    for o in range(3):
        boxes = tuple((levels_of_group(g, d), frozenset({(g + o) % 3})) for g in range(3))
        ops.append(Operator(f"M{j},{o + 1}", boxes, value=o))
    return MeasurementSpec(f"M{j}", (f"P{j + 1}", f"b{j}"), (d, 3), tuple(ops))


def _alice_box(block: SymbolicBlock, offsets: Sequence[int]) -> tuple[frozenset[int], ...]:
    first = label_levels(block.labels[0], block.dims[0])
    rest = tuple(frozenset((g + o) % 3 for g in _GROUPS[k]) for k, o in zip(block.labels[1:], offsets))
    return (first,) + rest


def alice_measurement(s: StateSet, offsets: Sequence[int]) -> MeasurementSpec:
    """Block-identifying projective measurement on (P1, a1..a(n-1)) after Bob outcomes ``offsets``."""
    n = s.n
    offsets = tuple(int(o) for o in offsets)
    if len(offsets) != n - 1 or any(o not in (0, 1, 2) for o in offsets):
        raise ValueError(f"need {n - 1} offsets in {{0,1,2}}, got {offsets}")
    d1 = s.dims[0]
    regs = ("P1",) + tuple(f"a{j}" for j in range(1, n))
    dims = (d1,) + (3,) * (n - 1)
    ops = [Operator(b.name, (_alice_box(b, offsets),), value=b.block_id) for b in s.blocks]
    rest = (frozenset(range(1, d1 - 1)),) + tuple(frozenset({(1 + o) % 3}) for o in offsets)
    ops.append(Operator("Mn1", (rest,), value=None))
    coverage = np.zeros(dims, dtype=int)
    for op in ops:
        for box in op.boxes:
            coverage[np.ix_(*(sorted(x) for x in box))] += 1
    if np.any(coverage > 1):
        raise ProtocolError("block projectors overlap")
    return MeasurementSpec("Mn", regs, dims, tuple(ops))


def _fourier(m: int, k: int, support: Sequence[int], size: int, phases: Sequence[complex] | None = None) -> np.ndarray:
    v = np.zeros(size, dtype=complex)
    for u, idx in enumerate(support):
        v[idx] = root_of_unity(m, k * u) * (phases[u] if phases is not None else 1)
    return v / math.sqrt(len(support))


def alice_fourier(j: int) -> MeasurementSpec:
    ops = tuple(
        Operator(f"F{j},{s}", vector=np.array([root_of_unity(3, s * c) for c in range(3)]) / math.sqrt(3), value=s)
        for s in range(3)
    )
    return MeasurementSpec(f"F{j}", (f"a{j}",), (3,), ops)


def _spread_levels(kind: Kind, d: int) -> list[int]:
    return list(range(d - 1)) if kind is Kind.ALPHA else list(range(1, d))


def alice_readout(kind: Kind, d: int) -> MeasurementSpec:
    """Fourier readout of Alice's own system over the label's support."""
    levels = _spread_levels(kind, d)
    ops = [Operator(f"R0,{k}", vector=_fourier(d - 1, k, levels, d), value=k) for k in range(d - 1)]
    off = frozenset(range(d)) - set(levels)
    ops.append(Operator("R0,rest", ((off,),), value=None))
    return MeasurementSpec("R0", ("P1",), (d,), tuple(ops))


def bob_readout(j: int, kind: Kind, d: int, offset: int, s: int) -> MeasurementSpec:
    """Phase-corrected Fourier readout of (P(j+1), b_j) given Bob's offset and Alice's outcome s."""
    levels = _spread_levels(kind, d)
    pairs = [(L, (group_of(L, d) + offset) % 3) for L in levels]
    idx = [L * 3 + c for L, c in pairs]
    phases = [root_of_unity(3, -s * c) for _, c in pairs]
    ops = [Operator(f"R{j},{k}", vector=_fourier(d - 1, k, idx, 3 * d, phases), value=k) for k in range(d - 1)]
    rest = set(itertools.product(range(d), range(3))) - set(pairs)
    ops.append(Operator(f"R{j},rest", tuple((frozenset({L}), frozenset({c})) for L, c in sorted(rest)), value=None))
    return MeasurementSpec(f"R{j}", (f"P{j + 1}", f"b{j}"), (d, 3), tuple(ops))


def protocol_measurements(s: StateSet) -> list[MeasurementSpec]:
    """Every measurement the protocol can call on ``s``, over all branches."""
    n = s.n
    out = [bob_measurement(j, s.dims[j]) for j in range(1, n)]
    out += [alice_measurement(s, o) for o in itertools.product(range(3), repeat=n - 1)]
    out += [alice_fourier(j) for j in range(1, n)]
    out += [alice_readout(k, s.dims[0]) for k in (Kind.ALPHA, Kind.BETA)]
    for j in range(1, n):
        for kind, o, sh in itertools.product((Kind.ALPHA, Kind.BETA), range(3), range(3)):
            out.append(bob_readout(j, kind, s.dims[j], o, sh))
    return out


def ebit_costs(dims: Sequence[int]) -> dict[str, float]:
    """Protocol cost vs teleporting every system to the largest party."""
    dims = sorted(dims, reverse=True)
    return {
        "protocol": (len(dims) - 1) * LOG2_3,
        "teleport": math.log2(math.prod(dims[1:])),
    }


@dataclass
class ProtocolTranscript:
    state_index: int
    origin: tuple
    outcomes: list[tuple[str, str, float]]
    probability: float
    offsets: tuple[int, ...]
    identified_block: tuple | None
    identified_index: tuple | None
    success: bool
    ebits: dict[str, float]
    mn1_probability: float = 0.0
    snapshots: list[tuple[str, ProtocolState]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        def plain(x):
            return [plain(y) for y in x] if isinstance(x, (tuple, list)) else x

        return {
            "state_index": self.state_index,
            "origin": plain(self.origin),
            "outcomes": [list(o) for o in self.outcomes],
            "probability": self.probability,
            "offsets": list(self.offsets),
            "identified_block": plain(self.identified_block),
            "identified_index": plain(self.identified_index),
            "success": self.success,
            "ebits": self.ebits,
            "mn1_probability": self.mn1_probability,
            "notes": self.notes,
        }


@dataclass(frozen=True)
class _Ctx:
    offsets: tuple[int, ...] = ()
    alice_done: bool = False
    block: tuple | None = None
    step: int = 0
    fourier: tuple[tuple[int, int], ...] = ()
    readout: tuple[tuple[int, int | None], ...] = ()
    mn1: float = 0.0


def _plan(block: SymbolicBlock) -> list[tuple[str, int]]:
    plan = [("A", 0)] if block.labels[0].spread else []
    for j, kind in enumerate(block.labels[1:], start=1):
        if kind.spread:
            plan += [("F", j), ("R", j)]
    return plan


def _next_key(ctx: _Ctx, s: StateSet) -> tuple | None:
    """Parameters of the next measurement on this branch, or None at a leaf."""
    if len(ctx.offsets) < s.n - 1:
        return ("M", len(ctx.offsets) + 1)
    if not ctx.alice_done:
        return ("Mn", ctx.offsets)
    if ctx.block is None:
        return None
    block = s.block(ctx.block)
    plan = _plan(block)
    if ctx.step >= len(plan):
        return None
    kind, j = plan[ctx.step]
    if kind == "A":
        return ("A", block.labels[0])
    if kind == "F":
        return ("F", j)
    return ("R", j, block.labels[j], ctx.offsets[j - 1], dict(ctx.fourier)[j])


def _build_measurement(key: tuple, s: StateSet) -> MeasurementSpec:
    kind = key[0]
    if kind == "M":
        return bob_measurement(key[1], s.dims[key[1]])
    if kind == "Mn":
        return alice_measurement(s, key[1])
    if kind == "A":
        return alice_readout(key[1], s.dims[0])
    if kind == "F":
        return alice_fourier(key[1])
    _, j, label, offset, shift = key
    return bob_readout(j, label, s.dims[j], offset, shift)


def _advance(ctx: _Ctx, key: tuple, value: object, mn1: float) -> _Ctx:
    kind = key[0]
    if kind == "M":
        return replace(ctx, offsets=ctx.offsets + (value,))
    if kind == "Mn":
        return replace(ctx, alice_done=True, block=value, mn1=mn1)
    if kind == "F":
        return replace(ctx, step=ctx.step + 1, fourier=ctx.fourier + ((key[1], value),))
    party = 0 if kind == "A" else key[1]
    return replace(ctx, step=ctx.step + 1, readout=ctx.readout + ((party, value),))


def state_at(s: StateSet, index: int) -> ProductState:
    """State ``index`` of ``s.expand()`` without expanding the other blocks."""
    if not 0 <= index < s.cardinality:
        raise IndexError(f"state index {index} outside 0..{s.cardinality - 1}")
    for b in s.blocks:
        if index < b.size:
            return b.expand()[index]
        index -= b.size
    raise AssertionError("unreachable")


def run_protocol(
    s: StateSet,
    state_index: int,
    policy: str = "exhaustive",
    seed: int | None = None,
    trials: int = 1,
    tol: Tolerance = DEFAULT_TOL,
    record_states: bool = False,
    strict: bool = True,
) -> list[ProtocolTranscript]:
    """Run the protocol on one state of ``s``.

    ``exhaustive`` walks every branch with nonzero probability; ``sampled``
    draws ``trials`` independent runs from a seeded generator.
    """
    target = state_at(s, state_index)
    if policy not in ("exhaustive", "sampled"):
        raise ValueError(f"unknown policy {policy!r}")
    if s.n < 2:
        raise ValueError("need at least two parties")
    costs = ebit_costs(s.dims)
    ledger = {"consumed": costs["protocol"], "teleport_baseline": costs["teleport"]}
    notes = []
    if any(d > 3 for d in s.dims):
        notes.append("within-block readout for d > 3 uses the Fourier completion")
    start = attach_entanglement(target)
    out: list[ProtocolTranscript] = []
    cache: dict = {}

    def leaf(ctx: _Ctx, prob: float, outcomes, snaps):
        index = None
        if ctx.block is not None:
            values = [v for _, v in sorted(ctx.readout)]
            index = None if any(v is None for v in values) else tuple(values)
        success = ctx.block == target.origin[0] and index == tuple(target.origin[1])
        tr = ProtocolTranscript(
            state_index, target.origin, list(outcomes), prob, ctx.offsets, ctx.block, index, success,
            dict(ledger), ctx.mn1, list(snaps), list(notes),
        )
        if strict and not success:
            raise ProtocolFailure(f"state {state_index} misidentified on branch {outcomes}", tr)
        out.append(tr)

    def walk(ps: ProtocolState, ctx: _Ctx, prob: float, outcomes: tuple, snaps: tuple, rng):
        key = _next_key(ctx, s)
        if key is None:
            leaf(ctx, prob, outcomes, snaps)
            return
        if key not in cache:
            cache[key] = _build_measurement(key, s)
        m = cache[key]
        branches = apply_measurement(ps, m, tol)
        mn1 = _apply(ps, m, m.operators[-1]).norm2() / ps.norm2() if key[0] == "Mn" else ctx.mn1
        if rng is not None:
            p = np.array([b.probability for b in branches])
            branches = [branches[int(rng.choice(len(branches), p=p / p.sum()))]]
        for b in branches:
            nsnaps = snaps + ((f"{m.name}:{b.label}", b.state),) if record_states else snaps
            walk(b.state, _advance(ctx, key, b.value, mn1), prob * b.probability, outcomes + ((m.name, b.label, b.probability),), nsnaps, rng)

    if policy == "exhaustive":
        walk(start, _Ctx(), 1.0, (), (), None)
    else:
        rng = np.random.default_rng(seed)
        for _ in range(trials):
            walk(start, _Ctx(), 1.0, (), (), rng)
    return out


def simulate_sampled(s: StateSet, trials: int, seed: int, tol: Tolerance = DEFAULT_TOL, strict: bool = True) -> list[ProtocolTranscript]:
    """``trials`` runs, each on a uniformly drawn state with sampled branches."""
    rng = np.random.default_rng(seed)
    total = s.cardinality
    out = []
    for _ in range(trials):
        k = int(rng.integers(total))
        sub_seed = int(rng.integers(2**32))
        out.extend(run_protocol(s, k, "sampled", seed=sub_seed, tol=tol, strict=strict))
    return out
