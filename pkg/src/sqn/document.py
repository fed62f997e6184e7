"""Text format for state sets (schema ``sqn/1``) and check reports.

Documents are JSON. Blocks are symbolic; expanded amplitudes are optional
and written as ``[re, im]`` pairs with 17 significant digits, so
serialize -> parse -> serialize is byte-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .construction import StateSet, SymbolicBlock, block_from_labels, build_family
from .states import InvalidLabelError, Kind, ProductState, computational_basis

SCHEMA = "sqn/1"


class DocumentError(ValueError):
    pass


@dataclass
class StateSetDocument:
    name: str
    family: str
    dims: tuple[int, ...]
    blocks: list[SymbolicBlock] = field(default_factory=list)
    states: list[ProductState] | None = None

    @property
    def has_blocks(self) -> bool:
        return bool(self.blocks)

    def to_state_set(self) -> StateSet:
        if not self.blocks:
            raise DocumentError(f"document {self.name!r} has no symbolic blocks")
        return StateSet(self.name, self.dims, tuple(self.blocks), self.family)

    def product_states(self) -> list[ProductState]:
        """Stored amplitudes when present, otherwise the block expansion."""
        if self.states is not None:
            return list(self.states)
        return self.to_state_set().expand()


def document_from_set(s: StateSet, amplitudes: bool = False) -> StateSetDocument:
    return StateSetDocument(s.name, s.family, s.dims, list(s.blocks), s.expand() if amplitudes else None)


def basis_document(dims: Sequence[int]) -> StateSetDocument:
    dims = tuple(dims)
    return StateSetDocument(f"basis{dims}", "basis", dims, [], computational_basis(dims))


def generate_document(family: str, dims: Sequence[int], amplitudes: bool = False) -> StateSetDocument:
    if family == "basis":
        return basis_document(dims)
    return document_from_set(build_family(family, dims), amplitudes)


def _num(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise DocumentError(f"non-finite amplitude {x}")
    if x == 0:
        x = 0.0
    return format(x, ".17g")


def _json_origin(origin: Any) -> Any:
    if isinstance(origin, (tuple, list)):
        return [_json_origin(o) for o in origin]
    if isinstance(origin, (np.integer,)):
        return int(origin)
    return origin


def _tuple_origin(origin: Any) -> Any:
    if isinstance(origin, list):
        return tuple(_tuple_origin(o) for o in origin)
    return origin


def serialize(doc: StateSetDocument) -> str:
    blocks = sorted(doc.blocks, key=SymbolicBlock.sort_key)
    lines = [
        "{",
        f'  "schema": {json.dumps(SCHEMA)},',
        f'  "name": {json.dumps(doc.name)},',
        f'  "family": {json.dumps(doc.family)},',
        f'  "dims": {json.dumps(list(doc.dims))},',
    ]
    body = [
        json.dumps({"class": b.cls, "q": list(b.q), "labels": [k.value for k in b.labels]}) for b in blocks
    ]
    lines.append('  "blocks": [' + ("\n    " + ",\n    ".join(body) + "\n  " if body else "") + "]" + ("," if doc.states is not None else ""))
    if doc.states is not None:
        rows = []
        for s in doc.states:
            factors = ", ".join(
                "[" + ", ".join(f"[{_num(a.real)}, {_num(a.imag)}]" for a in f) + "]" for f in s.factors
            )
            rows.append(f'{{"origin": {json.dumps(_json_origin(s.origin))}, "factors": [{factors}]}}')
        lines.append('  "states": [' + ("\n    " + ",\n    ".join(rows) + "\n  " if rows else "") + "]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def parse(text: str) -> StateSetDocument:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"not valid JSON: {exc}") from exc
    if not isinstance(raw, dict) or raw.get("schema") != SCHEMA:
        raise DocumentError(f"expected schema {SCHEMA!r}")
    try:
        dims = tuple(int(d) for d in raw["dims"])
        name, family = str(raw["name"]), str(raw["family"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"bad header: {exc}") from exc
    if not dims or any(d < 3 for d in dims):
        raise DocumentError(f"every dimension must be >= 3, got {dims}")
    blocks = []
    for entry in raw.get("blocks", []):
        try:
            labels = [Kind(k) for k in entry["labels"]]
        except (KeyError, ValueError) as exc:
            raise DocumentError(f"bad block {entry}: {exc}") from exc
        if len(labels) != len(dims):
            raise DocumentError(f"block {entry} has {len(labels)} labels for {len(dims)} parties")
        b = block_from_labels(labels, dims)
        if b.cls != entry.get("class") or list(b.q) != entry.get("q"):
            raise DocumentError(f"block {entry} has class/q inconsistent with its labels")
        blocks.append(b)
    states = None
    if "states" in raw:
        states = []
        for entry in raw["states"]:
            try:
                factors = tuple(np.array([complex(re, im) for re, im in f]) for f in entry["factors"])
                st = ProductState(factors, origin=_tuple_origin(entry.get("origin")))
            except (KeyError, TypeError, ValueError, InvalidLabelError) as exc:
                raise DocumentError(f"bad state entry: {exc}") from exc
            if st.dims != dims:
                raise DocumentError(f"state dims {st.dims} differ from {dims}")
            states.append(st)
    if not blocks and states is None:
        raise DocumentError("document has neither blocks nor states")
    return StateSetDocument(name, family, dims, blocks, states)


def load(path: str | Path) -> StateSetDocument:
    try:
        return parse(Path(path).read_text())
    except OSError as exc:
        raise DocumentError(str(exc)) from exc


def dump(doc: StateSetDocument, path: str | Path) -> None:
    Path(path).write_text(serialize(doc))


def amplitude_mismatch(doc: StateSetDocument) -> tuple[float, int | None]:
    """Largest factor deviation between stored states and the block expansion."""
    if doc.states is None or not doc.blocks:
        return 0.0, None
    expected = doc.to_state_set().expand()
    if len(expected) != len(doc.states):
        return math.inf, None
    worst, where = 0.0, None
    for k, (a, b) in enumerate(zip(doc.states, expected)):
        dev = max(float(np.max(np.abs(fa - fb))) for fa, fb in zip(a.factors, b.factors))
        if dev > worst:
            worst, where = dev, k
    return worst, where


@dataclass
class Check:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)


@dataclass
class Report:
    command: list[str]
    checks: list[Check] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def add(self, name: str, passed: bool, **details) -> Check:
        c = Check(name, bool(passed), details)
        self.checks.append(c)
        return c

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.all_pass else 1

    def as_dict(self) -> dict:
        out = {
            "command": self.command,
            "all_pass": self.all_pass,
            "checks": [{"name": c.name, "passed": c.passed, **c.details} for c in self.checks],
        }
        out.update(self.extra)
        return out

    def to_json(self) -> str:
        return json.dumps(_plain(self.as_dict()), indent=2, sort_keys=False) + "\n"

    def to_text(self) -> str:
        lines = ["$ sqn " + " ".join(self.command)]
        for c in self.checks:
            flag = "PASS" if c.passed else "FAIL"
            info = ", ".join(f"{k}={_short(v)}" for k, v in c.details.items() if not isinstance(v, (dict, list)))
            lines.append(f"[{flag}] {c.name}" + (f": {info}" if info else ""))
        lines.append("result: " + ("all checks passed" if self.all_pass else "some checks failed"))
        return "\n".join(lines) + "\n"


def _short(v: Any) -> str:
    if isinstance(v, float):
        return "inf" if math.isinf(v) else f"{v:.6g}"
    return str(v)


def _plain(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x
