"""Plane tiles: block boxes drawn on a (party i levels) x (other parties, row-major) grid.

ASCII and SVG output are both rendered from the same rectangle list.
"""

from __future__ import annotations

import itertools
import math
import string
from dataclasses import dataclass
from html import escape

from .construction import StateSet, middle_box

_SYMBOLS = string.ascii_letters + string.digits


@dataclass(frozen=True)
class Rect:
    block: str
    row0: int
    row1: int
    col0: int
    col1: int

    def cells(self) -> set[tuple[int, int]]:
        return {(r, c) for r in range(self.row0, self.row1) for c in range(self.col0, self.col1)}


@dataclass
class TileModel:
    party: int
    dims: tuple[int, ...]
    n_rows: int
    n_cols: int
    blocks: list[str]
    rects: list[Rect]
    disjoint: bool
    uncovered: set[tuple[int, int]]
    expected_uncovered: set[tuple[int, int]]

    @property
    def ok(self) -> bool:
        return self.disjoint and self.uncovered == self.expected_uncovered

    @property
    def other_dims(self) -> tuple[int, ...]:
        return self.dims[: self.party - 1] + self.dims[self.party:]

    def cells_by_block(self) -> dict[str, set[tuple[int, int]]]:
        out: dict[str, set[tuple[int, int]]] = {b: set() for b in self.blocks}
        for r in self.rects:
            out[r.block] |= r.cells()
        return out


def _runs(values: list[int]) -> list[tuple[int, int]]:
    out = []
    for _, grp in itertools.groupby(enumerate(sorted(values)), key=lambda p: p[1] - p[0]):
        g = [v for _, v in grp]
        out.append((g[0], g[-1] + 1))
    return out


def _ravel(cell, dims) -> int:
    idx = 0
    for c, d in zip(cell, dims):
        idx = idx * d + c
    return idx


def build_tile_model(s: StateSet, party: int) -> TileModel:
    if not 1 <= party <= s.n:
        raise ValueError(f"party {party} outside 1..{s.n}")
    if s.n < 2:
        raise ValueError("tiling needs at least two parties")
    i = party - 1
    others = s.dims[:i] + s.dims[i + 1:]
    n_rows, n_cols = s.dims[i], math.prod(others)
    rects, seen, disjoint = [], set(), True
    for b in s.blocks:
        box = b.box()
        rows = sorted(box[i])
        cols = [_ravel(c, others) for c in itertools.product(*(sorted(x) for x in box[:i] + box[i + 1:]))]
        for r0, r1 in _runs(rows):
            for c0, c1 in _runs(cols):
                rect = Rect(b.name, r0, r1, c0, c1)
                cells = rect.cells()
                if cells & seen:
                    disjoint = False
                seen |= cells
                rects.append(rect)
    full = {(r, c) for r in range(n_rows) for c in range(n_cols)}
    mid = middle_box(s.dims)
    expected = {
        (r, _ravel(c, others))
        for r in mid[i]
        for c in itertools.product(*(sorted(x) for x in mid[:i] + mid[i + 1:]))
    }
    return TileModel(party, s.dims, n_rows, n_cols, [b.name for b in s.blocks], rects, disjoint, full - seen, expected)


def _symbols(blocks: list[str]) -> dict[str, str]:
    width = 1
    while len(_SYMBOLS) ** width < len(blocks):
        width += 1
    out = {}
    for k, name in enumerate(blocks):
        sym = ""
        for _ in range(width):
            k, r = divmod(k, len(_SYMBOLS))
            sym = _SYMBOLS[r] + sym
        out[name] = sym
    return out


def render_ascii(model: TileModel) -> str:
    sym = _symbols(model.blocks)
    width = len(next(iter(sym.values()), "."))
    grid = [["." * width] * model.n_cols for _ in range(model.n_rows)]
    for rect in model.rects:
        for r, c in rect.cells():
            grid[r][c] = sym[rect.block]
    sep = " " if width > 1 else ""
    lines = [f"party {model.party} levels (rows) x parties {_other_names(model)} row-major (columns)"]
    for r in range(model.n_rows):
        lines.append(f"{r:>2} | " + sep.join(grid[r]))
    lines.append("legend: " + ", ".join(f"{sym[b]}={b}" for b in model.blocks) + f", {'.' * width}=uncovered")
    return "\n".join(lines) + "\n"


def parse_ascii(text: str) -> dict[str, set[tuple[int, int]]]:
    """Cells per block recovered from an ASCII tile."""
    lines = text.splitlines()
    legend = dict(p.split("=", 1) for p in lines[-1][len("legend: "):].split(", "))
    out: dict[str, set[tuple[int, int]]] = {name: set() for k, name in legend.items() if name != "uncovered"}
    width = len(next(iter(legend)))
    for line in lines[1:-1]:
        head, body = line.split(" | ", 1)
        r = int(head)
        cells = body.split(" ") if width > 1 else list(body)
        for c, token in enumerate(cells):
            if legend.get(token, "uncovered") != "uncovered":
                out[legend[token]].add((r, c))
    return out


def _other_names(model: TileModel) -> str:
    return ",".join(str(t) for t in range(1, len(model.dims) + 1) if t != model.party)


def render_svg(model: TileModel, cell: int = 16) -> str:
    pad = 40
    w, h = model.n_cols * cell + 2 * pad, model.n_rows * cell + 2 * pad
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<title>tile of {escape(str(model.dims))} at party {model.party}</title>',
        f'<rect x="{pad}" y="{pad}" width="{model.n_cols * cell}" height="{model.n_rows * cell}" fill="#eeeeee" stroke="none"/>',
    ]
    # column bands for the leading coordinate of the flattened axis
    others = model.other_dims
    if len(others) > 1:
        band = model.n_cols // others[0]
        for k in range(1, others[0]):
            x = pad + k * band * cell
            out.append(f'<line x1="{x}" y1="{pad - 8}" x2="{x}" y2="{h - pad + 8}" stroke="#999999" stroke-dasharray="4 2"/>')
    n_blocks = max(len(model.blocks), 1)
    for k, name in enumerate(model.blocks):
        hue = round(360 * k / n_blocks)
        out.append(f'<g class="block" data-block="{escape(name)}"><title>{escape(name)}</title>')
        for rect in (r for r in model.rects if r.block == name):
            out.append(
                f'<rect data-r0="{rect.row0}" data-r1="{rect.row1}" data-c0="{rect.col0}" data-c1="{rect.col1}" '
                f'x="{pad + rect.col0 * cell}" y="{pad + rect.row0 * cell}" '
                f'width="{(rect.col1 - rect.col0) * cell}" height="{(rect.row1 - rect.row0) * cell}" '
                f'fill="hsl({hue},60%,70%)" stroke="#333333" stroke-width="1"/>'
            )
        out.append("</g>")
    for r in range(model.n_rows):
        out.append(f'<text x="{pad - 6}" y="{pad + r * cell + cell * 0.7:.1f}" font-size="10" text-anchor="end">{r}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def parse_svg_rects(text: str) -> list[Rect]:
    import re

    rects = []
    for group in re.finditer(r'<g class="block" data-block="([^"]*)">(.*?)</g>', text, re.S):
        for m in re.finditer(r'data-r0="(\d+)" data-r1="(\d+)" data-c0="(\d+)" data-c1="(\d+)"', group.group(2)):
            rects.append(Rect(group.group(1), *map(int, m.groups())))
    return rects
