from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqn.construction import StateSet, build_E, build_F
from sqn.tiling import build_tile_model, parse_ascii, parse_svg_rects, render_ascii, render_svg


def test_e4_first_party_grid():
    m = build_tile_model(build_E(4), 1)
    assert (m.n_rows, m.n_cols) == (3, 27)
    assert len(m.blocks) == 16 and m.ok
    assert m.uncovered == {(1, 13)}


def test_two_qutrit_domino_picture():
    text = render_ascii(build_tile_model(build_F((3, 3)), 1))
    rows = [line.split(" | ")[1] for line in text.splitlines()[1:4]]
    assert rows == ["abb", "a.c", "ddc"]


@pytest.mark.parametrize("s", [build_E(4), build_E(6), build_F((3, 3, 3, 4))], ids=["E4", "E6", "F3334"])
def test_renderings_share_rectangles(s):
    for party in (1, s.n):
        m = build_tile_model(s, party)
        assert m.ok
        assert parse_ascii(render_ascii(m)) == m.cells_by_block()
        assert parse_svg_rects(render_svg(m)) == m.rects


def test_svg_header():
    svg = render_svg(build_tile_model(build_E(4), 2))
    assert svg.startswith('<?xml version="1.0"') and 'version="1.1"' in svg and svg.rstrip().endswith("</svg>")


def test_overlap_detected():
    e4 = build_E(4)
    bad = StateSet("bad", e4.dims, e4.blocks + e4.blocks[:1])
    assert not build_tile_model(bad, 1).ok


def test_party_range():
    with pytest.raises(ValueError):
        build_tile_model(build_E(4), 5)


@settings(max_examples=20, deadline=None)
@given(dims=st.lists(st.integers(3, 5), min_size=4, max_size=4), data=st.data())
def test_random_tiles_leave_middle_box(dims, data):
    party = data.draw(st.integers(1, 4))
    m = build_tile_model(build_F(dims), party)
    assert m.ok
