from __future__ import annotations

import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqn.construction import build_E, build_F, build_O
from sqn.relations import relabel_flip
from sqn.states import computational_basis
from sqn.structure import (
    CONDITION_I_INTERPRETATION,
    BoxBlock,
    NoUPIError,
    PIRecord,
    blocks_from_states,
    blocks_of,
    build_set_sequence,
    check_conditions,
    complement,
    find_pi,
    is_connected,
    projection_box,
    strong_nonlocality_structural,
)


def f(*xs):
    return frozenset(xs)


def test_projection_box_examples():
    e4 = build_E(4)
    c1 = e4.block(("C", (1,)))
    assert projection_box(c1, (1,)).sets == (f(0, 1),)
    assert projection_box(c1, (2, 3, 4)).cells() == {(0, 0, 0)}
    d = e4.block(("D", (2, 3, 4)))
    assert projection_box(d, (2, 3, 4)).sets == (f(0, 1), f(1, 2), f(0, 1))


def test_projection_box_matches_state_support():
    s = build_F((3, 4, 5, 3))
    X = (2, 4)
    for b in s.blocks:
        cells = set()
        for st_ in b.expand():
            parts = [np.flatnonzero(np.abs(st_.factors[t - 1]) > 1e-12) for t in X]
            cells |= set(itertools.product(*(p.tolist() for p in parts)))
        assert cells == projection_box(b, X).cells()


def test_connectivity_small_cases():
    a = BoxBlock("a", "a", (f(0), f(0)))
    b = BoxBlock("b", "b", (f(1), f(1)))
    assert is_connected([a], (2,)).connected
    conn = is_connected([a, b], (2,))
    assert not conn.connected and conn.witness == (["a"], ["b"])


def test_e4_connected_on_last_three():
    assert is_connected(blocks_of(build_E(4)), (2, 3, 4)).connected


@pytest.mark.parametrize("dims", [(3, 3, 3, 3), (3, 4, 3, 5), (5, 4, 3, 3, 4, 3)])
def test_every_block_of_one_class_covered_by_the_other(dims):
    s = build_F(dims)
    X = complement((1,), len(dims))
    for cls, other in (("C", "D"), ("D", "C")):
        union = set()
        for b in s.blocks:
            if b.cls == other:
                union |= projection_box(b, X).cells()
        for b in s.blocks:
            if b.cls == cls:
                assert projection_box(b, X).cells() <= union


def test_upi_for_first_block():
    blocks = blocks_of(build_E(4))
    c1 = next(b for b in blocks if b.id == ("C", (1,)))
    rec = find_pi(c1, (2, 3, 4), blocks)
    assert rec is not None and rec.upi_flag and rec.witness is not None
    assert all(m != c1.id for m in rec.covering)


def test_pi_members_cover_target():
    blocks = blocks_of(build_E(4))
    X = (2, 3, 4)
    for tgt in blocks:
        rec = find_pi(tgt, X, blocks)
        assert rec is not None
        need = projection_box(tgt, X).cells()
        got = set()
        for m in rec.covering:
            got |= projection_box(next(b for b in blocks if b.id == m), X).cells()
        assert need <= got
        for m in rec.covering:
            box = next(b for b in blocks if b.id == m).box
            assert rec.common_point[0] in box[0]


def test_single_block_has_no_pi():
    blocks = blocks_of(build_E(4))[:1]
    assert find_pi(blocks[0], (2, 3, 4), blocks) is None


def test_set_sequence_covers_e4():
    seq = build_set_sequence(blocks_of(build_E(4)), (2, 3, 4))
    assert seq.exhaustive
    assert sorted(x for g in seq.groups for x in g) == sorted(b.id for b in blocks_of(build_E(4)))


def test_set_sequence_artificial_cases():
    a = BoxBlock("a", "a", (f(0), f(0)))
    seq = build_set_sequence([a], (2,), pi={"a": PIRecord("a", [], (0,), True)})
    assert len(seq.groups) == 1
    b = BoxBlock("b", "b", (f(0), f(1)))
    seq = build_set_sequence([a, b], (2,), pi={"a": PIRecord("a", [], (0,), True), "b": None})
    assert seq.leftover == ["b"]
    with pytest.raises(NoUPIError):
        build_set_sequence([a, b], (2,), pi={"a": None, "b": None})


@pytest.mark.parametrize("i", [1, 2, 3, 4])
def test_e4_conditions(i):
    rep = check_conditions(blocks_of(build_E(4)), complement((i,), 4))
    assert rep.i.passed and rep.ii.passed and rep.iii.passed and rep.iv.passed


def test_e6_certified():
    v = strong_nonlocality_structural(build_E(6))
    assert v.verdict == "certified" and len(v.parties) == 6


def test_basis_fails_some_condition():
    blocks = blocks_from_states(computational_basis((3, 3, 3)))
    rep = check_conditions(blocks, (2, 3))
    assert not rep.all_pass
    assert not rep.iv.passed


def test_blocks_from_states_needs_spanning_groups():
    states = build_E(4).expand()
    with pytest.raises(ValueError):
        blocks_from_states(states[:1] + states[2:])
    assert len(blocks_from_states(states)) == 16


def test_condition_i_interpretation_recorded():
    assert "containment" in CONDITION_I_INTERPRETATION
    rep = check_conditions(blocks_of(build_E(4)), (2, 3, 4))
    assert rep.as_dict()["i"]["passed"]


def test_odd_set_is_out_of_claim():
    v = strong_nonlocality_structural(build_O((3, 3, 3)))
    assert not v.in_claim


@settings(max_examples=15, deadline=None)
@given(dims=st.lists(st.integers(3, 5), min_size=4, max_size=4), data=st.data())
def test_connectivity_invariant_under_order_and_flip(dims, data):
    s = build_F(dims)
    i = data.draw(st.integers(1, 4))
    pivot = data.draw(st.integers(0, 4))
    X = complement((i,), 4)
    blocks = blocks_of(s)
    shuffled = blocks[:]
    random.Random(data.draw(st.integers(0, 1000))).shuffle(shuffled)
    base = is_connected(blocks, X).connected
    assert is_connected(shuffled, X).connected == base
    assert is_connected(blocks_of(relabel_flip(s, pivot)), X).connected == base


@settings(max_examples=10, deadline=None)
@given(dims=st.lists(st.integers(3, 5), min_size=4, max_size=4))
def test_random_four_party_sets_certified(dims):
    assert strong_nonlocality_structural(build_F(dims)).verdict == "certified"
