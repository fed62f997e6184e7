from __future__ import annotations

import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqn.states import (
    CapExceededError,
    DimensionMismatchError,
    InvalidLabelError,
    Kind,
    LocalLabel,
    ProductState,
    Tolerance,
    basis_vector,
    canonical_vector,
    computational_basis,
    inner_product,
    local_vector,
    max_overlap,
    root_of_unity,
    same_ray,
    support,
    tensor_expand,
)


def ps(*factors):
    return ProductState(tuple(np.array(f, dtype=complex) for f in factors))


def test_qutrit_labels_expand_to_signed_pairs():
    assert np.array_equal(local_vector(LocalLabel.zero(), 3), [1, 0, 0])
    assert np.array_equal(local_vector(LocalLabel.top(), 3), [0, 0, 1])
    assert np.array_equal(local_vector(LocalLabel.alpha(0), 3), [1, 1, 0])
    assert np.array_equal(local_vector(LocalLabel.alpha(1), 3), [1, -1, 0])
    assert np.array_equal(local_vector(LocalLabel.beta(0), 3), [0, 1, 1])
    assert np.array_equal(local_vector(LocalLabel.beta(1), 3), [0, 1, -1])


def test_beta_one_in_four_dimensions():
    w = cmath.exp(2j * cmath.pi / 3)
    assert np.allclose(local_vector(LocalLabel.beta(1), 4), [0, 1, w, w**2], atol=1e-15)


def test_label_index_out_of_range():
    with pytest.raises(InvalidLabelError):
        local_vector(LocalLabel.alpha(2), 3)
    with pytest.raises(InvalidLabelError):
        local_vector(LocalLabel.beta(-1), 4)


def test_local_vectors_are_read_only():
    v = local_vector(LocalLabel.alpha(0), 3)
    with pytest.raises(ValueError):
        v[0] = 5


def test_roots_of_unity_exact_on_axes():
    assert root_of_unity(2, 1) == -1
    assert root_of_unity(4, 1) == 1j
    assert root_of_unity(4, 3) == -1j
    assert root_of_unity(3, 3) == 1


def test_inner_product_examples():
    assert inner_product(ps([1, 0, 0], [1, 0, 0]), ps([1, 0, 0], [0, 0, 1])) == 0
    assert inner_product(ps([1, 1, 0], [1, 0, 0]), ps([1, -1, 0], [1, 0, 0])) == 0
    a1 = ProductState((local_vector(LocalLabel.alpha(1), 4),))
    a2 = ProductState((local_vector(LocalLabel.alpha(2), 4),))
    assert abs(inner_product(a1, a2)) < 1e-12


def test_inner_product_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        inner_product(ps([1, 0, 0]), ps([1, 0, 0, 0]))


def test_tensor_expand_row_major():
    assert np.flatnonzero(tensor_expand(ps([1, 0, 0], [0, 1, 0]))).tolist() == [1]
    assert np.flatnonzero(tensor_expand(ps([1, 1, 0], [0, 0, 1]))).tolist() == [2, 5]
    assert np.flatnonzero(tensor_expand(ps([1, 1, 0], [0, 1, 1]))).tolist() == [1, 2, 4, 5]


def test_tensor_expand_cap():
    with pytest.raises(CapExceededError):
        tensor_expand(ps(*[[1, 0, 0]] * 5), cap=100)


def test_zero_factor_rejected():
    with pytest.raises(ValueError):
        ps([0, 0, 0])


def test_tolerance_must_be_positive():
    with pytest.raises(ValueError):
        Tolerance(abs_zero=0)


def test_canonical_vector_makes_lead_positive():
    v = canonical_vector(np.array([0, -2j, 1]))
    assert v[1] == 2 and v[2] == 1j


def test_same_ray_ignores_global_phase():
    a = ps([1, 1, 0], [0, 0, 1])
    b = ps([-1, -1, 0], [0, 0, 1j])
    assert same_ray(a, b)
    assert not same_ray(a, ps([1, -1, 0], [0, 0, 1]))


def test_support_threshold():
    assert support(np.array([1e-12, 1, 0])) == frozenset({1})


def test_computational_basis_order_and_origin():
    basis = computational_basis((3, 3))
    assert len(basis) == 9
    assert basis[5].origin == (("basis",), (1, 2))
    assert np.array_equal(basis[5].factors[1], basis_vector(3, 2))


def test_max_overlap_reports_pair():
    states = [ps([1, 0, 0]), ps([0, 1, 0]), ps([1, 1, 0])]
    worst, pair = max_overlap(states)
    assert worst == 1 and pair in ((0, 2), (1, 2))


dims = st.integers(min_value=3, max_value=7)


@given(d=dims, data=st.data())
def test_spread_vectors_orthogonal(d, data):
    kind = data.draw(st.sampled_from([Kind.ALPHA, Kind.BETA]))
    k = data.draw(st.integers(0, d - 2))
    l = data.draw(st.integers(0, d - 2))
    u, v = local_vector(LocalLabel(kind, k), d), local_vector(LocalLabel(kind, l), d)
    expected = d - 1 if k == l else 0
    assert abs(np.vdot(u, v) - expected) < 1e-10


@given(d=dims, data=st.data())
def test_spread_amplitudes_unit_modulus_on_support(d, data):
    kind = data.draw(st.sampled_from([Kind.ALPHA, Kind.BETA]))
    k = data.draw(st.integers(0, d - 2))
    v = local_vector(LocalLabel(kind, k), d)
    sup = range(d - 1) if kind is Kind.ALPHA else range(1, d)
    assert np.allclose(np.abs(v[list(sup)]), 1)
    assert np.count_nonzero(np.abs(v) > 1e-12) == d - 1


def _random_state(draw, shape):
    factors = []
    for d in shape:
        re = draw(st.lists(st.floats(-2, 2), min_size=d, max_size=d))
        im = draw(st.lists(st.floats(-2, 2), min_size=d, max_size=d))
        f = np.array(re) + 1j * np.array(im)
        if not np.any(np.abs(f) > 1e-3):
            f[0] = 1
        factors.append(f)
    return ProductState(tuple(factors))


@settings(max_examples=50)
@given(data=st.data())
def test_inner_product_hermitian_and_matches_dense(data):
    shape = data.draw(st.lists(st.integers(2, 4), min_size=1, max_size=3))
    a = _random_state(data.draw, shape)
    b = _random_state(data.draw, shape)
    ab, ba = inner_product(a, b), inner_product(b, a)
    assert abs(ab - ba.conjugate()) <= 1e-10 * max(1, abs(ab))
    dense = np.vdot(tensor_expand(a), tensor_expand(b))
    assert abs(dense - ab) <= 1e-10 * max(1, abs(ab))
