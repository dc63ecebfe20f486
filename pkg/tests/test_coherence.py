import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from blockscale.coherence import (
    CoherenceDecomposition,
    apply_block_scaling,
    decompose,
    order_matrix,
    recompose,
)
from blockscale.errors import BlockscaleError


def test_order_matrix_two_qubits():
    o = order_matrix(4)
    # states 0,1,2,3 have 0,1,1,2 flipped spins
    assert o[0, 3] == 2 and o[3, 0] == -2
    assert o[0, 1] == o[0, 2] == 1
    assert o[1, 2] == 0
    np.testing.assert_array_equal(np.diag(o), 0)
    np.testing.assert_array_equal(o, -o.T)


def test_order_matrix_rejects_non_power_of_two():
    with pytest.raises(BlockscaleError):
        order_matrix(6)


complex_mats = arrays(
    np.complex128,
    (4, 4),
    elements=st.complex_numbers(
        min_magnitude=0, max_magnitude=1, allow_nan=False, allow_infinity=False
    ),
)


@given(complex_mats)
@settings(max_examples=50, deadline=None)
def test_decompose_recompose_roundtrip(m):
    dec = decompose(m)
    np.testing.assert_allclose(recompose(dec), m, atol=0)


@given(complex_mats)
@settings(max_examples=50, deadline=None)
def test_blocks_have_correct_support(m):
    dec = decompose(m)
    o = order_matrix(4)
    for n, blk in dec.blocks.items():
        assert not np.any(blk[o != n])


def test_block_accessor_returns_zeros_for_absent_order():
    dec = decompose(np.eye(4) / 4)
    assert dec.orders() == [0]
    np.testing.assert_array_equal(dec.block(2), np.zeros((4, 4)))


def test_apply_block_scaling_identity():
    rho = np.full((4, 4), 0.25, dtype=complex)
    fixed = np.diag([0.0, 0, 0, 1.0]).astype(complex)
    out = apply_block_scaling(decompose(rho), 1.0, {1: 1.0, 2: 1.0}, fixed)
    np.testing.assert_allclose(out, rho, atol=1e-15)


def test_apply_block_scaling_preserves_trace():
    rng = np.random.default_rng(3)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = m @ m.conj().T
    rho /= rho.trace()
    # unit trace makes the zero block minus the fixed part traceless
    fixed = np.diag([0.0, 0, 0, 1.0]).astype(complex)
    out = apply_block_scaling(decompose(rho), 0.7, {1: 0.3, 2: 0.1}, fixed)
    assert out.trace() == pytest.approx(1.0, abs=1e-12)


def test_apply_block_scaling_rejects_nontraceless_zero_block():
    rho = np.diag([0.25, 0.25, 0.25, 0.25]).astype(complex)
    with pytest.raises(BlockscaleError):
        apply_block_scaling(decompose(rho), 0.5, {}, np.zeros((4, 4)))


def test_scaled_orders_off_block_raise():
    bad = CoherenceDecomposition(dim=4, blocks={1: np.eye(4, dtype=complex)})
    with pytest.raises(BlockscaleError):
        recompose(bad)
