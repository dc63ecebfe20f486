"""Multiple-quantum coherence decomposition of density matrices.

The order of a matrix position (i, j) is ``exc(j) - exc(i)`` where
``exc`` counts flipped spins in the basis state, so the order-n block of
a q-qubit matrix connects states whose total z-projection differs by n.
Upper-triangle positions carry positive orders.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BlockscaleError
from .qmat import as_matrix, flipped_count


@lru_cache(maxsize=None)
def order_matrix(dim):
    """Matrix of coherence orders for every position of a dim x dim matrix."""
    q = dim.bit_length() - 1
    if 1 << q != dim:
        raise BlockscaleError(f"dimension {dim} is not a power of 2")
    exc = flipped_count(np.arange(dim), n_bits=q)
    o = exc[None, :] - exc[:, None]
    o.setflags(write=False)
    return o


@dataclass(frozen=True)
class CoherenceDecomposition:
    """A matrix split into coherence blocks indexed by order n."""

    dim: int
    blocks: dict

    def block(self, n):
        b = self.blocks.get(n)
        if b is None:
            b = np.zeros((self.dim, self.dim), dtype=complex)
        return b

    def orders(self):
        return sorted(self.blocks)


def decompose(rho):
    """Split ``rho`` into its coherence blocks; recompose() inverts exactly."""
    m = as_matrix(rho)
    dim = m.shape[0]
    o = order_matrix(dim)
    q = dim.bit_length() - 1
    blocks = {}
    for n in range(-q, q + 1):
        mask = o == n
        if not mask.any():
            continue
        blk = np.where(mask, m, 0.0)
        if np.any(blk):
            blocks[n] = blk
    return CoherenceDecomposition(dim=dim, blocks=blocks)


def _check_support(dec):
    o = order_matrix(dec.dim)
    for n, blk in dec.blocks.items():
        if blk.shape != (dec.dim, dec.dim):
            raise BlockscaleError(f"block {n} has shape {blk.shape}")
        if np.any(blk[o != n]):
            raise BlockscaleError(f"block {n} has support outside order-{n} positions")


def recompose(dec):
    """Exact sum of the blocks of a decomposition."""
    _check_support(dec)
    out = np.zeros((dec.dim, dec.dim), dtype=complex)
    for blk in dec.blocks.values():
        out = out + blk
    return out


def apply_block_scaling(dec, zero_scale, scales, fixed_part):
    """Scale each coherence block by its factor, keeping ``fixed_part``
    of the zero-order block untouched.

    Returns ``fixed + zero_scale*(block(0) - fixed) +
    sum_n scales[|n|]*block(n)``.  The scaled zero part must be
    traceless, which makes the result unit-trace automatically.
    """
    _check_support(dec)
    fixed = as_matrix(fixed_part)
    scaled0 = dec.block(0) - fixed
    if abs(scaled0.trace()) > 1e-10:
        raise BlockscaleError(
            f"zero-order block minus fixed part is not traceless (trace {scaled0.trace():.3e})"
        )
    out = fixed + zero_scale * scaled0
    for n, blk in dec.blocks.items():
        if n == 0:
            continue
        out = out + scales[abs(n)] * blk
    return out
