"""Exact-diagonalization backend for the uniform nearest-neighbor XX
chain: full-register evolution, receiver reduction, transfer-supermatrix
extraction and block-scaling verification.

The Hamiltonian conserves total I_z, so the propagator is built
sector-by-sector in the flipped-spin-number decomposition.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .coherence import order_matrix
from .errors import BlockscaleError, CapacityError
from .qmat import ChainSpec, as_matrix, flipped_count, thermal_diagonal

ED_LIMIT = 12


def _check_capacity(spec, limit=ED_LIMIT):
    if spec.n_sites > limit:
        raise CapacityError(
            f"{spec.n_sites} sites exceeds the exact-diagonalization limit of "
            f"{limit}; use the free-fermion backend (evolve_ff) instead"
        )


def build_hamiltonian(spec, limit=ED_LIMIT):
    """Dense XX Hamiltonian on the full 2^N register.

    Nonzero only between basis states related by a 01 <-> 10 swap on a
    nearest-neighbor bond, with amplitude coupling/2.
    """
    _check_capacity(spec, limit)
    n = spec.n_sites
    dim = 1 << n
    h = np.zeros((dim, dim))
    half = 0.5 * spec.coupling
    states = np.arange(dim)
    for i in range(n - 1):
        # site i+1 (1-based) is bit n-1-i; bond couples bits b1 > b2
        b1 = n - 1 - i
        b2 = n - 2 - i
        bit1 = (states >> b1) & 1
        bit2 = (states >> b2) & 1
        movers = states[bit1 != bit2]
        flipped = movers ^ ((1 << b1) | (1 << b2))
        h[movers, flipped] += half
    return h


def total_iz(n_sites):
    """Diagonal of the total I_z operator (aligned spins count +1/2)."""
    k = flipped_count(np.arange(1 << n_sites), n_bits=n_sites)
    return 0.5 * n_sites - k


@lru_cache(maxsize=8)
def _propagator(n_sites, coupling, t):
    """Full-register propagator exp(-iHt), assembled from the
    eigendecomposition of each flipped-spin-number sector."""
    spec = ChainSpec(n_sites=n_sites, coupling=coupling)
    h = build_hamiltonian(spec)
    dim = 1 << n_sites
    exc = flipped_count(np.arange(dim), n_bits=n_sites)
    u = np.zeros((dim, dim), dtype=complex)
    for k in range(n_sites + 1):
        idx = np.where(exc == k)[0]
        hk = h[np.ix_(idx, idx)]
        w, v = np.linalg.eigh(hk)
        u[np.ix_(idx, idx)] = (v * np.exp(-1j * w * t)) @ v.conj().T
    return u


def evolve_receiver(rho_s, spec, limit=ED_LIMIT):
    """Receiver reduced state at the transfer time, starting from
    ``rho_s (x) thermal background`` on the full chain."""
    _check_capacity(spec, limit)
    m = as_matrix(rho_s)
    if m.shape != (4, 4):
        raise BlockscaleError(f"sender state must be 4x4, got {m.shape}")
    n = spec.n_sites
    d_back = thermal_diagonal(n - 2, spec.b_field)
    rho0 = np.kron(m, np.diag(d_back).astype(complex))
    u = _propagator(n, spec.coupling, spec.transfer_time)
    rho_t = u @ rho0 @ u.conj().T
    # keep the two least significant qubits (sites N-1, N)
    d_rest = 1 << (n - 2)
    r = rho_t.reshape(d_rest, 4, d_rest, 4)
    return np.einsum("xnxm->nm", r)


@dataclass(frozen=True)
class TransferSupermatrix:
    """The 16x16 linear map sending the vectorized (row-major) sender
    two-qubit state to the receiver two-qubit state at the transfer
    time."""

    entries: np.ndarray
    chain: ChainSpec

    def apply(self, rho_s):
        m = as_matrix(rho_s)
        return (self.entries @ m.reshape(16)).reshape(4, 4)

    def to_json(self):
        c = self.chain
        return json.dumps(
            {
                "chain": {
                    "n_sites": c.n_sites,
                    "coupling": c.coupling,
                    "b_field": c.b_field,
                    "transfer_time": c.transfer_time,
                },
                "entries_re": self.entries.real.tolist(),
                "entries_im": self.entries.imag.tolist(),
            }
        )

    @staticmethod
    def from_json(text):
        obj = json.loads(text)
        entries = np.array(obj["entries_re"]) + 1j * np.array(obj["entries_im"])
        return TransferSupermatrix(entries=entries, chain=ChainSpec(**obj["chain"]))


def check_invariants(t_sm, tol=1e-10):
    """Trace preservation, Hermiticity preservation and coherence-order
    block-diagonality of a transfer supermatrix.  Returns a dict of
    residuals."""
    t = t_sm.entries
    # trace preservation: sum_n T_{nn,ij} = delta_ij
    tr_map = t.reshape(4, 4, 4, 4)
    trace_res = np.abs(np.einsum("nnij->ij", tr_map) - np.eye(4)).max()
    # Hermiticity preservation: T(X^dag) = T(X)^dag for elementary X
    herm_res = 0.0
    for i in range(4):
        for j in range(4):
            x = np.zeros((4, 4), dtype=complex)
            x[i, j] = 1.0
            herm_res = max(
                herm_res, np.abs(t_sm.apply(x.conj().T) - t_sm.apply(x).conj().T).max()
            )
    o = order_matrix(4)
    order_res = 0.0
    for n in range(-2, 3):
        mask = (o == n).reshape(16)
        block_in = t[:, mask]
        order_res = max(order_res, np.abs(block_in[~mask, :]).max(initial=0.0))
    return {
        "trace": float(trace_res),
        "hermiticity": float(herm_res),
        "order_blocks": float(order_res),
        "ok": bool(max(trace_res, herm_res, order_res) <= tol),
    }


def transfer_supermatrix(spec, limit=ED_LIMIT):
    """Transfer supermatrix from 16 elementary-matrix evolutions.

    Uses the product structure of the initial state: for sender input
    |i><j| the evolved full state is B_i diag(d) B_j^dag with
    B_i = U[:, i-block], so only the reduced 4x4 output is ever formed.
    """
    _check_capacity(spec, limit)
    n = spec.n_sites
    d_back = thermal_diagonal(n - 2, spec.b_field)
    u = _propagator(n, spec.coupling, spec.transfer_time)
    m_back = 1 << (n - 2)
    sq = np.sqrt(d_back)
    d_rest = 1 << (n - 2)
    blocks = []
    for i in range(4):
        b = u[:, i * m_back : (i + 1) * m_back] * sq[None, :]
        blocks.append(b.reshape(d_rest, 4, m_back))
    t = np.zeros((16, 16), dtype=complex)
    for i in range(4):
        for j in range(4):
            red = np.einsum("xnk,xmk->nm", blocks[i], blocks[j].conj())
            t[:, 4 * i + j] = red.reshape(16)
    return TransferSupermatrix(entries=t, chain=spec)


@dataclass(frozen=True)
class ScalingReport:
    """Fitted per-block scale factors of a family under its own chain
    evolution, with relative off-fit residuals."""

    family_case: str
    n_sites: int
    fitted: dict
    residuals: dict

    def max_residual(self):
        return max(self.residuals.values())


def _fit_scale(template, image):
    t = template.reshape(16)
    w = image.reshape(16)
    lam = float((np.vdot(t, w) / np.vdot(t, t)).real)
    res = float(np.linalg.norm(w - lam * t) / np.linalg.norm(t))
    return lam, res


def verify_block_scaling(f, transfer=None, limit=ED_LIMIT):
    """Evolve each coherence-block template of a family through the
    transfer supermatrix and fit the per-block scale factor.

    ``transfer`` may be a precomputed TransferSupermatrix (e.g. from the
    free-fermion backend); otherwise the ED backend is used, subject to
    its site-count limit.
    """
    if transfer is None:
        transfer = transfer_supermatrix(f.chain_spec, limit=limit)
    fitted = {}
    residuals = {}
    e4 = f.template_fixed
    image0 = transfer.apply(e4 + f.template0) - e4
    fitted[0], residuals[0] = _fit_scale(f.template0, image0)
    for n, tmpl in ((1, f.template1), (2, f.template2)):
        if tmpl is None:
            continue
        fitted[n], residuals[n] = _fit_scale(tmpl, transfer.apply(tmpl))
    return ScalingReport(
        family_case=f.case_id, n_sites=f.n_sites, fitted=fitted, residuals=residuals
    )
