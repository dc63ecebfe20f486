"""Dense complex matrix algebra and quantum-state primitives.

Conventions used throughout the package:

* every site is a qubit; site 1 is the most significant bit of the
  computational-basis index;
* basis state ``|0>`` of a site means "spin aligned with the field"
  (``I_z`` eigenvalue +1/2), so basis index 0 of a register is the fully
  aligned state;
* the number of flipped spins of basis index ``s`` is ``popcount(s)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BlockscaleError, StateValidationError

TRACE_TOL = 1e-12
PSD_TOL = 1e-10
HERM_TOL = 1e-12


def flipped_count(indices, n_bits=None):
    """Number of flipped spins (set bits) for each basis index."""
    idx = np.asarray(indices)
    if n_bits is None:
        n_bits = max(int(idx.max()).bit_length(), 1) if idx.size else 1
    counts = np.zeros_like(idx)
    for b in range(n_bits):
        counts = counts + ((idx >> b) & 1)
    return counts


class DensityMatrix:
    """A validated density matrix.

    Construction symmetrizes the input, ``rho -> (rho + rho^dag)/2``, to
    absorb round-off, then enforces unit trace (1e-12) and positive
    semidefiniteness (min eigenvalue >= -1e-10).
    """

    __slots__ = ("entries",)

    def __init__(self, entries, *, psd_tol=PSD_TOL, trace_tol=TRACE_TOL):
        m = np.asarray(entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise StateValidationError(f"expected a square matrix, got shape {m.shape}")
        m = 0.5 * (m + m.conj().T)
        tr = m.trace()
        if abs(tr - 1.0) > trace_tol:
            raise StateValidationError(f"trace {tr} deviates from 1 beyond {trace_tol}")
        w = np.linalg.eigvalsh(m)
        if w[0] < -psd_tol:
            raise StateValidationError(
                f"matrix is not positive semidefinite (min eigenvalue {w[0]:.3e})",
                min_eigenvalue=float(w[0]),
            )
        m.setflags(write=False)
        self.entries = m

    @property
    def dim(self):
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


def as_matrix(rho):
    """Plain ndarray view of a DensityMatrix or array-like."""
    if isinstance(rho, DensityMatrix):
        return rho.entries
    return np.asarray(rho, dtype=complex)


@dataclass(frozen=True)
class ChainSpec:
    """Geometry and parameters of one communication line.

    The sender occupies sites 1, 2 and the receiver sites
    ``n_sites - 1``, ``n_sites``.  ``b_field`` is the dimensionless
    field-to-temperature ratio of the thermal background and
    ``transfer_time`` is measured in units of 1/coupling.
    """

    n_sites: int
    coupling: float = 1.0
    b_field: float = 0.0
    transfer_time: float = 0.0

    def __post_init__(self):
        if self.n_sites < 4:
            raise BlockscaleError("need at least 4 sites (two-qubit sender and receiver)")
        if self.coupling <= 0:
            raise BlockscaleError("coupling must be positive")
        if self.b_field < 0 or self.transfer_time < 0:
            raise BlockscaleError("b_field and transfer_time must be nonnegative")


def tensor_product(a, b):
    """Kronecker product with row-major block convention."""
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(rho, site_dims, keep):
    """Reduce ``rho`` to the sites in ``keep`` (0-based indices into
    ``site_dims``), preserving site order."""
    m = as_matrix(rho)
    dims = list(site_dims)
    n = len(dims)
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise BlockscaleError(
            f"dimension mismatch: product of site_dims is {total}, matrix is {m.shape[0]}"
        )
    keep = sorted(keep)
    if not keep:
        raise BlockscaleError("keep must be non-empty")
    t = m.reshape(dims + dims)
    # trace out the discarded sites from highest axis to lowest
    for s in reversed(range(n)):
        if s in keep:
            continue
        n_cur = t.ndim // 2
        t = np.trace(t, axis1=s, axis2=s + n_cur)
    d = int(np.prod([dims[s] for s in keep]))
    return t.reshape(d, d)


def thermal_state(n_sub, b):
    """Thermal equilibrium state ``exp(b I_z) / (2 cosh(b/2))^n_sub`` of
    ``n_sub`` qubits, as a dense diagonal matrix.

    The basis state with k flipped spins has weight
    ``exp(-b k) / (1 + exp(-b))^n_sub``; index 0 (all aligned) dominates
    for b > 0.
    """
    if n_sub < 1:
        raise BlockscaleError("n_sub must be >= 1")
    k = flipped_count(np.arange(1 << n_sub), n_bits=n_sub)
    log_w = -b * k - n_sub * np.log1p(np.exp(-b))
    return np.diag(np.exp(log_w)).astype(complex)


def thermal_diagonal(n_sub, b):
    """Diagonal of :func:`thermal_state` as a real vector."""
    k = flipped_count(np.arange(1 << n_sub), n_bits=n_sub)
    return np.exp(-b * k - n_sub * np.log1p(np.exp(-b)))


def hermitian_eigensystem(m):
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvector columns).  Raises
    StateValidationError if the input is not Hermitian within 1e-12 of
    its max-norm scale.
    """
    m = as_matrix(m)
    scale = max(np.abs(m).max(), 1.0)
    if np.abs(m - m.conj().T).max() > HERM_TOL * scale:
        raise StateValidationError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(m)
    return w, v
