"""Polynomial-cost transfer-supermatrix backend for long chains.

The XX chain maps to free fermions under the Jordan-Wigner
transformation (one fermion per flipped spin; site j carries the string
``prod_{k<j} (1 - 2 n_k)``).  Every supermatrix entry is a trace of a
product of a few fermionic monomials against a Gaussian weight, which
Wick's theorem reduces to Pfaffians of small contraction matrices.

String handling is exact: receiver-side strings are rewritten with the
global parity operator, ``prod_{k<m} Z_k = (-1)^{N̂} prod_{k>=m} Z_k``,
which commutes with the evolution and folds into the Gaussian weight.
Entries whose receiver operator carries one parity factor are evaluated
against the parity-twisted weight (mode occupation factor
``-1/(e^b - 1)``), all others against the plain thermal weight
(``1/(1 + e^b)``); sender modes always carry weight 1/2 because the
background excludes them.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import BlockscaleError
from .evolve_ed import TransferSupermatrix
from .qmat import ChainSpec


@dataclass(frozen=True)
class FermionHopping:
    """Single-particle picture of the chain: tridiagonal hopping matrix
    and its unitary propagator at the transfer time."""

    n_sites: int
    h: np.ndarray
    u: np.ndarray


def single_particle_hamiltonian(n_sites, coupling=1.0):
    h = np.zeros((n_sites, n_sites))
    off = np.full(n_sites - 1, 0.5 * coupling)
    h[np.arange(n_sites - 1), np.arange(1, n_sites)] = off
    h[np.arange(1, n_sites), np.arange(n_sites - 1)] = off
    return h


def single_particle_propagator(spec):
    """exp(-i h t) for the tridiagonal hopping matrix h with
    off-diagonal coupling/2."""
    n = spec.n_sites
    if n < 2:
        raise BlockscaleError("need at least 2 sites")
    w, v = eigh_tridiagonal(
        np.zeros(n), np.full(n - 1, 0.5 * spec.coupling)
    )
    u = (v * np.exp(-1j * w * spec.transfer_time)) @ v.T
    return FermionHopping(n_sites=n, h=single_particle_hamiltonian(n, spec.coupling), u=u)


def pfaffian(a):
    """Pfaffian of an even-dimensional complex skew-symmetric matrix by
    the Parlett-Reid tridiagonalization with partial pivoting."""
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    if n % 2:
        return 0.0 + 0.0j
    pf = 1.0 + 0.0j
    # pivots at rounding-noise level mean the pfaffian is numerically zero
    cutoff = 1e-13 * max(np.abs(a).max(), 1.0)
    for k in range(0, n - 1, 2):
        col = np.abs(a[k + 1 :, k])
        p = int(np.argmax(col)) + k + 1
        if col.max() <= cutoff:
            return 0.0 + 0.0j
        if p != k + 1:
            a[[k + 1, p], :] = a[[p, k + 1], :]
            a[:, [k + 1, p]] = a[:, [p, k + 1]]
            pf = -pf
        pf *= a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2 :] / a[k, k + 1]
            v = a[k + 2 :, k + 1]
            a[k + 2 :, k + 2 :] += np.outer(tau, v) - np.outer(v, tau)
    return pf


# --- tiny symbolic fermion algebra ---------------------------------------
#
# A "poly" is (g, terms): g in {0, 1} counts global parity factors moved
# to the far left, terms maps an ordered tuple of letters to a complex
# coefficient.  A letter is (mode, dag).  Products never reorder
# letters; moving a parity factor through an odd monomial flips its sign.


def _poly(terms, g=0):
    return (g, terms)


_IDENTITY = _poly({(): 1.0})


def poly_mul(a, b):
    ga, ta = a
    gb, tb = b
    terms = {}
    for la, ca in ta.items():
        sign = -1.0 if (gb and len(la) % 2) else 1.0
        for lb, cb in tb.items():
            key = la + lb
            terms[key] = terms.get(key, 0.0) + sign * ca * cb
    return ((ga + gb) % 2, terms)


def z_op(mode):
    """1 - 2 n_mode."""
    return _poly({(): 1.0, ((mode, True), (mode, False)): -2.0})


def jw_string(mode, n_sites):
    """JW string of ``mode`` as a product of Z factors, using the global
    parity identity when the suffix is shorter than the prefix."""
    if mode <= n_sites - mode:
        out = _IDENTITY
        for k in range(mode):
            out = poly_mul(out, z_op(k))
        return out
    out = _poly({(): 1.0}, g=1)
    for k in range(mode, n_sites):
        out = poly_mul(out, z_op(k))
    return out


def site_factor(mode, a, b, n_sites):
    """|a><b| of the qubit at ``mode`` as a fermionic poly (a, b bits;
    1 = flipped spin = occupied mode)."""
    if a == 0 and b == 0:
        return _poly({(): 1.0, ((mode, True), (mode, False)): -1.0})
    if a == 1 and b == 1:
        return _poly({((mode, True), (mode, False)): 1.0})
    if a == 1 and b == 0:
        return poly_mul(jw_string(mode, n_sites), _poly({((mode, True),): 1.0}))
    return poly_mul(jw_string(mode, n_sites), _poly({((mode, False),): 1.0}))


def pair_op(mode_hi, m, n, n_sites):
    """|m><n| of the qubit pair (mode_hi, mode_hi + 1), the first qubit
    being the more significant bit of the two-qubit index."""
    hi = poly_mul(
        site_factor(mode_hi, (m >> 1) & 1, (n >> 1) & 1, n_sites),
        site_factor(mode_hi + 1, m & 1, n & 1, n_sites),
    )
    return hi


# --- Wick evaluation ------------------------------------------------------


def _wick(letters, nu):
    """<A_1 ... A_2m> for a number-conserving Gaussian weight with mode
    occupations ``nu``; each letter is (dag, coefficient vector)."""
    k = len(letters)
    if k % 2:
        return 0.0 + 0.0j
    if k == 0:
        return 1.0 + 0.0j
    c = np.zeros((k, k), dtype=complex)
    for i in range(k):
        dag_i, vi = letters[i]
        for j in range(i + 1, k):
            dag_j, vj = letters[j]
            if dag_i == dag_j:
                continue
            if not dag_i:  # <c c^dag>
                val = np.dot(vi * (1.0 - nu), vj)
            else:  # <c^dag c>
                val = np.dot(vi * nu, vj)
            c[i, j] = val
            c[j, i] = -val
    return pfaffian(c)


@lru_cache(maxsize=None)
def _sender_ops(n_sites):
    return {(i, j): pair_op(0, i, j, n_sites) for i in range(4) for j in range(4)}


@lru_cache(maxsize=None)
def _receiver_ops(n_sites):
    return {
        (m, n): pair_op(n_sites - 2, m, n, n_sites) for m in range(4) for n in range(4)
    }


@lru_cache(maxsize=None)
def _z01(n_sites):
    return poly_mul(z_op(0), z_op(1))


def transfer_supermatrix_ff(spec):
    """Transfer supermatrix for any chain length at polynomial cost.

    Exact up to floating point; requires b_field > 0 (the parity-twisted
    weight degenerates at b = 0).
    """
    n = spec.n_sites
    b = spec.b_field
    if b <= 1e-8:
        raise BlockscaleError("free-fermion backend requires b_field > 0")
    u = single_particle_propagator(spec).u

    eye = np.eye(n)

    def static_vec(letter):
        mode, dag = letter
        return dag, eye[mode]

    def evolved_vec(letter):
        mode, dag = letter
        row = u[mode]
        return (True, row.conj()) if dag else (False, row)

    nu_even = np.empty(n)
    nu_even[:2] = 0.5
    nu_even[2:] = 1.0 / (1.0 + np.exp(b))
    nu_odd = np.empty(n)
    nu_odd[:2] = 0.5
    nu_odd[2:] = -1.0 / np.expm1(b)
    pref_even = 4.0
    pref_odd = 4.0 * np.tanh(b / 2.0) ** (n - 2)

    g_mid, mid_terms = _z01(n)
    assert g_mid == 0
    mid_static = [
        (c, [static_vec(l) for l in ls]) for ls, c in mid_terms.items()
    ]

    s_ops = _sender_ops(n)
    r_ops = _receiver_ops(n)
    t = np.zeros((16, 16), dtype=complex)
    for (m_r, n_r), (g_r, r_terms) in r_ops.items():
        r_mons = [(c, [evolved_vec(l) for l in ls]) for ls, c in r_terms.items()]
        for (i, j), (g_s, s_terms) in s_ops.items():
            assert g_s == 0
            total = 0.0 + 0.0j
            for ls, cs in s_terms.items():
                s_letters = [static_vec(l) for l in ls]
                if g_r:
                    for cm, m_letters in mid_static:
                        for cr, r_letters in r_mons:
                            w = _wick(s_letters + m_letters + r_letters, nu_odd)
                            if w:
                                total += cs * cm * cr * w
                else:
                    for cr, r_letters in r_mons:
                        w = _wick(s_letters + r_letters, nu_even)
                        if w:
                            total += cs * cr * w
            pref = pref_odd if g_r else pref_even
            # receiver entry (n_r, m_r) reads off operator |m_r><n_r|
            t[4 * n_r + m_r, 4 * i + j] = pref * total
    return TransferSupermatrix(entries=t, chain=spec)
