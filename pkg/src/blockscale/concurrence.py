"""Wootters concurrence for two-qubit states, plus the closed-form
analytics available for X-structured states (the c1 = 0 family)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StateValidationError, UnsupportedCaseError
from .qmat import as_matrix

_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_SYSY = np.kron(_SY, _SY)

EIG_CLAMP = 1e-10


def _spin_flip_eigenvalues(m):
    """Square roots of the eigenvalues of rho (sy x sy) rho* (sy x sy),
    sorted descending.

    The product is similar to a Hermitian PSD matrix, so its eigenvalues
    are real up to round-off; small negatives above -1e-10 are clamped.
    """
    prod = m @ _SYSY @ m.conj() @ _SYSY
    ev = np.linalg.eigvals(prod).real
    ev = np.where((ev < 0) & (ev >= -EIG_CLAMP), 0.0, ev)
    if np.any(ev < 0):
        raise StateValidationError(
            f"spin-flip product has significantly negative eigenvalue {ev.min():.3e}"
        )
    return np.sort(np.sqrt(ev))[::-1]


def concurrence_raw(rho):
    """Unclamped ``2 lambda_max - sum(lambda_i)``; negative for separable
    states.  Useful for root-finding on the entanglement onset."""
    m = as_matrix(rho)
    lam = _spin_flip_eigenvalues(m)
    return 2.0 * lam[0] - lam.sum()


def wootters_concurrence(rho):
    """Concurrence of a two-qubit density matrix, clamped to [0, 1]."""
    m = as_matrix(rho)
    if m.shape != (4, 4):
        raise StateValidationError(f"expected a 4x4 matrix, got {m.shape}")
    if np.abs(m - m.conj().T).max() > 1e-9:
        raise StateValidationError("input is not Hermitian")
    if abs(m.trace() - 1.0) > 1e-9:
        raise StateValidationError("input does not have unit trace")
    return float(min(max(concurrence_raw(m), 0.0), 1.0))


@dataclass(frozen=True)
class XStateParams:
    """Parameters of the X-structured states arising at c1 = 0.

    ``a23`` is the magnitude of the imaginary (2,3) element and ``s``
    the real (1,4) element.
    """

    a11: float
    a22: float
    a33: float
    a44: float
    a23: float
    s: float

    def __post_init__(self):
        pops = (self.a11, self.a22, self.a33, self.a44)
        if abs(sum(pops) - 1.0) > 1e-12:
            raise StateValidationError("populations must sum to 1")
        if min(pops) < 0:
            raise StateValidationError("populations must be nonnegative")

    def matrix(self):
        return np.array(
            [
                [self.a11, 0, 0, self.s],
                [0, self.a22, 1j * self.a23, 0],
                [0, -1j * self.a23, self.a33, 0],
                [self.s, 0, 0, self.a44],
            ],
            dtype=complex,
        )


def case1_eigenvalues(p):
    """Closed-form spin-flip eigenvalues of an X-structured state:
    ``|a23 +- sqrt(a22 a33)|`` and ``|s +- sqrt(a11 a44)|``."""
    r1 = np.sqrt(p.a22 * p.a33)
    r2 = np.sqrt(p.a11 * p.a44)
    return (
        abs(p.a23 - r1),
        abs(p.a23 + r1),
        abs(p.s - r2),
        abs(p.s + r2),
    )


def condition_a(p):
    """Whether sqrt(a11 a44) > a23 + sqrt(a22 a33), the regime in which
    the linear closed form for the concurrence is valid."""
    return np.sqrt(p.a11 * p.a44) > abs(p.a23) + np.sqrt(p.a22 * p.a33)


def case1_concurrence(p):
    """Concurrence of an X-structured state.

    In the regime of :func:`condition_a` this is the piecewise-linear
    ``max(0, 2 s - lambda_1 - lambda_2)``; otherwise falls back to the
    generic eigenvalue path.  Returns (value, fallback_taken).
    """
    if not condition_a(p):
        return wootters_concurrence(p.matrix()), True
    l1, l2, _, _ = case1_eigenvalues(p)
    return max(0.0, 2.0 * p.s - l1 - l2), False


def case1_params(family, side, s=0.0):
    """X-state parameters of a Case-I family member on the given side
    ('sender' or 'receiver')."""
    if family.case_id != "I":
        raise UnsupportedCaseError(
            f"closed-form analytics require Case I, got Case {family.case_id}"
        )
    scale0 = 1.0 if side == "sender" else family.lambda0
    t0 = family.template0
    return XStateParams(
        a11=float(t0[0, 0].real * scale0),
        a22=float(t0[1, 1].real * scale0),
        a33=float(t0[2, 2].real * scale0),
        a44=float(1.0 + t0[3, 3].real * scale0),
        a23=float(t0[1, 2].imag * scale0),
        s=s,
    )


def critical_value(family, side):
    """The c2 threshold below which the Case-I concurrence is exactly
    zero, on the sender or receiver side."""
    p = case1_params(family, side)
    l1, l2, _, _ = case1_eigenvalues(p)
    s_cr = 0.5 * (l1 + l2)
    if side == "receiver":
        return s_cr / family.lambda2
    return s_cr
