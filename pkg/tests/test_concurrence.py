import numpy as np
import pytest
from scipy.optimize import brentq

from blockscale.concurrence import (
    XStateParams,
    case1_concurrence,
    case1_eigenvalues,
    case1_params,
    concurrence_raw,
    condition_a,
    critical_value,
    wootters_concurrence,
)
from blockscale.errors import StateValidationError, UnsupportedCaseError
from blockscale.family import load_family


def bell_state():
    psi = np.zeros(4)
    psi[0] = psi[3] = 1 / np.sqrt(2)
    return np.outer(psi, psi).astype(complex)


def werner(p):
    return p * bell_state() + (1 - p) * np.eye(4) / 4


def random_density(rng, rank=4):
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    m = g @ g.conj().T
    return m / m.trace()


def haar_unitary(rng, dim=2):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_bell_is_maximally_entangled():
    assert wootters_concurrence(bell_state()) == pytest.approx(1.0, abs=1e-12)


def test_maximally_mixed_is_separable():
    assert wootters_concurrence(np.eye(4) / 4) == 0.0


def test_werner_crossing_at_one_third():
    p_cross = brentq(lambda p: concurrence_raw(werner(p)), 0.1, 0.9, xtol=1e-14)
    assert abs(p_cross - 1 / 3) < 1e-10
    # analytic value (3p-1)/2 above the crossing
    for p in (0.4, 0.7, 1.0):
        assert wootters_concurrence(werner(p)) == pytest.approx(
            (3 * p - 1) / 2, abs=1e-12
        )


def test_local_unitary_invariance():
    rng = np.random.default_rng(7)
    for _ in range(200):
        rho = random_density(rng)
        u = np.kron(haar_unitary(rng), haar_unitary(rng))
        rotated = u @ rho @ u.conj().T
        assert wootters_concurrence(rotated) == pytest.approx(
            wootters_concurrence(rho), abs=1e-10
        )


def test_rejects_bad_inputs():
    with pytest.raises(StateValidationError):
        wootters_concurrence(np.eye(3) / 3)
    with pytest.raises(StateValidationError):
        wootters_concurrence(np.eye(4))  # trace 4
    m = np.eye(4, dtype=complex) / 4
    m[0, 1] = 0.2  # not Hermitian
    with pytest.raises(StateValidationError):
        wootters_concurrence(m)


def random_x_params(rng):
    pops = rng.uniform(0.05, 1.0, size=4)
    pops /= pops.sum()
    a11, a22, a33, a44 = pops
    a23 = rng.uniform(0.0, np.sqrt(a22 * a33))
    s = rng.uniform(0.0, np.sqrt(a11 * a44))
    return XStateParams(a11=a11, a22=a22, a33=a33, a44=a44, a23=a23, s=s)


def test_closed_form_matches_generic_on_x_states():
    rng = np.random.default_rng(1)
    checked = 0
    for _ in range(500):
        p = random_x_params(rng)
        value, fallback = case1_concurrence(p)
        if not fallback:
            checked += 1
            assert value == pytest.approx(
                wootters_concurrence(p.matrix()), abs=1e-12
            )
    assert checked > 100


def test_closed_form_eigenvalues_match_generic():
    rng = np.random.default_rng(2)
    from blockscale.concurrence import _spin_flip_eigenvalues

    for _ in range(100):
        p = random_x_params(rng)
        closed = sorted(case1_eigenvalues(p), reverse=True)
        generic = _spin_flip_eigenvalues(p.matrix())
        np.testing.assert_allclose(closed, generic, atol=1e-12)


def test_case1_params_requires_case_one():
    with pytest.raises(UnsupportedCaseError):
        case1_params(load_family("II", 6), "sender")


def test_condition_a_for_case_one_families():
    for n in (6, 42):
        f = load_family("I", n)
        for side in ("sender", "receiver"):
            assert condition_a(case1_params(f, side))


def test_critical_value_is_concurrence_root():
    # oracle: the numeric concurrence switches on exactly at the closed form
    for n in (6, 42):
        f = load_family("I", n)
        for side in ("sender", "receiver"):
            cc = critical_value(f, side)
            scale = 1.0 if side == "sender" else f.lambda2

            def raw(c2):
                p = case1_params(f, side, s=scale * c2)
                return concurrence_raw(p.matrix())

            root = brentq(raw, 1e-6, f.c2_max, xtol=1e-12)
            assert cc == pytest.approx(root, abs=1e-9)


def test_known_sender_critical_value():
    assert critical_value(load_family("I", 6), "sender") == pytest.approx(
        0.148, abs=5e-4
    )
