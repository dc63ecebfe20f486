import numpy as np
import pytest

from blockscale.errors import CapacityError
from blockscale.evolve_ed import (
    TransferSupermatrix,
    build_hamiltonian,
    check_invariants,
    evolve_receiver,
    total_iz,
    transfer_supermatrix,
    verify_block_scaling,
)
from blockscale.family import load_family, sender_matrix
from blockscale.qmat import ChainSpec, thermal_state

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)


def kron_chain(ops):
    out = np.array([[1.0]], dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def reference_hamiltonian(n, coupling=1.0):
    """Independent construction from explicit spin-operator products."""
    dim = 2**n
    h = np.zeros((dim, dim), dtype=complex)
    for i in range(n - 1):
        for s in (SX, SY):
            ops = [np.eye(2, dtype=complex)] * n
            ops[i] = s / 2
            ops[i + 1] = s / 2
            h += coupling * kron_chain(ops)
    return h


@pytest.mark.parametrize("n", [4, 5])
def test_hamiltonian_matches_spin_operator_oracle(n):
    spec = ChainSpec(n_sites=n, coupling=1.3)
    np.testing.assert_allclose(
        build_hamiltonian(spec), reference_hamiltonian(n, 1.3), atol=1e-13
    )


def test_hamiltonian_conserves_iz():
    spec = ChainSpec(n_sites=5)
    h = build_hamiltonian(spec)
    iz = np.diag(total_iz(5))
    np.testing.assert_allclose(h @ iz, iz @ h, atol=1e-13)


def test_capacity_error():
    with pytest.raises(CapacityError):
        build_hamiltonian(ChainSpec(n_sites=13))
    with pytest.raises(CapacityError):
        transfer_supermatrix(ChainSpec(n_sites=14))


def test_zero_time_receiver_is_thermal():
    spec = ChainSpec(n_sites=4, b_field=2.0, transfer_time=0.0)
    rho_s = np.diag([0.4, 0.3, 0.2, 0.1]).astype(complex)
    out = evolve_receiver(rho_s, spec)
    np.testing.assert_allclose(out, thermal_state(2, 2.0), atol=1e-13)


def test_supermatrix_matches_direct_evolution():
    f = load_family("III", 6)
    spec = f.chain_spec
    t = transfer_supermatrix(spec)
    rho_s = sender_matrix(f, 0.1, 0.1)
    np.testing.assert_allclose(
        t.apply(rho_s), evolve_receiver(rho_s, spec), atol=1e-12
    )


def test_invariants_hold():
    spec = ChainSpec(n_sites=6, b_field=10.0, transfer_time=8.51533)
    checks = check_invariants(transfer_supermatrix(spec))
    assert checks["ok"], checks


def test_json_roundtrip():
    spec = ChainSpec(n_sites=4, b_field=1.0, transfer_time=0.7)
    t = transfer_supermatrix(spec)
    t2 = TransferSupermatrix.from_json(t.to_json())
    np.testing.assert_array_equal(t.entries, t2.entries)
    assert t2.chain == spec


def test_block_scaling_verification_case_one():
    f = load_family("I", 6)
    rep = verify_block_scaling(f)
    assert rep.fitted[0] == pytest.approx(f.lambda0, abs=1e-3)
    assert rep.fitted[2] == pytest.approx(f.lambda2, abs=1e-3)
    assert rep.max_residual() <= 2e-3
