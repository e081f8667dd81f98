import math

import numpy as np
import pytest
import scipy.linalg as sla

from kickedspin.errors import NumericError
from kickedspin.floquet import (
    EigenSystem,
    FloquetSpec,
    build_floquet,
    build_static_hamiltonian,
    eigenphases_only,
    eigensystem,
    parity_operator,
    wrap_phases,
)
from kickedspin.spin import SpinBasis


def commutator_norm(a, b):
    return np.abs(a @ b - b @ a).max()


def test_spec_validation():
    with pytest.raises(ValueError):
        FloquetSpec(two_j=0, k=1.0, mu=1.0)
    with pytest.raises(ValueError):
        FloquetSpec(two_j=4, k=1.0, mu=1.0, tau=0.0)


def test_h0_spin_half_is_pauli_x():
    h = build_static_hamiltonian(FloquetSpec(two_j=1, k=0.0, mu=0.0)).matrix
    np.testing.assert_allclose(h, np.array([[0, 1], [1, 0]], dtype=complex), atol=1e-15)


def test_h0_j1_hand_evaluated():
    # J=1, k=2: diagonal (k/2J) m^2 = m^2 -> (1, 0, 1); off-diagonal 2*Jx = sqrt(2)
    h = build_static_hamiltonian(FloquetSpec(two_j=2, k=2.0, mu=0.0)).matrix.real
    np.testing.assert_allclose(np.diag(h), [1.0, 0.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(np.diag(h, 1), [math.sqrt(2)] * 2, atol=1e-15)
    np.testing.assert_allclose(np.diag(h, -1), [math.sqrt(2)] * 2, atol=1e-15)


def test_h0_spectrum_invariant_under_m_reversal():
    h = build_static_hamiltonian(FloquetSpec(two_j=14, k=5.5, mu=0.0)).matrix.real
    flipped = h[::-1, ::-1]
    np.testing.assert_allclose(np.linalg.eigvalsh(h), np.linalg.eigvalsh(flipped), atol=1e-10)


def test_floquet_trivial_identity():
    spec = FloquetSpec(two_j=6, k=0.0, mu=0.0, tau=1e-300)
    u = build_floquet(spec).matrix
    np.testing.assert_allclose(u, np.eye(7), atol=1e-12)


def test_floquet_kick_periodicity_integer_j():
    # mu and mu + 2pi give the same operator for integer J
    base = build_floquet(FloquetSpec(two_j=8, k=3.0, mu=3.0)).matrix
    shifted = build_floquet(FloquetSpec(two_j=8, k=3.0, mu=3.0 + 2 * math.pi)).matrix
    np.testing.assert_allclose(base, shifted, atol=1e-12)
    # mu = 2pi reduces to the kick-free operator exactly
    u0 = build_floquet(FloquetSpec(two_j=8, k=3.0, mu=0.0)).matrix
    u2pi = build_floquet(FloquetSpec(two_j=8, k=3.0, mu=2 * math.pi)).matrix
    np.testing.assert_array_equal(u0, u2pi)


def test_floquet_half_integer_global_phase():
    # for half-integer J a 2pi kick shift flips the global sign
    base = build_floquet(FloquetSpec(two_j=7, k=2.0, mu=1.0)).matrix
    shifted = build_floquet(FloquetSpec(two_j=7, k=2.0, mu=1.0 + 2 * math.pi)).matrix
    np.testing.assert_allclose(shifted, -base, atol=1e-12)


def test_floquet_matches_expm_oracle():
    # brute-force scaling-and-squaring exponential of each factor
    spec = FloquetSpec(two_j=10, k=3.0, mu=3.0, tau=1.0)
    basis = SpinBasis(10)
    from kickedspin.spin import build_jz
    h0 = build_static_hamiltonian(spec).matrix
    jz = build_jz(basis).matrix
    oracle = sla.expm(-1j * spec.mu * jz) @ sla.expm(-1j * h0 * spec.tau)
    np.testing.assert_allclose(build_floquet(spec).matrix, oracle, atol=1e-10)


@pytest.mark.parametrize("two_j,k,mu", [(40, 8.0, 3.0), (101, 2.5, 5.0)])
def test_floquet_unitarity(two_j, k, mu):
    u = build_floquet(FloquetSpec(two_j=two_j, k=k, mu=mu)).matrix
    assert np.abs(u.conj().T @ u - np.eye(two_j + 1)).max() < 1e-10


def test_parity_squares_to_identity_integer_j():
    p = parity_operator(SpinBasis(12)).matrix
    np.testing.assert_allclose(p @ p, np.eye(13), atol=1e-10)


def test_parity_maps_m_to_minus_m():
    basis = SpinBasis(9)
    p = parity_operator(basis).matrix
    np.testing.assert_allclose(np.abs(p[::-1].diagonal()), np.ones(10), atol=1e-10)


def test_parity_commutes_at_mu_pi_only():
    basis = SpinBasis(40)
    p = parity_operator(basis).matrix
    u_sym = build_floquet(FloquetSpec(two_j=40, k=8.0, mu=math.pi)).matrix
    u_asym = build_floquet(FloquetSpec(two_j=40, k=8.0, mu=3.0)).matrix
    assert commutator_norm(u_sym, p) < 1e-9
    assert commutator_norm(u_asym, p) > 0.1


def test_wrap_phases_half_open():
    wrapped = wrap_phases(np.array([math.pi, -math.pi, 3 * math.pi, 0.0]))
    assert np.all(wrapped >= -math.pi)
    assert np.all(wrapped < math.pi)
    np.testing.assert_allclose(wrapped, [-math.pi, -math.pi, -math.pi, 0.0])


def test_eigensystem_identity():
    es = eigensystem(np.eye(5, dtype=complex))
    np.testing.assert_array_equal(es.eigenphases, np.zeros(5))


def test_eigensystem_diagonal_sorted():
    u = np.diag(np.exp(1j * np.array([math.pi / 2, -math.pi / 2])))
    es = eigensystem(u)
    np.testing.assert_allclose(es.eigenphases, [-math.pi / 2, math.pi / 2], atol=1e-15)


def test_eigensystem_rejects_non_unitary():
    with pytest.raises(NumericError):
        eigensystem(np.diag([1.0, 2.0]).astype(complex))


def test_eigensystem_reconstruction_residual():
    spec = FloquetSpec(two_j=200, k=8.0, mu=3.0)
    u = build_floquet(spec).matrix
    es = eigensystem(u, spec=spec)
    v = es.eigenvectors
    recon = (v * np.exp(1j * es.eigenphases)) @ v.conj().T
    assert np.abs(u - recon).max() < 1e-8
    assert np.abs(v.conj().T @ v - np.eye(es.dim)).max() < 1e-9
    col_resid = np.abs(u @ v - v * np.exp(1j * es.eigenphases)).max()
    assert col_resid < 1e-9


def test_eigenphases_only_matches_eigensystem():
    spec = FloquetSpec(two_j=60, k=5.0, mu=2.0)
    fast = eigenphases_only(spec)
    full = eigensystem(build_floquet(spec).matrix).eigenphases
    np.testing.assert_allclose(fast, full, atol=1e-12)
    assert fast.size == spec.dim
    assert not np.any(np.isnan(fast))


def test_eigensystem_degenerate_cluster_orthonormal():
    # fourfold-degenerate unitary: phases come out clustered, columns stay orthonormal
    u = np.diag(np.exp(1j * np.array([0.3, 0.3, 0.3, 0.3, -1.0])))
    rng = np.random.default_rng(3)
    a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    q, _ = np.linalg.qr(a)
    u = q @ u @ q.conj().T
    es = eigensystem(u)
    assert np.abs(es.eigenvectors.conj().T @ es.eigenvectors - np.eye(5)).max() < 1e-9
    resid = np.abs(u @ es.eigenvectors - es.eigenvectors * np.exp(1j * es.eigenphases)).max()
    assert resid < 1e-9
