import math

import numpy as np
import pytest

from kickedspin.floquet import FloquetSpec, build_floquet, eigensystem
from kickedspin.phase_space import (
    OverlapVector,
    PhaseGrid,
    average_d2,
    d2_map,
    fractal_dimension,
    husimi,
    midpoint_axes,
    overlap_vector,
    participation_number,
    renyi_entropy,
)
from kickedspin.spin import CoherentStateFactory, SpinBasis, coherent_state


@pytest.fixture(scope="module")
def chaotic_eig():
    spec = FloquetSpec(two_j=120, k=8.0, mu=3.0)
    return eigensystem(build_floquet(spec), spec=spec)


def test_phase_grid_validation():
    with pytest.raises(ValueError):
        PhaseGrid(np.array([0.2, 0.1]), np.array([0.0, 1.0]), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        PhaseGrid(np.array([0.1, 0.2]), np.array([0.0, 1.0]), np.zeros((3, 2)))
    with pytest.raises(ValueError):
        PhaseGrid(np.array([0.1, 0.2]), np.array([0.0, 1.0]), np.full((2, 2), np.nan))


def test_midpoint_axes_exclude_poles():
    t, p = midpoint_axes(100, 100)
    assert 0.0 < t[0] and t[-1] < math.pi
    assert -math.pi < p[0] and p[-1] < math.pi


def test_husimi_top_state_peaks_at_north_pole():
    basis = SpinBasis(24)
    top = np.zeros(25, dtype=complex)
    top[-1] = 1.0
    thetas = np.array([1e-12, math.pi / 2, math.pi - 1e-12])
    phis = np.array([-1.0, 0.0, 2.0])
    grid = husimi(top, basis, theta_values=thetas, phi_values=phis)
    assert grid.values[0].max() == pytest.approx(1.0, abs=1e-10)
    assert grid.values[-1].max() < 1e-12
    rescaled = husimi(top, basis, theta_values=thetas, phi_values=phis, rescale=True)
    assert rescaled.values.max() == 1.0


def test_husimi_nonnegative_and_quadrature():
    # resolution of identity: dim/(4pi) * integral of Q = 1 for any state
    basis = SpinBasis(40)
    rng = np.random.default_rng(4)
    state = rng.standard_normal(41) + 1j * rng.standard_normal(41)
    state /= np.linalg.norm(state)
    grid = husimi(state, basis, n_theta=200, n_phi=400)
    assert grid.values.min() >= 0.0
    w = np.sin(grid.theta_values)[:, None]
    total = (grid.values * w).sum() * (math.pi / 200) * (2 * math.pi / 400)
    assert total * basis.dim / (4 * math.pi) == pytest.approx(1.0, abs=1e-3)


def test_husimi_chaotic_states_spread_wider_than_regular():
    # participation ratio of normalized Husimi weights, median over eigenstates
    def median_pr(k):
        spec = FloquetSpec(two_j=120, k=k, mu=3.0)
        eig = eigensystem(build_floquet(spec), spec=spec)
        basis = SpinBasis(120)
        fac = CoherentStateFactory(basis)
        prs = []
        for i in range(0, eig.dim, 4):
            grid = husimi(eig.eigenvectors[:, i], basis, n_theta=40, n_phi=80, factory=fac)
            w = grid.values * np.sin(grid.theta_values)[:, None]
            w = w / w.sum()
            prs.append(1.0 / (w ** 2).sum())
        return np.median(prs)

    assert median_pr(8.0) > 2.0 * median_pr(1.0)


def test_overlap_completeness(chaotic_eig):
    ov = overlap_vector(1.1, 0.7, chaotic_eig)
    assert ov.weights().sum() == pytest.approx(1.0, abs=1e-10)


def test_overlap_unit_vector_for_eigenvector_coherent_match():
    # synthetic case: pick U whose eigenbasis contains a coherent state
    basis = SpinBasis(16)
    st = coherent_state(basis, 0.9, -1.4).amplitudes
    rng = np.random.default_rng(0)
    a = rng.standard_normal((17, 17)) + 1j * rng.standard_normal((17, 17))
    a[:, 0] = st
    q, _ = np.linalg.qr(a)
    u = (q * np.exp(1j * np.linspace(-2, 2, 17))) @ q.conj().T
    eig = eigensystem(u)
    ov = overlap_vector(0.9, -1.4, eig)
    w = np.sort(ov.weights())
    assert w[-1] == pytest.approx(1.0, abs=1e-9)
    assert w[:-1].max() < 1e-9


def test_renyi_localized_and_uniform_limits():
    e = np.zeros(64)
    e[7] = 1.0
    for q in (0.5, 2.0, 3.0):
        assert renyi_entropy(e ** 0.5, q) == pytest.approx(0.0, abs=1e-12)
        assert fractal_dimension(e ** 0.5, q) == pytest.approx(0.0, abs=1e-12)
    u = np.full(64, 1 / 64) ** 0.5
    for q in (0.0, 0.5, 2.0, 5.0):
        assert fractal_dimension(u, q) == pytest.approx(1.0, abs=1e-12)


def test_renyi_rejects_bad_arguments(chaotic_eig):
    ov = overlap_vector(0.3, 0.3, chaotic_eig)
    with pytest.raises(ValueError):
        renyi_entropy(ov, 1.0)
    with pytest.raises(ValueError):
        renyi_entropy(ov, -0.5)
    with pytest.raises(ValueError):
        renyi_entropy(np.ones(8), 2.0)  # unnormalized weights


def test_participation_number_is_exp_s2(chaotic_eig):
    ov = overlap_vector(2.0, 1.0, chaotic_eig)
    assert math.log(participation_number(ov)) == pytest.approx(renyi_entropy(ov, 2.0), abs=1e-12)


def test_dq_non_increasing_in_q(chaotic_eig):
    rng = np.random.default_rng(9)
    qs = [0.0, 0.5, 1.5, 2.0, 3.0, 5.0]
    for _ in range(25):
        theta = math.acos(rng.uniform(-1, 1))
        phi = rng.uniform(-math.pi, math.pi)
        ov = overlap_vector(theta, phi, chaotic_eig)
        ds = [fractal_dimension(ov, q) for q in qs]
        assert all(a >= b - 1e-12 for a, b in zip(ds, ds[1:]))


def test_d2_map_bounds_and_determinism():
    spec = FloquetSpec(two_j=60, k=8.0, mu=3.0)
    eig = eigensystem(build_floquet(spec), spec=spec)
    a = d2_map(spec, n_theta=20, n_phi=20, eig=eig)
    b = d2_map(spec, n_theta=20, n_phi=20, eig=eig)
    assert np.all(a.values >= 0.0)
    assert np.all(a.values <= 1.0 + 1e-12)
    np.testing.assert_array_equal(a.values, b.values)


def test_d2_map_minima_sit_on_classical_fixed_points():
    # k=1 regular regime: the deepest D2 wells coincide with the two stable
    # fixed points of the classical map, found independently by refinement
    from kickedspin.classical import refine_periodic_point

    spec = FloquetSpec(two_j=300, k=1.0, mu=3.0)
    grid = d2_map(spec, n_theta=100, n_phi=100)
    fp1 = refine_periodic_point(1.0, 1.5, spec, period=1)
    fp2 = refine_periodic_point(2.1, -1.6, spec, period=1)
    assert fp1.converged and fp2.converged
    i, j = np.unravel_index(np.argmin(grid.values), grid.values.shape)
    tmin, pmin = grid.theta_values[i], grid.phi_values[j]
    d_res = math.hypot(math.pi / 100, 2 * math.pi / 100)
    close1 = math.hypot(tmin - fp1.theta, pmin - fp1.phi) < 2 * d_res
    close2 = math.hypot(tmin - fp2.theta, pmin - fp2.phi) < 2 * d_res
    assert close1 or close2


def test_average_d2_constant_grid():
    t, p = midpoint_axes(100, 100)
    grid = PhaseGrid(t, p, np.full((100, 100), 0.7))
    assert average_d2(grid) == pytest.approx(0.7, abs=1e-3)


def test_average_d2_rejects_partial_sphere():
    t, p = midpoint_axes(100, 100)
    with pytest.raises(ValueError):
        average_d2(PhaseGrid(t[:50], p, np.full((50, 100), 0.5)))
