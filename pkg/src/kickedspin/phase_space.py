"""Phase-space localization measures built on spin coherent states.

Husimi distributions of Floquet eigenstates, the expansion of coherent
states over the Floquet eigenbasis, Renyi entropies / multifractal
dimensions of those expansions, and sphere-averaged D2 maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .floquet import EigenSystem, FloquetSpec, build_floquet, eigensystem
from .spin import CoherentStateFactory, SpinBasis


@dataclass(frozen=True)
class PhaseGrid:
    """Scalar field sampled on a (theta, phi) lattice."""

    theta_values: np.ndarray
    phi_values: np.ndarray
    values: np.ndarray          # shape (n_theta, n_phi)

    def __post_init__(self):
        t = np.ascontiguousarray(self.theta_values, dtype=float)
        p = np.ascontiguousarray(self.phi_values, dtype=float)
        v = np.ascontiguousarray(self.values, dtype=float)
        if np.any(np.diff(t) <= 0) or np.any(np.diff(p) <= 0):
            raise ValueError("grid axes must be strictly increasing")
        if v.shape != (t.size, p.size):
            raise ValueError(f"values shape {v.shape} does not match grid ({t.size}, {p.size})")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid values must be finite")
        for arr in (t, p, v):
            arr.setflags(write=False)
        object.__setattr__(self, "theta_values", t)
        object.__setattr__(self, "phi_values", p)
        object.__setattr__(self, "values", v)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def midpoint_axes(n_theta: int, n_phi: int) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint lattices over [0, pi] x [-pi, pi); pole rows are offset off the poles."""
    thetas = (np.arange(n_theta) + 0.5) * math.pi / n_theta
    phis = -math.pi + (np.arange(n_phi) + 0.5) * 2.0 * math.pi / n_phi
    return thetas, phis


def husimi(state: np.ndarray, basis: SpinBasis, n_theta: int = 100, n_phi: int = 100,
           theta_values: np.ndarray | None = None, phi_values: np.ndarray | None = None,
           rescale: bool = False, factory: CoherentStateFactory | None = None) -> PhaseGrid:
    """Husimi weights |<theta,phi|state>|^2 on the lattice.

    With ``rescale`` the map is divided by its maximum, the normalization
    used for plotting.
    """
    amp = np.asarray(state, dtype=complex)
    if abs(np.linalg.norm(amp) - 1.0) > 1e-8:
        raise ValueError("state must be normalized")
    if theta_values is None or phi_values is None:
        theta_values, phi_values = midpoint_axes(n_theta, n_phi)
    fac = factory if factory is not None else CoherentStateFactory(basis)
    out = np.empty((len(theta_values), len(phi_values)))
    for i, theta in enumerate(theta_values):
        block = fac.amplitudes_for_theta_row(float(theta), np.asarray(phi_values, dtype=float))
        out[i] = np.abs(block.conj().T @ amp) ** 2
    if rescale:
        peak = out.max()
        if peak > 0:
            out = out / peak
    return PhaseGrid(np.asarray(theta_values, float), np.asarray(phi_values, float), out)


@dataclass(frozen=True)
class OverlapVector:
    """Coefficients of a coherent state over the Floquet eigenbasis."""

    c: np.ndarray = field(repr=False)
    theta: float = 0.0
    phi: float = 0.0
    spec: FloquetSpec | None = None

    def __post_init__(self):
        c = np.ascontiguousarray(self.c, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    def weights(self) -> np.ndarray:
        return np.abs(self.c) ** 2

    @property
    def dim(self) -> int:
        return self.c.size


def overlap_vector(theta: float, phi: float, eig: EigenSystem,
                   factory: CoherentStateFactory | None = None) -> OverlapVector:
    """c_i = <Phi_i | theta, phi> for every Floquet eigenstate."""
    basis = SpinBasis(eig.dim - 1)
    fac = factory if factory is not None else CoherentStateFactory(basis)
    state = fac.state(theta, phi).amplitudes
    c = eig.eigenvectors.conj().T @ state
    return OverlapVector(c, theta=float(theta), phi=float(fac.state(theta, phi).phi),
                         spec=eig.spec)


def renyi_entropy(overlaps: OverlapVector | np.ndarray, q: float = 2.0) -> float:
    """S_q = ln(sum of |c|^(2q)) / (1 - q); natural log, q = 1 excluded."""
    if q < 0:
        raise ValueError("q must be non-negative")
    if q == 1:
        raise ValueError("q = 1 (Shannon limit) is not implemented")
    w = overlaps.weights() if isinstance(overlaps, OverlapVector) else np.abs(np.asarray(overlaps)) ** 2
    total = w.sum()
    if abs(total - 1.0) > 1e-8:
        raise ValueError(f"overlap weights must sum to 1, got {total}")
    if q == 0:
        return math.log(w.size)
    return math.log(np.power(w, q).sum()) / (1.0 - q)


def fractal_dimension(overlaps: OverlapVector | np.ndarray, q: float = 2.0) -> float:
    """D_q = S_q / ln(dim), in [0, 1] up to roundoff."""
    w = overlaps.weights() if isinstance(overlaps, OverlapVector) else np.abs(np.asarray(overlaps)) ** 2
    return renyi_entropy(overlaps, q) / math.log(w.size)


def participation_number(overlaps: OverlapVector | np.ndarray) -> float:
    """M2 = 1 / sum |c|^4 = exp(S_2), the effective number of eigenbasis components."""
    w = overlaps.weights() if isinstance(overlaps, OverlapVector) else np.abs(np.asarray(overlaps)) ** 2
    return float(1.0 / (w ** 2).sum())


def d2_weight_map(eig: EigenSystem, n_theta: int = 100, n_phi: int = 100,
                  q: float = 2.0, workers: int = 1) -> PhaseGrid:
    """D_q of the coherent-state expansion at every lattice point.

    One eigendecomposition is shared read-only across the whole lattice;
    each theta row costs a single dense matrix product.  Rows are sharded
    over ``workers`` threads (the products release the GIL); the default of
    one row worker leaves the cores to the threaded BLAS.
    """
    if q == 1:
        raise ValueError("q = 1 (Shannon limit) is not implemented")
    basis = SpinBasis(eig.dim - 1)
    fac = CoherentStateFactory(basis)
    thetas, phis = midpoint_axes(n_theta, n_phi)
    ln_dim = math.log(eig.dim)
    vdag = eig.eigenvectors.conj().T
    out = np.empty((n_theta, n_phi))

    def fill_row(i):
        block = fac.amplitudes_for_theta_row(float(thetas[i]), phis)
        w = np.abs(vdag @ block) ** 2
        if q == 0:
            out[i] = 1.0
        else:
            out[i] = np.log(np.power(w, q).sum(axis=0)) / (1.0 - q) / ln_dim

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill_row, range(n_theta)))
    else:
        for i in range(n_theta):
            fill_row(i)
    return PhaseGrid(thetas, phis, out)


def d2_map(spec: FloquetSpec, n_theta: int = 100, n_phi: int = 100, q: float = 2.0,
           eig: EigenSystem | None = None, workers: int = 1) -> PhaseGrid:
    """D_q lattice for a model spec, diagonalizing U unless one is supplied."""
    if eig is None:
        eig = eigensystem(build_floquet(spec), spec=spec)
    return d2_weight_map(eig, n_theta=n_theta, n_phi=n_phi, q=q, workers=workers)


def average_d2(grid: PhaseGrid) -> float:
    """Sphere average (1/4pi) * sum D2 * sin(theta) dtheta dphi on a full-sphere midpoint grid."""
    t, p = grid.theta_values, grid.phi_values
    dtheta = math.pi / t.size
    dphi = 2.0 * math.pi / p.size
    t_expect = (np.arange(t.size) + 0.5) * dtheta
    p_expect = -math.pi + (np.arange(p.size) + 0.5) * dphi
    if np.abs(t - t_expect).max() > 1e-9 or np.abs(p - p_expect).max() > 1e-9:
        raise ValueError("average_d2 requires a full-sphere midpoint grid")
    weights = np.sin(t)[:, None]
    return float((grid.values * weights).sum() * dtheta * dphi / (4.0 * math.pi))
