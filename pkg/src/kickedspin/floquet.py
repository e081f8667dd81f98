"""One-period Floquet operator of the kicked collective spin and its spectrum.

The drive alternates free evolution under H0 = 2*Jx + (k/2J)*Jz^2 with an
instantaneous kick exp(-i*mu*Jz), giving the one-period unitary

    U = exp(-i*mu*Jz) * exp(-i*H0*tau).

Eigenphases live on the principal range [-pi, pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import NumericError
from .spin import DenseOperator, SpinBasis, build_jx

UNITARITY_TOL = 1e-10
PHASE_CLUSTER_TOL = 1e-10


@dataclass(frozen=True)
class FloquetSpec:
    """Model parameters: spin size two_j = 2J, interaction k, kick strength mu."""

    two_j: int
    k: float
    mu: float
    tau: float = 1.0

    def __post_init__(self):
        if self.two_j < 1 or int(self.two_j) != self.two_j:
            raise ValueError(f"two_j must be a positive integer, got {self.two_j!r}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        object.__setattr__(self, "two_j", int(self.two_j))

    @property
    def j(self) -> float:
        return self.two_j / 2.0

    @property
    def dim(self) -> int:
        return self.two_j + 1

    @property
    def basis(self) -> SpinBasis:
        return SpinBasis(self.two_j)

    def content_key(self) -> str:
        """Canonical string identifying the spec exactly (hex floats)."""
        return ":".join(
            [str(self.two_j)] + [float(x).hex() for x in (self.k, self.mu, self.tau)]
        )


def build_static_hamiltonian(spec: FloquetSpec) -> DenseOperator:
    """H0 = 2*Jx + (k/2J)*Jz^2, real symmetric in the ascending-m basis."""
    basis = spec.basis
    m = basis.m_values()
    h = 2.0 * build_jx(basis).matrix.real
    h[np.diag_indices_from(h)] += (spec.k / spec.two_j) * m * m
    return DenseOperator(basis, h, hermitian=True)


def _kick_mu(spec: FloquetSpec) -> float:
    # For integer J the kick phases are exactly 2pi-periodic in mu, so reduce
    # to the principal value; for half-integer J the reduction would flip a
    # global sign and is not applied.
    if spec.two_j % 2 == 0:
        return math.remainder(spec.mu, 2.0 * math.pi)
    return spec.mu


def kick_phases(spec: FloquetSpec) -> np.ndarray:
    """Diagonal of the kick factor exp(-i*mu*Jz)."""
    return np.exp(-1j * _kick_mu(spec) * spec.basis.m_values())


def build_floquet(spec: FloquetSpec) -> DenseOperator:
    """U = exp(-i*mu*Jz) * exp(-i*H0*tau), via Hermitian eigendecomposition of H0."""
    h0 = build_static_hamiltonian(spec).matrix.real
    try:
        lam, vec = np.linalg.eigh(h0)
    except np.linalg.LinAlgError as exc:
        raise NumericError(
            f"H0 eigensolve failed for {spec} (dim={spec.dim}, "
            f"|H0|max={np.abs(h0).max():.3e}): {exc}"
        ) from exc
    u_free = (vec * np.exp(-1j * lam * spec.tau)) @ vec.T
    u = kick_phases(spec)[:, None] * u_free
    _check_unitary(u, UNITARITY_TOL, what="build_floquet output")
    return DenseOperator(spec.basis, u)


def _check_unitary(u: np.ndarray, tol: float, what: str = "operator") -> None:
    n = u.shape[0]
    if n <= 1024:
        dev = np.abs(u.conj().T @ u - np.eye(n)).max()
    else:
        # Probe-based bound; the full Gram check is quadratic-cost at this size.
        rng = np.random.default_rng(12345)
        x = rng.standard_normal((n, 8)) + 1j * rng.standard_normal((n, 8))
        x /= np.linalg.norm(x, axis=0)
        dev = np.abs(u.conj().T @ (u @ x) - x).max()
    if dev > tol:
        raise NumericError(f"{what} is not unitary: max deviation {dev:.3e} > {tol:g}")


def parity_operator(basis: SpinBasis) -> DenseOperator:
    """P = exp(i*pi*J) * exp(i*pi*Jx); for integer J, P^2 = identity."""
    jx = build_jx(basis).matrix.real
    lam, vec = np.linalg.eigh(jx)
    p = (vec * np.exp(1j * math.pi * lam)) @ vec.T
    return DenseOperator(basis, np.exp(1j * math.pi * basis.j) * p)


@dataclass(frozen=True)
class EigenSystem:
    """Eigenphases (ascending, principal range) and matching eigenvector columns of U."""

    eigenphases: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    spec: FloquetSpec | None = None

    def __post_init__(self):
        w = np.ascontiguousarray(self.eigenphases, dtype=float)
        v = np.ascontiguousarray(self.eigenvectors, dtype=complex)
        if v.shape != (w.size, w.size):
            raise ValueError("eigenvector matrix shape does not match phase count")
        w.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "eigenphases", w)
        object.__setattr__(self, "eigenvectors", v)

    @property
    def dim(self) -> int:
        return self.eigenphases.size


def wrap_phases(phases: np.ndarray) -> np.ndarray:
    """Map angles into the half-open principal range [-pi, pi)."""
    out = np.remainder(np.asarray(phases, dtype=float) + math.pi, 2.0 * math.pi) - math.pi
    out[out >= math.pi] = -math.pi
    return out


def eigensystem(u: DenseOperator | np.ndarray, spec: FloquetSpec | None = None,
                unitarity_tol: float = 1e-8) -> EigenSystem:
    """Diagonalize a unitary via complex Schur; phases sorted ascending in [-pi, pi).

    The Schur transform of a normal matrix is diagonal, so its orthonormal
    columns are the eigenvectors; near-degenerate phase clusters are
    re-orthonormalized within the cluster to keep the column contract tight.
    """
    mat = u.matrix if isinstance(u, DenseOperator) else np.asarray(u, dtype=complex)
    _check_unitary(mat, unitarity_tol, what="eigensystem input")
    try:
        t, q = sla.schur(mat, output="complex")
    except Exception as exc:
        raise NumericError(f"Schur decomposition failed (dim={mat.shape[0]}): {exc}") from exc
    lam = np.diag(t)
    mod_dev = np.abs(np.abs(lam) - 1.0).max()
    if mod_dev > 1e-8:
        raise NumericError(f"eigenvalue moduli deviate from 1 by {mod_dev:.3e}")
    phases = np.angle(lam)
    phases[phases >= math.pi] = -math.pi
    order = np.argsort(phases, kind="stable")
    phases = phases[order]
    vecs = q[:, order]
    _reorthonormalize_clusters(phases, vecs)
    return EigenSystem(phases, vecs, spec=spec)


def _reorthonormalize_clusters(phases: np.ndarray, vecs: np.ndarray) -> None:
    gaps = np.diff(phases)
    idx = 0
    n = phases.size
    while idx < n - 1:
        if gaps[idx] < PHASE_CLUSTER_TOL:
            end = idx + 1
            while end < n - 1 and gaps[end] < PHASE_CLUSTER_TOL:
                end += 1
            block, _ = np.linalg.qr(vecs[:, idx:end + 1])
            vecs[:, idx:end + 1] = block
            idx = end + 1
        else:
            idx += 1


def eigenphases_only(spec: FloquetSpec) -> np.ndarray:
    """Sorted eigenphases of U without eigenvectors (cheaper for statistics)."""
    u = build_floquet(spec).matrix
    try:
        lam = np.linalg.eigvals(u)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigenvalue solve failed for {spec}: {exc}") from exc
    mod_dev = np.abs(np.abs(lam) - 1.0).max()
    if mod_dev > 1e-8:
        raise NumericError(f"eigenvalue moduli deviate from 1 by {mod_dev:.3e}")
    phases = np.angle(lam)
    phases[phases >= math.pi] = -math.pi
    return np.sort(phases)
