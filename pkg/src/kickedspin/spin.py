"""Spin-J Hilbert space: Dicke basis, angular-momentum operators, coherent states.

The basis of fixed total spin J has dimension 2J+1 and is ordered by
ascending magnetic quantum number: index i corresponds to m = i - J, so
index 0 is |J,-J> and index 2J is |J,+J>.  Every other module inherits this
ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError

HERMITICITY_TOL = 1e-12
NORM_TOL = 1e-12


@dataclass(frozen=True)
class SpinBasis:
    """Dicke basis |J, m> of fixed total spin J, stored as two_j = 2J."""

    two_j: int

    def __post_init__(self):
        if self.two_j < 0 or int(self.two_j) != self.two_j:
            raise ValueError(f"two_j must be a non-negative integer, got {self.two_j!r}")
        object.__setattr__(self, "two_j", int(self.two_j))

    @property
    def j(self) -> float:
        return self.two_j / 2.0

    @property
    def dim(self) -> int:
        return self.two_j + 1

    def m_values(self) -> np.ndarray:
        """m = -J ... +J in index order (ascending)."""
        return np.arange(self.dim) - self.j

    def index_of_m(self, m: float) -> int:
        i = int(round(m + self.j))
        if not 0 <= i < self.dim or abs(i - (m + self.j)) > 1e-9:
            raise ValueError(f"m={m} is not a magnetic quantum number of J={self.j}")
        return i


@dataclass(frozen=True)
class DenseOperator:
    """A dense complex operator on a SpinBasis."""

    basis: SpinBasis
    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        mat = np.ascontiguousarray(self.matrix, dtype=complex)
        if mat.shape != (self.basis.dim, self.basis.dim):
            raise ValueError(f"matrix shape {mat.shape} does not match basis dim {self.basis.dim}")
        if self.hermitian:
            dev = np.abs(mat - mat.conj().T).max()
            if dev > HERMITICITY_TOL:
                raise NumericError(f"hermitian flag set but max |A - A^dag| = {dev:.3e}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.basis.dim


def _ladder_plus(basis: SpinBasis) -> np.ndarray:
    """J+ in the ascending-m ordering: <J,m+1|J+|J,m> = sqrt(J(J+1) - m(m+1))."""
    j = basis.j
    m = basis.m_values()[:-1]
    c = np.sqrt(j * (j + 1) - m * (m + 1))
    jp = np.zeros((basis.dim, basis.dim))
    jp[np.arange(1, basis.dim), np.arange(basis.dim - 1)] = c
    return jp


def build_jx(basis: SpinBasis) -> DenseOperator:
    jp = _ladder_plus(basis)
    return DenseOperator(basis, (jp + jp.T) / 2.0, hermitian=True)


def build_jy(basis: SpinBasis) -> DenseOperator:
    jp = _ladder_plus(basis)
    return DenseOperator(basis, (jp - jp.T) / 2.0j, hermitian=True)


def build_jz(basis: SpinBasis) -> DenseOperator:
    return DenseOperator(basis, np.diag(basis.m_values().astype(complex)), hermitian=True)


@dataclass(frozen=True)
class CoherentState:
    """Spin coherent state |theta, phi> with its amplitude vector."""

    theta: float
    phi: float
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amp = np.ascontiguousarray(self.amplitudes, dtype=complex)
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > NORM_TOL:
            raise NumericError(f"coherent state norm deviates by {abs(norm - 1.0):.3e}")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]


def _wrap_phi(phi: float) -> float:
    """Reduce an angle into [-pi, pi)."""
    out = math.remainder(phi, 2.0 * math.pi)
    if out >= math.pi:  # remainder returns (-pi, pi]; close the right end
        out -= 2.0 * math.pi
    return out


def coherent_state(basis: SpinBasis, theta: float, phi: float) -> CoherentState:
    """Rotate |J,J> by the exact unitary exp[i*theta*(Jx sin(phi) - Jy cos(phi))].

    The exponential is evaluated through a Hermitian eigendecomposition of the
    generator, so the result is unitary to roundoff and carries no
    phase-convention ambiguity.
    """
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    phi = _wrap_phi(phi)
    top = np.zeros(basis.dim, dtype=complex)
    top[-1] = 1.0  # |J, +J> in ascending-m order
    if theta == 0.0:
        return CoherentState(theta, phi, top)
    jx = build_jx(basis).matrix
    jy = build_jy(basis).matrix
    gen = jx * math.sin(phi) - jy * math.cos(phi)  # Hermitian
    lam, vec = np.linalg.eigh(gen)
    amp = vec @ (np.exp(1j * theta * lam) * vec[-1].conj())
    return CoherentState(theta, phi, amp)


class CoherentStateFactory:
    """Batch constructor of coherent states on one basis.

    Uses the exact factorization exp[i*theta*(Jx sin(phi) - Jy cos(phi))]
    = exp(-i*phi*Jz) exp(-i*theta*Jy) exp(i*phi*Jz), reusing a single
    eigendecomposition of Jy so a state costs O(dim^2) instead of O(dim^3).
    Agrees with :func:`coherent_state` entrywise (same global phase).
    """

    def __init__(self, basis: SpinBasis):
        self.basis = basis
        jy = build_jy(basis).matrix
        self._lam, self._vec = np.linalg.eigh(jy)
        self._vec_top = self._vec[-1].conj()  # V^dag |J,J>
        self._m = basis.m_values()

    def rotated_top(self, theta: float) -> np.ndarray:
        """exp(-i*theta*Jy) |J,J>, real non-negative amplitudes for theta in [0, pi]."""
        return self._vec @ (np.exp(-1j * theta * self._lam) * self._vec_top)

    def state(self, theta: float, phi: float) -> CoherentState:
        if not 0.0 <= theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {theta}")
        phi = _wrap_phi(phi)
        w = self.rotated_top(theta)
        amp = np.exp(1j * self.basis.j * phi) * (np.exp(-1j * phi * self._m) * w)
        return CoherentState(theta, phi, amp)

    def amplitudes_for_theta_row(self, theta: float, phis: np.ndarray) -> np.ndarray:
        """Amplitude matrix of shape (dim, len(phis)) for one theta."""
        w = self.rotated_top(theta)
        phase = np.exp(1j * np.multiply.outer(self.basis.j - self._m, phis))
        return w[:, None] * phase


def bloch_expectation(state: CoherentState | np.ndarray, jx: DenseOperator,
                      jy: DenseOperator, jz: DenseOperator) -> np.ndarray:
    """(<Jx>, <Jy>, <Jz>)/J for a normalized state vector."""
    amp = state.amplitudes if isinstance(state, CoherentState) else np.asarray(state, dtype=complex)
    norm = np.linalg.norm(amp)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"state is not normalized (|norm - 1| = {abs(norm - 1.0):.3e})")
    j = jx.basis.j
    out = np.empty(3)
    for i, op in enumerate((jx, jy, jz)):
        val = amp.conj() @ (op.matrix @ amp)
        if abs(val.imag) > 1e-12:
            raise NumericError(f"expectation has imaginary residue {val.imag:.3e}")
        out[i] = val.real / j
    return out


def dicke_split_coeff(n_qubits: int, n_excitations: int, s: int, q: int) -> float:
    """Coefficient of |s,q> (x) |N-s, n-q> in the bipartite split of the Dicke
    state of n excitations over N qubits:

        f(N,n,s,q) = sqrt( C(s,q) * C(N-s, n-q) / C(N,n) )

    Zero when the remainder n-q cannot fit the other part.  Binomials are
    exact integers, so the ratio is correctly rounded at any N (the ratio is
    bounded by 1 and cannot overflow).
    """
    n, big_n = n_excitations, n_qubits
    if not 0 <= s <= big_n:
        raise ValueError(f"need 0 <= s <= N, got s={s}, N={big_n}")
    if not 0 <= n <= big_n:
        raise ValueError(f"need 0 <= n <= N, got n={n}, N={big_n}")
    if not 0 <= q <= s:
        raise ValueError(f"need 0 <= q <= s, got q={q}, s={s}")
    r = n - q
    if r < 0 or r > big_n - s:
        return 0.0
    return math.sqrt(math.comb(s, q) * math.comb(big_n - s, r) / math.comb(big_n, n))
