"""Stroboscopic quantum dynamics: local observables, OTOC, entanglement.

States evolve by repeated application of the one-period operator.  The OTOC
uses a spectral two-vector scheme (forward phases, backward sweeps through
the eigenbasis) at O(dim^2) per kick; a dense Heisenberg-matrix route is
kept as the small-J oracle.  Entanglement of s qubits out of the 2J-qubit
symmetric space is computed combinatorially from the Dicke splitting
coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError
from .floquet import EigenSystem, FloquetSpec, build_floquet, eigensystem
from .phase_space import OverlapVector, PhaseGrid, husimi, participation_number
from .spin import CoherentStateFactory, DenseOperator, SpinBasis, dicke_split_coeff

MAX_TRACED_QUBITS = 4


@dataclass(frozen=True)
class StateVector:
    """Normalized state with the kick count at which it was taken."""

    amplitudes: np.ndarray = field(repr=False)
    time_index: int = 0

    def __post_init__(self):
        amp = np.ascontiguousarray(self.amplitudes, dtype=complex)
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > 1e-9:
            raise NumericError(f"state norm deviates by {abs(norm - 1.0):.3e}")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def dim(self) -> int:
        return self.amplitudes.size


def _amplitudes(state) -> np.ndarray:
    if isinstance(state, StateVector):
        return state.amplitudes
    if hasattr(state, "amplitudes"):
        return np.asarray(state.amplitudes, dtype=complex)
    return np.asarray(state, dtype=complex)


def _operator(u) -> np.ndarray:
    return u.matrix if isinstance(u, DenseOperator) else np.asarray(u, dtype=complex)


def product_state(basis: SpinBasis, site: int) -> StateVector:
    """All bosons on one site: site 1 -> |J,+J>, site 2 -> |J,-J>."""
    if site not in (1, 2):
        raise ValueError(f"site must be 1 or 2, got {site}")
    amp = np.zeros(basis.dim, dtype=complex)
    amp[-1 if site == 1 else 0] = 1.0
    return StateVector(amp)


def evolve(state, u, n_kicks: int, record: bool = False):
    """Apply the one-period operator n_kicks times.

    Returns the final StateVector; with ``record`` also the (n_kicks+1, dim)
    array of states including the initial one.
    """
    psi = _amplitudes(state).copy()
    mat = _operator(u)
    history = np.empty((n_kicks + 1, psi.size), dtype=complex) if record else None
    if record:
        history[0] = psi
    for t in range(n_kicks):
        psi = mat @ psi
        if record:
            history[t + 1] = psi
    final = StateVector(psi, time_index=n_kicks)
    return (final, history) if record else final


def sz_series(psi0, u, jz: DenseOperator, n_kicks: int) -> np.ndarray:
    """S_z(t) = <psi(t)|Jz|psi(t)> / J for t = 0 .. n_kicks."""
    psi = _amplitudes(psi0).copy()
    mat = _operator(u)
    m = np.real(np.diag(jz.matrix))
    j = jz.basis.j
    out = np.empty(n_kicks + 1)
    out[0] = (np.abs(psi) ** 2 @ m) / j
    for t in range(n_kicks):
        psi = mat @ psi
        out[t + 1] = (np.abs(psi) ** 2 @ m) / j
    return out


def otoc_series(psi0, u, jz: DenseOperator, n_kicks: int,
                eig: EigenSystem | None = None) -> np.ndarray:
    """C_zz(t) = |[Jz(t), Jz] psi0|^2 / J^2 for t = 0 .. n_kicks.

    The commutator of the two Hermitian operators is anti-Hermitian, so the
    expectation of minus its square is the squared norm above and is
    non-negative by construction.  Forward vectors a_t = U^t Jz psi0 and
    b_t = U^t psi0 advance by phase factors in the eigenbasis; the two
    backward sweeps per step are two basis transforms each.
    """
    if eig is None:
        eig = eigensystem(_operator(u))
    v = eig.eigenvectors
    vdag = v.conj().T
    omega = eig.eigenphases
    m = np.real(np.diag(jz.matrix))
    j = jz.basis.j
    psi = _amplitudes(psi0)

    alpha0 = vdag @ (m * psi)     # a_t in eigenbasis coordinates
    beta0 = vdag @ psi            # b_t likewise
    out = np.empty(n_kicks + 1)
    out[0] = 0.0                  # [Jz, Jz] = 0
    for t in range(1, n_kicks + 1):
        fwd = np.exp(1j * omega * t)
        a_t = v @ (fwd * alpha0)
        b_t = v @ (fwd * beta0)
        y1 = v @ (fwd.conj() * (vdag @ (m * a_t)))
        y2 = m * (v @ (fwd.conj() * (vdag @ (m * b_t))))
        k_psi = y1 - y2
        out[t] = float(np.real(np.vdot(k_psi, k_psi))) / (j * j)
    return out


def otoc_series_dense(psi0, u, jz: DenseOperator, n_kicks: int) -> np.ndarray:
    """Small-J oracle: full Heisenberg evolution Jz(t) = U^dag^t Jz U^t as matrices."""
    mat = _operator(u)
    m_op = jz.matrix.astype(complex)
    j = jz.basis.j
    psi = _amplitudes(psi0)
    w_t = m_op.copy()
    out = np.empty(n_kicks + 1)
    for t in range(n_kicks + 1):
        if t > 0:
            w_t = mat.conj().T @ w_t @ mat
        comm = w_t @ m_op - m_op @ w_t
        val = -np.vdot(psi, comm @ (comm @ psi)) / (j * j)
        out[t] = float(np.real(val))
    return out


@dataclass(frozen=True)
class ReducedDensity:
    """State of s qubits after tracing the rest out of the symmetric space."""

    s: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = np.ascontiguousarray(self.matrix, dtype=complex)
        if mat.shape != (self.s + 1, self.s + 1):
            raise ValueError("reduced density must be (s+1) x (s+1)")
        if np.abs(mat - mat.conj().T).max() > 1e-12:
            raise NumericError("reduced density is not Hermitian")
        tr = np.trace(mat).real
        if abs(tr - 1.0) > 1e-10:
            raise NumericError(f"reduced density trace deviates by {abs(tr - 1.0):.3e}")
        if np.linalg.eigvalsh(mat).min() < -1e-12:
            raise NumericError("reduced density has a significantly negative eigenvalue")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)


def split_coefficient_table(n_qubits: int, s: int) -> np.ndarray:
    """F[q, n] = f(N, n, s, q) for q = 0..s, n = 0..N."""
    f = np.zeros((s + 1, n_qubits + 1))
    for q in range(s + 1):
        for n in range(n_qubits + 1):
            f[q, n] = dicke_split_coeff(n_qubits, n, s, q)
    return f


def _split_amplitude_matrix(c: np.ndarray, f_table: np.ndarray, n_qubits: int, s: int) -> np.ndarray:
    g = np.empty((s + 1, n_qubits - s + 1), dtype=complex)
    for q in range(s + 1):
        g[q] = c[q:q + n_qubits - s + 1] * f_table[q, q:q + n_qubits - s + 1]
    return g


def reduced_density(state, s: int, f_table: np.ndarray | None = None) -> ReducedDensity:
    """Trace all but s qubits out of a symmetric 2J-qubit pure state.

    The Dicke amplitudes c_n (n = J + m excitations) are the state's
    components in this package's ascending-m ordering, so the index is used
    directly:  rho[q, q'] = sum_r c_{q+r} conj(c_{q'+r}) f(N,q+r,s,q) f(N,q'+r,s,q').
    """
    amp = _amplitudes(state)
    n_qubits = amp.size - 1
    if not 1 <= s <= MAX_TRACED_QUBITS:
        raise ValueError(f"s must be in 1..{MAX_TRACED_QUBITS}, got {s}")
    if s > n_qubits:
        raise ValueError(f"cannot keep {s} qubits of a {n_qubits}-qubit system")
    if f_table is None:
        f_table = split_coefficient_table(n_qubits, s)
    g = _split_amplitude_matrix(amp, f_table, n_qubits, s)
    return ReducedDensity(s, g @ g.conj().T)


def entanglement_entropy(rho: ReducedDensity | np.ndarray) -> float:
    """Von Neumann entropy -Tr rho ln rho, eigenvalues clipped at zero."""
    mat = rho.matrix if isinstance(rho, ReducedDensity) else np.asarray(rho, dtype=complex)
    lam = np.linalg.eigvalsh(mat)
    lam = np.clip(lam, 0.0, None)
    lam = lam[lam > 0]
    return float(-(lam * np.log(lam)).sum())


def entanglement_series(psi0, u, s: int, n_kicks: int) -> np.ndarray:
    """S_E(t) of the s-qubit reduced state for t = 0 .. n_kicks."""
    psi = _amplitudes(psi0).copy()
    mat = _operator(u)
    n_qubits = psi.size - 1
    f_table = split_coefficient_table(n_qubits, s)
    out = np.empty(n_kicks + 1)
    out[0] = entanglement_entropy(reduced_density(psi, s, f_table))
    for t in range(n_kicks):
        psi = mat @ psi
        out[t + 1] = entanglement_entropy(reduced_density(psi, s, f_table))
    return out


def participation_scaling(theta: float, phi: float, k: float, mu: float,
                          two_j_list, tau: float = 1.0, eig_provider=None):
    """M2 of the coherent state at (theta, phi) across Hilbert-space sizes.

    Returns a list of (two_j, dim, M2) rows, one per size in two_j_list.
    ``eig_provider(spec)`` can serve cached eigensystems.
    """
    rows = []
    for two_j in two_j_list:
        spec = FloquetSpec(two_j=int(two_j), k=k, mu=mu, tau=tau)
        if eig_provider is not None:
            eig = eig_provider(spec)
        else:
            eig = eigensystem(build_floquet(spec), spec=spec)
        fac = CoherentStateFactory(spec.basis)
        state = fac.state(theta, phi).amplitudes
        c = eig.eigenvectors.conj().T @ state
        rows.append((spec.two_j, spec.dim, participation_number(OverlapVector(c))))
    return rows


def husimi_snapshot(state, basis: SpinBasis, n_theta: int = 100, n_phi: int = 100,
                    rescale: bool = False, factory: CoherentStateFactory | None = None) -> PhaseGrid:
    """Husimi map of an evolved state (thin wrapper for time-series use)."""
    return husimi(_amplitudes(state), basis, n_theta=n_theta, n_phi=n_phi,
                  rescale=rescale, factory=factory)


def early_growth_fit(series: np.ndarray, min_window: int = 5, max_window: int = 30,
                     t_start: int = 1) -> dict:
    """Best log-linear fit ln C(t) = a*t + b over windows [t_start, w].

    Scans window ends w = t_start+min_window-1 .. t_start+max_window-1 and
    keeps the window with the highest R^2 among positive-slope fits.
    Returns a dict with window, slope, intercept and r2 (slope NaN when no
    usable window exists).
    """
    c = np.asarray(series, dtype=float)
    best = {"window": (t_start, t_start), "slope": float("nan"),
            "intercept": float("nan"), "r2": float("-inf")}
    for w in range(t_start + min_window - 1, min(t_start + max_window, c.size)):
        t = np.arange(t_start, w + 1)
        y = c[t_start:w + 1]
        if np.any(y <= 0):
            continue
        ln_y = np.log(y)
        slope, intercept = np.polyfit(t, ln_y, 1)
        resid = ln_y - (slope * t + intercept)
        ss_tot = ((ln_y - ln_y.mean()) ** 2).sum()
        if ss_tot == 0:
            continue
        r2 = 1.0 - (resid ** 2).sum() / ss_tot
        if slope > 0 and r2 > best["r2"]:
            best = {"window": (int(t_start), int(w)), "slope": float(slope),
                    "intercept": float(intercept), "r2": float(r2)}
    if best["r2"] == float("-inf"):
        best["r2"] = float("nan")
    return best


def saturation_value(series: np.ndarray, tail_fraction: float = 0.5) -> float:
    """Mean of the trailing fraction of a time series."""
    c = np.asarray(series, dtype=float)
    start = int(c.size * (1.0 - tail_fraction))
    return float(c[start:].mean())
