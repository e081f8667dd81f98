"""Semiclassical limit: spin precession flow, kick rotation, Poincare sections.

In the large-J limit the rescaled spin m = J/J behaves as a classical unit
vector.  Between kicks it follows

    dmx/dt = -k*my*mz,   dmy/dt = -2*mz + k*mx*mz,   dmz/dt = 2*my,

which conserves E(m) = 2*mx + (k/2)*mz^2; the kick rotates (mx, my) about
the z axis by mu.  The stroboscopic map applies the flow for one period and
then the kick, mirroring the right-to-left factor order of the quantum
one-period operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import _kernels
from .floquet import FloquetSpec

DEFAULT_DT = 1e-3
NORM_TOL = 1e-10
DRIFT_WARN = 1e-6


@dataclass(frozen=True)
class ClassicalState:
    """Unit vector on the Bloch sphere."""

    m: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.m, dtype=float)
        if v.shape != (3,):
            raise ValueError("classical state must be a 3-vector")
        if abs(np.linalg.norm(v) - 1.0) > NORM_TOL:
            raise ValueError(f"classical state must be unit norm, |m| = {np.linalg.norm(v)!r}")
        v.setflags(write=False)
        object.__setattr__(self, "m", v)

    @property
    def theta(self) -> float:
        return math.acos(min(1.0, max(-1.0, self.m[2])))

    @property
    def phi(self) -> float:
        return math.atan2(self.m[1], self.m[0])


def sphere_point(theta: float, phi: float) -> np.ndarray:
    return np.array([math.cos(phi) * math.sin(theta),
                     math.sin(phi) * math.sin(theta),
                     math.cos(theta)])


def energy(m, k: float) -> float:
    """Conserved energy of the free flow, E = 2*mx + (k/2)*mz^2."""
    m = np.asarray(m, dtype=float)
    return float(2.0 * m[..., 0] + 0.5 * k * m[..., 2] ** 2)


def _as_vector(m) -> np.ndarray:
    v = m.m if isinstance(m, ClassicalState) else np.asarray(m, dtype=float)
    if v.shape != (3,):
        raise ValueError("expected a 3-vector")
    return v


def _step_count(tau: float, dt: float) -> int:
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if dt > tau:
        raise ValueError(f"dt={dt} exceeds the integration span tau={tau}")
    n = round(tau / dt)
    if abs(n * dt - tau) > 1e-9 * max(1.0, abs(tau)):
        raise ValueError(f"dt={dt} does not divide tau={tau} into integer steps")
    return n


def free_flow(m, k: float, tau: float, dt: float = DEFAULT_DT) -> ClassicalState:
    """RK4 integration of the free equations of motion over one period.

    The state is renormalized onto the sphere after every step; the residual
    drift is far below the RK4 truncation error at the default dt.
    """
    v = _as_vector(m)
    if abs(np.linalg.norm(v) - 1.0) > 1e-8:
        raise ValueError("initial state must be unit norm")
    n = _step_count(tau, dt)
    out, _ = _kernels.rk4_flow(v, k, tau, dt, n)
    return ClassicalState(out)


def kick_rotation(m, mu: float) -> ClassicalState:
    """Rotation of (mx, my) about the z axis by the kick angle mu; mz untouched."""
    v = _as_vector(m)
    c, s = math.cos(mu), math.sin(mu)
    return ClassicalState(np.array([c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]))


def stroboscopic_step(m, spec: FloquetSpec, dt: float = DEFAULT_DT) -> ClassicalState:
    """One period of the classical map: free flow for tau, then the kick."""
    return kick_rotation(free_flow(m, spec.k, spec.tau, dt), spec.mu)


def iterate_map(m, spec: FloquetSpec, n_kicks: int, dt: float = DEFAULT_DT) -> np.ndarray:
    """Stroboscopic samples after each of n_kicks periods, shape (n_kicks, 3)."""
    v = _as_vector(m)
    n = _step_count(spec.tau, dt)
    samples, _ = _kernels.stroboscopic_run(v, spec.k, spec.mu, spec.tau, dt, n, n_kicks)
    return samples


@dataclass(frozen=True)
class Trajectory:
    """Stroboscopic orbit samples (one row per kick) from one initial condition."""

    theta0: float
    phi0: float
    states: np.ndarray = field(repr=False)   # shape (n_kicks, 3)
    spec: FloquetSpec | None = None
    max_drift: float = 0.0

    @property
    def n_kicks(self) -> int:
        return self.states.shape[0]

    def angles(self) -> tuple[np.ndarray, np.ndarray]:
        """(theta, phi) arrays of the samples."""
        mz = np.clip(self.states[:, 2], -1.0, 1.0)
        return np.arccos(mz), np.arctan2(self.states[:, 1], self.states[:, 0])


def initial_grid(n_theta: int = 20, n_phi: int = 20) -> np.ndarray:
    """Midpoint (theta, phi) lattice over [0, pi] x [-pi, pi), poles excluded."""
    thetas = (np.arange(n_theta) + 0.5) * math.pi / n_theta
    phis = -math.pi + (np.arange(n_phi) + 0.5) * 2.0 * math.pi / n_phi
    return np.array([(t, p) for t in thetas for p in phis])


def poincare_section(spec: FloquetSpec, n_theta: int = 20, n_phi: int = 20,
                     kicks: int = 400, dt: float = DEFAULT_DT) -> list[Trajectory]:
    """Stroboscopic orbits from a (theta, phi) lattice of initial conditions."""
    grid = initial_grid(n_theta, n_phi)
    m0 = np.array([sphere_point(t, p) for t, p in grid])
    n = _step_count(spec.tau, dt)
    samples, drifts = _kernels.stroboscopic_batch(m0, spec.k, spec.mu, spec.tau, dt, n, kicks)
    return [
        Trajectory(theta0=float(t), phi0=float(p), states=samples[i],
                   spec=spec, max_drift=float(drifts[i]))
        for i, (t, p) in enumerate(grid)
    ]


def orbit_period(m0, spec: FloquetSpec, dt: float = DEFAULT_DT,
                 max_period: int = 8, tol: float = 1e-3) -> int | None:
    """Smallest p <= max_period with |T^p(m0) - m0| < tol, or None."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    v0 = _as_vector(m0)
    samples = iterate_map(v0, spec, max_period, dt)
    dist = np.linalg.norm(samples - v0[None, :], axis=1)
    hits = np.nonzero(dist < tol)[0]
    return int(hits[0]) + 1 if hits.size else None


@dataclass(frozen=True)
class RefinedPoint:
    """Result of locally refining a periodic point of the stroboscopic map."""

    theta: float
    phi: float
    m: np.ndarray
    period: int
    residual: float
    converged: bool


def refine_periodic_point(theta: float, phi: float, spec: FloquetSpec, period: int,
                          dt: float = DEFAULT_DT, tol: float = 1e-9) -> RefinedPoint:
    """Polish a seed (theta, phi) into a fixed point of T^period.

    Runs a least-squares root solve of the 3-vector displacement
    T^p(m(theta, phi)) - m in (theta, phi) coordinates, falling back to
    Nelder-Mead minimization of the residual norm when the solve stalls.
    """
    def displacement(x):
        m = sphere_point(x[0], x[1])
        out = iterate_map(m, spec, period, dt)[-1]
        return out - m

    def objective(x):
        d = displacement(x)
        return float(d @ d)

    sol = optimize.root(displacement, np.array([theta, phi]), method="lm",
                        options={"xtol": 1e-14, "ftol": 1e-14})
    best = np.array([theta, phi])
    if sol.success:
        cand = sol.x
        if objective(cand) < objective(best):
            best = cand
    if math.sqrt(objective(best)) > tol:
        nm = optimize.minimize(objective, best, method="Nelder-Mead",
                               options={"xatol": 1e-13, "fatol": 1e-24, "maxiter": 4000})
        if nm.fun < objective(best):
            best = nm.x
    m = sphere_point(best[0], best[1])
    residual = float(np.linalg.norm(displacement(best)))
    return RefinedPoint(theta=float(best[0]), phi=float(best[1]), m=m, period=period,
                        residual=residual, converged=residual <= tol)
