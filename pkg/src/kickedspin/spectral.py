"""Level-spacing-ratio statistics of Floquet eigenphases and parameter sweeps.

The ratio statistic r_n = min(d_n, d_{n+1}) / max(d_n, d_{n+1}) over
consecutive spacings of the sorted eigenphases needs no unfolding; its mean
separates Poisson (~0.386) from Wigner-Dyson (~0.53) spectra.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError
from .floquet import FloquetSpec, eigenphases_only

ZERO_SPACING_TOL = 1e-12
MIN_SWEEP_DIM = 200


@dataclass(frozen=True)
class RatioSeries:
    """Consecutive-spacing ratios of one spectrum, with degenerate drops counted."""

    ratios: np.ndarray
    n_dropped: int = 0
    spec: FloquetSpec | None = None

    def __post_init__(self):
        r = np.ascontiguousarray(self.ratios, dtype=float)
        r.setflags(write=False)
        object.__setattr__(self, "ratios", r)


def spacing_ratios(eigenphases: np.ndarray, spec: FloquetSpec | None = None) -> RatioSeries:
    """Ratios r_n over the sorted principal-range phases.

    The N-1 linear spacings of the sorted phases are used without the
    wrap-around gap.  Ratios touching a numerically zero spacing
    (< 1e-12, a degeneracy flag) are dropped and counted.
    """
    w = np.asarray(eigenphases, dtype=float)
    if w.ndim != 1 or w.size < 3:
        raise ValueError("need at least three sorted eigenphases")
    if np.any(np.diff(w) < 0):
        raise ValueError("eigenphases must be sorted ascending")
    d = np.diff(w)
    lo = np.minimum(d[:-1], d[1:])
    hi = np.maximum(d[:-1], d[1:])
    keep = (d[:-1] > ZERO_SPACING_TOL) & (d[1:] > ZERO_SPACING_TOL)
    ratios = lo[keep] / hi[keep]
    return RatioSeries(ratios, n_dropped=int(np.count_nonzero(~keep)), spec=spec)


def mean_r(series: RatioSeries | np.ndarray) -> float:
    ratios = series.ratios if isinstance(series, RatioSeries) else np.asarray(series, dtype=float)
    if ratios.size == 0:
        raise ValueError("cannot average an empty ratio series")
    return float(ratios.mean())


@dataclass(frozen=True)
class SweepResult:
    """Mean spacing ratio on a (k, mu) grid; NaN marks failed cells."""

    k_values: np.ndarray
    mu_values: np.ndarray
    mean_r: np.ndarray          # shape (len(k_values), len(mu_values))
    n_dropped: np.ndarray       # same shape, integer drop counts
    two_j: int
    tau: float = 1.0
    elapsed_s: float = 0.0
    failures: tuple = field(default_factory=tuple)

    def cells(self):
        """Iterate (k, mu, mean_r, n_dropped) in row-major grid order."""
        for i, k in enumerate(self.k_values):
            for j, mu in enumerate(self.mu_values):
                yield float(k), float(mu), float(self.mean_r[i, j]), int(self.n_dropped[i, j])


def _sweep_cell(two_j: int, k: float, mu: float, tau: float):
    spec = FloquetSpec(two_j=two_j, k=k, mu=mu, tau=tau)
    series = spacing_ratios(eigenphases_only(spec), spec=spec)
    return mean_r(series), series.n_dropped


def sweep_mean_r(k_grid, mu_grid, two_j: int, tau: float = 1.0,
                 workers: int | None = None, phase_source=None) -> SweepResult:
    """<r> over every (k, mu) grid cell; cells are independent and threaded.

    LAPACK releases the GIL, so a thread pool parallelizes the per-cell
    diagonalizations.  A failing cell records NaN instead of aborting the
    sweep.  ``phase_source(spec)`` can be injected to serve cached
    eigenphases.
    """
    k_values = np.atleast_1d(np.asarray(k_grid, dtype=float))
    mu_values = np.atleast_1d(np.asarray(mu_grid, dtype=float))
    if k_values.size == 0 or mu_values.size == 0:
        raise ValueError("sweep grids must be non-empty")
    if two_j + 1 < MIN_SWEEP_DIM:
        raise ValueError(
            f"sweep needs dimension >= {MIN_SWEEP_DIM} for stable statistics, got {two_j + 1}"
        )
    if workers is None:
        workers = default_workers()

    out = np.full((k_values.size, mu_values.size), np.nan)
    dropped = np.zeros(out.shape, dtype=int)
    failures = []

    def cell(idx):
        i, j = idx
        spec = FloquetSpec(two_j=two_j, k=float(k_values[i]), mu=float(mu_values[j]), tau=tau)
        phases = phase_source(spec) if phase_source is not None else eigenphases_only(spec)
        series = spacing_ratios(phases, spec=spec)
        return mean_r(series), series.n_dropped

    indices = [(i, j) for i in range(k_values.size) for j in range(mu_values.size)]
    t0 = time.perf_counter()
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for idx, result in zip(indices, pool.map(lambda ij: _guarded(cell, ij), indices)):
            if isinstance(result, Exception):
                failures.append((idx, repr(result)))
            else:
                out[idx], dropped[idx] = result
    elapsed = time.perf_counter() - t0
    return SweepResult(k_values, mu_values, out, dropped, two_j=two_j, tau=tau,
                       elapsed_s=elapsed, failures=tuple(failures))


def _guarded(fn, arg):
    try:
        return fn(arg)
    except (NumericError, np.linalg.LinAlgError) as exc:
        return exc


def default_workers() -> int:
    env = os.environ.get("KICKEDSPIN_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
