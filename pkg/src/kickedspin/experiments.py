"""Experiment runners: dispatch a validated config, emit CSV/JSON, cache reuse.

Every runner writes its data files plus JSON sidecars into the configured
output directory and finishes by writing ``manifest.json``.  Dense
eigendecompositions are served through the binary result cache so repeated
runs of the same spec never re-diagonalize.
"""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np

from .cache import ResultCache
from .classical import iterate_map, orbit_period, poincare_section, refine_periodic_point, sphere_point
from .config import ExperimentConfig, resolve_workers
from .datafiles import ManifestBuilder, write_csv, write_json
from .dynamics import (
    early_growth_fit,
    entanglement_series,
    evolve,
    husimi_snapshot,
    otoc_series,
    participation_scaling,
    product_state,
    saturation_value,
    sz_series,
)
from .errors import NumericError
from .floquet import FloquetSpec, build_floquet, eigenphases_only, eigensystem
from .phase_space import d2_map, average_d2, husimi
from .spectral import spacing_ratios, mean_r, sweep_mean_r
from .spin import CoherentStateFactory, SpinBasis, build_jz


class CachedSolver:
    """Eigendecomposition access routed through the result cache."""

    def __init__(self, cache: ResultCache):
        self.cache = cache
        self.keys_used: list[str] = []

    def eigensystem(self, spec: FloquetSpec):
        eig = self.cache.get_eigensystem(spec)
        if eig is None:
            eig = eigensystem(build_floquet(spec), spec=spec)
            key = self.cache.put_eigensystem(spec, eig)
        else:
            from .cache import cache_key, KIND_EIGENSYSTEM
            key = cache_key(spec, KIND_EIGENSYSTEM)
        self.keys_used.append(key)
        return eig

    def phases(self, spec: FloquetSpec):
        phases = self.cache.get_phases(spec)
        if phases is None:
            phases = eigenphases_only(spec)
            key = self.cache.put_phases(spec, phases)
        else:
            from .cache import cache_key, KIND_PHASES
            key = cache_key(spec, KIND_PHASES)
        self.keys_used.append(key)
        return phases

    def d2map_values(self, spec: FloquetSpec, n_theta: int, n_phi: int, q: float,
                     workers: int = 1):
        values = self.cache.get_d2map(spec, (n_theta, n_phi), q)
        if values is None:
            grid = d2_map(spec, n_theta=n_theta, n_phi=n_phi, q=q,
                          eig=self.eigensystem(spec), workers=workers)
            values = grid.values
            self.keys_used.append(self.cache.put_d2map(spec, values, q))
        else:
            from .cache import cache_key, KIND_D2MAP
            self.keys_used.append(cache_key(spec, KIND_D2MAP, extra=f"{n_theta}x{n_phi}:q={q!r}"))
        return values


def _stem(cfg: ExperimentConfig, default: str) -> str:
    return cfg.label if cfg.label else default


def _initial_state(cfg: ExperimentConfig, basis: SpinBasis, factory: CoherentStateFactory | None = None):
    init = cfg.initial
    if init.site is not None:
        return product_state(basis, init.site).amplitudes, {"site": init.site}
    fac = factory if factory is not None else CoherentStateFactory(basis)
    st = fac.state(init.theta, init.phi)
    return st.amplitudes, {"theta": init.theta, "phi": init.phi}


def _spec_meta(cfg: ExperimentConfig) -> dict:
    return {"two_j": cfg.two_j, "k": cfg.k, "mu": cfg.mu, "tau": cfg.tau}


def run(cfg: ExperimentConfig, cache: ResultCache | None = None) -> Path:
    """Dispatch one experiment; returns the path of the written manifest."""
    runners = {
        "sweep": run_sweep,
        "poincare": run_poincare,
        "husimi": run_husimi,
        "d2map": run_d2map,
        "avg-d2": run_avg_d2,
        "evolve": run_evolve,
        "otoc": run_otoc,
        "entangle": run_entangle,
        "participation": run_participation,
        "orbit-period": run_orbit_period,
    }
    cache = cache if cache is not None else ResultCache(cfg.cache_dir)
    solver = CachedSolver(cache)
    manifest = ManifestBuilder(cfg.snapshot(), cfg.out_dir)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        runners[cfg.kind](cfg, solver, manifest)
    finally:
        manifest.add_phase(cfg.kind, time.perf_counter() - t0)
        manifest.set_cache_stats(cache.hits, cache.misses, solver.keys_used)
    return manifest.write()


def _spot_check_cell(cfg: ExperimentConfig, solver: CachedSolver, manifest: ManifestBuilder):
    # optional runtime audit: recompute one sampled cell from scratch and
    # require bitwise agreement with the cache-served phases
    import os

    if os.environ.get("KICKEDSPIN_CACHE_SPOTCHECK") != "1" or solver.cache.hits == 0:
        return
    spec = FloquetSpec(two_j=cfg.two_j, k=float(cfg.k_values[0]),
                       mu=float(cfg.mu_values[0]), tau=cfg.tau)
    cached = solver.cache.get_phases(spec)
    fresh = eigenphases_only(spec)
    if cached is None or not np.array_equal(cached, fresh):
        raise NumericError(f"cache spot check failed for {spec}")
    manifest.note(f"cache spot check passed on cell (k={spec.k}, mu={spec.mu})")


def run_sweep(cfg: ExperimentConfig, solver: CachedSolver, manifest: ManifestBuilder):
    result = sweep_mean_r(cfg.k_values, cfg.mu_values, cfg.two_j, tau=cfg.tau,
                          workers=resolve_workers(cfg), phase_source=solver.phases)
    _spot_check_cell(cfg, solver, manifest)
    stem = _stem(cfg, "sweep")
    csv_path = write_csv(
        cfg.out_dir / f"{stem}.csv",
        ["k", "mu", "two_j", "mean_r", "n_dropped_ratios"],
        [(k, mu, cfg.two_j, r, n) for k, mu, r, n in result.cells()],
    )
    manifest.add_output(csv_path)
    manifest.add_phase("sweep-cells", result.elapsed_s)
    manifest.add_output(write_json(cfg.out_dir / f"{stem}.json", {
        "experiment": "sweep",
        "spec": _spec_meta(cfg),
        "k_values": [float(x) for x in result.k_values],
        "mu_values": [float(x) for x in result.mu_values],
        "failures": [{"cell": list(map(int, idx)), "error": msg} for idx, msg in result.failures],
    }))
    if result.failures:
        cells = ", ".join(str(tuple(map(int, idx))) for idx, _ in result.failures)
        raise NumericError(f"sweep cells failed: {cells} (partial results flushed)")


def run_poincare(cfg: ExperimentConfig, solver: CachedSolver, manifest: ManifestBuilder):
    trajs = poincare_section(cfg.spec, n_theta=cfg.grid_theta, n_phi=cfg.grid_phi,
                             kicks=cfg.classical_kicks, dt=cfg.dt)
    stem = _stem(cfg, "poincare")
    rows = []
    warnings = []
    for tid, traj in enumerate(trajs):
        theta, phi = traj.angles()
        for step in range(traj.n_kicks):
            m = traj.states[step]
            rows.append((tid, step, float(theta[step]), float(phi[step]),
                         float(m[0]), float(m[1]), float(m[2])))
        if traj.max_drift > 1e-6:
            warnings.append({"traj_id": tid, "max_drift": traj.max_drift})
    csv_path = write_csv(cfg.out_dir / f"{stem}.csv",
                         ["traj_id", "step", "theta", "phi", "mx", "my", "mz"], rows)
    manifest.add_output(csv_path)
    manifest.add_output(write_json(cfg.out_dir / f"{stem}.json", {
        "experiment": "poincare",
        "spec": _spec_meta(cfg),
        "grid": {"n_theta": cfg.grid_theta, "n_phi": cfg.grid_phi},
        "kicks": cfg.classical_kicks,
        "dt": cfg.dt,
        "norm_drift_warnings": warnings,
    }))


def _husimi_csv(grid, path):
    rows = [(float(t), float(p), float(grid.values[i, j]))
            for i, t in enumerate(grid.theta_values)
            for j, p in enumerate(grid.phi_values)]
    return write_csv(path, ["theta", "phi", "value"], rows)


def run_husimi(cfg: ExperimentConfig, solver: CachedSolver, manifest: ManifestBuilder):
    eig = solver.eigensystem(cfg.spec)
    basis = cfg.spec.basis
    factory = CoherentStateFactory(basis)
    indices = list(cfg.eigenstate_indices)
    if not indices:
        rng = np.random.default_rng(cfg.seed)
        indices = sorted(rng.choice(eig.dim, size=cfg.n_random_states, replace=False).tolist())
    stem = _stem(cfg, "husimi")
    for idx in indices:
        grid = husimi(eig.eigenvectors[:, idx], basis, n_theta=cfg.n_theta, n_phi=cfg.n_phi,
                      rescale=cfg.rescale, factory=factory)
        manifest.add_output(_husimi_csv(grid, cfg.out_dir / f"{stem}_state{idx}.csv"))
    manifest.add_output(write_json(cfg.out_dir / f"{stem}.json", {
        "experiment": "husimi",
        "spec": _spec_meta(cfg),
        "eigenstate_indices": indices,
        "seed": cfg.seed,
        "grid": {"n_theta": cfg.n_theta, "n_phi": cfg.n_phi},
        "rescaled": cfg.rescale,
    }))


def run_d2map(cfg: ExperimentConfig, solver: CachedSolver, manifest: ManifestBuilder):
    values = solver.d2map_values(cfg.spec, cfg.n_theta, cfg.n_phi, cfg.q,
                                 workers=resolve_workers(cfg))
    from .phase_space import midpoint_axes, PhaseGrid
    thetas, phis = midpoint_axes(cfg.n_theta, cfg.n_phi)
    grid = PhaseGrid(thetas, phis, values)
    stem = _stem(cfg, "d2map")
    manifest.add_output(_husimi_csv(grid, cfg.out_dir / f"{stem}.csv"))
    manifest.add_output(write_json(cfg.out_dir / f"{stem}.json", {
        "experiment": "d2map",
        "spec": _spec_meta(cfg),
        "grid": {"n_theta": cfg.n_theta, "n_phi": cfg.n_phi},
        "q": cfg.q,
    }))


def run_avg_d2(cfg: ExperimentConfig, solver: CachedSolver, manifest: ManifestBuilder):
    from .phase_space import midpoint_axes, PhaseGrid
    thetas, phis = midpoint_axes(cfg.n_theta, cfg.n_phi)
    rows = []
    for k in cfg.k_values:
        spec = FloquetSpec(two_j=cfg.two_j, k=float(k), mu=cfg.mu, tau=cfg.tau)
        values = solver.d2map_values(spec, cfg.n_theta, cfg.n_phi, cfg.q,
                                     workers=resolve_workers(cfg))
        rows.append((cfg.two_j, float(k), average_d2(PhaseGrid(thetas, phis, values))))
    stem = _stem(cfg, "avg_d2")
    manifest.add_output(write_csv(cfg.out_dir / f"{stem}.csv", ["two_j", "k", "avg_d2"], rows))
    manifest.add_output(write_json(cfg.out_dir / f"{stem}.json", {
        "experiment": "avg-d2",
        "spec": _spec_meta(cfg),
        "k_values": [float(k) for k in cfg.k_values],
        "grid": {"n_theta": cfg.n_theta, "n_phi": cfg.n_phi},
        "q": cfg.q,
    }))


def _timeseries_outputs(cfg, manifest, stem, kind, series, extra_meta=None):
    manifest.add_output(write_csv(cfg.out_dir / f"{stem}.csv", ["t", "value"],
                                  list(enumerate(series))))
    meta = {
        "experiment": kind,
        "spec": _spec_meta(cfg),
        "kicks": cfg.kicks,
        "observable": {"evolve": "sz", "otoc": "czz", "entangle": "entanglement_entropy"}[kind],
    }
    if extra_meta:
        meta.update(extra_meta)
    manifest.add_output(write_json(cfg.out_dir / f"{stem}.json", meta))


def run_evolve(cfg: ExperimentConfig, solver: CachedSolver, manifest: ManifestBuilder):
    basis = cfg.spec.basis
    factory = CoherentStateFactory(basis)
    psi0, init_meta = _initial_state(cfg, basis, factory)
    u = build_floquet(cfg.spec)
    jz = build_jz(basis)
    series = sz_series(psi0, u, jz, cfg.kicks)
    stem = _stem(cfg, "sz")
    _timeseries_outputs(cfg, manifest, stem, "evolve", series, {"initial": init_meta})
    if cfg.snapshot_times:
        state = psi0
        taken = 0
        for target in sorted(cfg.snapshot_times):
            state = evolve(state, u, target - taken).amplitudes
            taken = target
            grid = husimi_snapshot(state, basis, n_theta=cfg.n_theta, n_phi=cfg.n_phi,
                                   rescale=cfg.rescale, factory=factory)
            manifest.add_output(_husimi_csv(grid, cfg.out_dir / f"{stem}_husimi_t{target}.csv"))


def run_otoc(cfg: ExperimentConfig, solver: CachedSolver, manifest: ManifestBuilder):
    basis = cfg.spec.basis
    psi0, init_meta = _initial_state(cfg, basis)
    eig = solver.eigensystem(cfg.spec)
    jz = build_jz(basis)
    series = otoc_series(psi0, None, jz, cfg.kicks, eig=eig)
    stem = _stem(cfg, "otoc")
    _timeseries_outputs(cfg, manifest, stem, "otoc", series, {"initial": init_meta})
    fit = early_growth_fit(series)
    manifest.add_output(write_json(cfg.out_dir / f"{stem}_fit.json", {
        "window": list(fit["window"]),
        "slope": fit["slope"],
        "intercept": fit["intercept"],
        "r2": fit["r2"],
        "saturation": saturation_value(series),
    }))


def run_entangle(cfg: ExperimentConfig, solver: CachedSolver, manifest: ManifestBuilder):
    basis = cfg.spec.basis
    psi0, init_meta = _initial_state(cfg, basis)
    u = build_floquet(cfg.spec)
    series = entanglement_series(psi0, u, cfg.s, cfg.kicks)
    stem = _stem(cfg, "entanglement")
    _timeseries_outputs(cfg, manifest, stem, "entangle", series,
                        {"initial": init_meta, "s": cfg.s})


def run_participation(cfg: ExperimentConfig, solver: CachedSolver, manifest: ManifestBuilder):
    rows = participation_scaling(cfg.initial.theta, cfg.initial.phi, cfg.k, cfg.mu,
                                 cfg.two_j_list, tau=cfg.tau,
                                 eig_provider=solver.eigensystem)
    stem = _stem(cfg, "participation")
    manifest.add_output(write_csv(cfg.out_dir / f"{stem}.csv", ["two_j", "dim", "m2"], rows))
    manifest.add_output(write_json(cfg.out_dir / f"{stem}.json", {
        "experiment": "participation",
        "spec": _spec_meta(cfg),
        "initial": {"theta": cfg.initial.theta, "phi": cfg.initial.phi},
        "two_j_list": cfg.two_j_list,
    }))


def run_orbit_period(cfg: ExperimentConfig, solver: CachedSolver, manifest: ManifestBuilder):
    m0 = sphere_point(cfg.initial.theta, cfg.initial.phi)
    period = orbit_period(m0, cfg.spec, dt=cfg.dt, max_period=cfg.max_period, tol=cfg.tol)
    report = {
        "experiment": "orbit-period",
        "spec": _spec_meta(cfg),
        "initial": {"theta": cfg.initial.theta, "phi": cfg.initial.phi},
        "dt": cfg.dt,
        "max_period": cfg.max_period,
        "tol": cfg.tol,
        "period": period,
    }
    if cfg.refine:
        target = cfg.refine_period or period
        if target:
            refined = refine_periodic_point(cfg.initial.theta, cfg.initial.phi, cfg.spec,
                                            period=target, dt=cfg.dt, tol=min(cfg.tol, 1e-6))
            report["refined"] = {
                "theta": refined.theta, "phi": refined.phi,
                "m": [float(x) for x in refined.m],
                "period": refined.period,
                "residual": refined.residual,
                "converged": refined.converged,
            }
        else:
            report["refined"] = None
    stem = _stem(cfg, "orbit")
    manifest.add_output(write_json(cfg.out_dir / f"{stem}.json", report))
