"""Experiment configuration: a single YAML file with nested sections.

Every run is described by one diff-able document; the CLI validates all
numeric fields against the module preconditions before dispatching, so a
bad config fails fast with the offending field named.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError
from .floquet import FloquetSpec

EXPERIMENT_KINDS = (
    "sweep", "poincare", "husimi", "d2map", "avg-d2", "evolve",
    "otoc", "entangle", "participation", "orbit-period",
)

ENV_WORKERS = "KICKEDSPIN_WORKERS"


@dataclass
class InitialState:
    """Either a coherent state at (theta, phi) or a one-site product state."""

    theta: float | None = None
    phi: float | None = None
    site: int | None = None

    def validate(self, where: str):
        if self.site is not None:
            if self.site not in (1, 2):
                raise ConfigError(f"{where}.site must be 1 or 2, got {self.site}")
            if self.theta is not None or self.phi is not None:
                raise ConfigError(f"{where}: give either site or (theta, phi), not both")
            return
        if self.theta is None or self.phi is None:
            raise ConfigError(f"{where}: needs theta and phi (or site)")
        if not 0.0 <= self.theta <= math.pi:
            raise ConfigError(f"{where}.theta must lie in [0, pi], got {self.theta}")


@dataclass
class ExperimentConfig:
    kind: str
    two_j: int = 400
    k: float = 8.0
    mu: float = 3.0
    tau: float = 1.0
    # grids
    k_values: list = dc_field(default_factory=list)
    mu_values: list = dc_field(default_factory=list)
    n_theta: int = 100
    n_phi: int = 100
    rescale: bool = False
    q: float = 2.0
    # classical map
    dt: float = 1e-3
    classical_kicks: int = 400
    grid_theta: int = 20
    grid_phi: int = 20
    # dynamics
    initial: InitialState = dc_field(default_factory=InitialState)
    kicks: int = 200
    s: int = 2
    snapshot_times: list = dc_field(default_factory=list)
    # husimi
    eigenstate_indices: list = dc_field(default_factory=list)
    n_random_states: int = 0
    seed: int = 0
    # participation
    two_j_list: list = dc_field(default_factory=list)
    # orbit-period
    max_period: int = 8
    tol: float = 1e-3
    refine: bool = False
    refine_period: int = 0
    # plumbing
    out_dir: Path = Path("out")
    cache_dir: Path | None = None
    workers: int | None = None
    expensive: bool = False
    label: str = ""

    @property
    def spec(self) -> FloquetSpec:
        return FloquetSpec(two_j=self.two_j, k=self.k, mu=self.mu, tau=self.tau)

    def snapshot(self) -> dict:
        """JSON-ready copy of every field (for the manifest)."""
        out = {}
        for name, value in self.__dict__.items():
            if isinstance(value, Path):
                value = str(value)
            elif isinstance(value, InitialState):
                value = {k: v for k, v in value.__dict__.items() if v is not None}
            out[name] = value
        return out


def _grid_values(node, where: str) -> list[float]:
    if isinstance(node, list):
        vals = [float(x) for x in node]
    elif isinstance(node, dict):
        try:
            vals = list(np.linspace(float(node["start"]), float(node["stop"]), int(node["num"])))
        except KeyError as exc:
            raise ConfigError(f"{where}: grid dict needs start/stop/num, missing {exc}") from None
    else:
        raise ConfigError(f"{where}: expected a list or a start/stop/num dict")
    if not vals:
        raise ConfigError(f"{where}: grid is empty")
    return vals


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ConfigError(f"missing required field {where}.{key}")
    return mapping[key]


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    return int(value)


def parse_config(doc: dict, base_dir: Path | None = None) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a mapping")
    kind = _require(doc, "experiment", "<root>")
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"experiment must be one of {EXPERIMENT_KINDS}, got {kind!r}")

    spec_node = doc.get("spec", {})
    cfg = ExperimentConfig(
        kind=kind,
        two_j=_as_int(spec_node.get("two_j", 400), "spec.two_j"),
        k=float(spec_node.get("k", 8.0)),
        mu=float(spec_node.get("mu", 3.0)),
        tau=float(spec_node.get("tau", 1.0)),
        label=str(doc.get("label", "")),
    )
    if cfg.two_j < 1:
        raise ConfigError(f"spec.two_j must be >= 1, got {cfg.two_j}")
    if cfg.tau <= 0:
        raise ConfigError(f"spec.tau must be positive, got {cfg.tau}")

    if kind == "sweep":
        sweep = doc.get("sweep", {})
        cfg.k_values = _grid_values(_require(sweep, "k_values", "sweep"), "sweep.k_values")
        cfg.mu_values = _grid_values(_require(sweep, "mu_values", "sweep"), "sweep.mu_values")
        if cfg.two_j + 1 < 200:
            raise ConfigError("sweep needs spec.two_j >= 199 (dimension floor of 200)")
    if kind == "avg-d2":
        cfg.k_values = _grid_values(_require(doc.get("avg_d2", {}), "k_values", "avg_d2"),
                                    "avg_d2.k_values")

    grid = doc.get("grid", {})
    cfg.n_theta = _as_int(grid.get("n_theta", 100), "grid.n_theta")
    cfg.n_phi = _as_int(grid.get("n_phi", 100), "grid.n_phi")
    cfg.rescale = bool(grid.get("rescale", False))
    cfg.q = float(grid.get("q", 2.0))
    if cfg.n_theta < 2 or cfg.n_phi < 2:
        raise ConfigError("grid.n_theta and grid.n_phi must both be >= 2")
    if cfg.q < 0 or cfg.q == 1:
        raise ConfigError(f"grid.q must be >= 0 and != 1, got {cfg.q}")

    classical = doc.get("classical", {})
    cfg.dt = float(classical.get("dt", 1e-3))
    cfg.classical_kicks = _as_int(classical.get("kicks", 400), "classical.kicks")
    cfg.grid_theta = _as_int(classical.get("n_theta", 20), "classical.n_theta")
    cfg.grid_phi = _as_int(classical.get("n_phi", 20), "classical.n_phi")
    if cfg.dt <= 0 or cfg.dt > cfg.tau:
        raise ConfigError(f"classical.dt must lie in (0, tau], got {cfg.dt}")

    init = doc.get("initial", {})
    cfg.initial = InitialState(
        theta=float(init["theta"]) if "theta" in init else None,
        phi=float(init["phi"]) if "phi" in init else None,
        site=_as_int(init["site"], "initial.site") if "site" in init else None,
    )
    if kind in ("evolve", "otoc", "entangle", "orbit-period"):
        cfg.initial.validate("initial")
    if kind in ("otoc",) and cfg.initial.site is None and cfg.initial.theta is None:
        raise ConfigError("otoc needs an initial state")

    dyn = doc.get("dynamics", {})
    cfg.kicks = _as_int(dyn.get("kicks", 200), "dynamics.kicks")
    cfg.s = _as_int(dyn.get("s", 2), "dynamics.s")
    cfg.snapshot_times = [int(t) for t in dyn.get("snapshot_times", [])]
    if cfg.kicks < 1:
        raise ConfigError("dynamics.kicks must be >= 1")
    if not 1 <= cfg.s <= 4:
        raise ConfigError(f"dynamics.s must be in 1..4, got {cfg.s}")

    hus = doc.get("husimi", {})
    cfg.eigenstate_indices = [
        _as_int(i, "husimi.eigenstate_indices") for i in hus.get("eigenstate_indices", [])
    ]
    cfg.n_random_states = _as_int(hus.get("n_random_states", 0), "husimi.n_random_states")
    cfg.seed = _as_int(hus.get("seed", 0), "husimi.seed")
    if kind == "husimi" and not cfg.eigenstate_indices and cfg.n_random_states < 1:
        raise ConfigError("husimi needs eigenstate_indices or n_random_states >= 1")
    for idx in cfg.eigenstate_indices:
        if not 0 <= idx <= cfg.two_j:
            raise ConfigError(f"husimi.eigenstate_indices entry {idx} outside 0..{cfg.two_j}")

    part = doc.get("participation", {})
    cfg.two_j_list = [_as_int(x, "participation.two_j_list") for x in part.get("two_j_list", [])]
    if kind == "participation":
        if not cfg.two_j_list:
            raise ConfigError("participation needs participation.two_j_list")
        if sorted(cfg.two_j_list) != cfg.two_j_list:
            raise ConfigError("participation.two_j_list must be ascending")
        cfg.initial.validate("initial")

    orbit = doc.get("orbit", {})
    cfg.max_period = _as_int(orbit.get("max_period", 8), "orbit.max_period")
    cfg.tol = float(orbit.get("tol", 1e-3))
    cfg.refine = bool(orbit.get("refine", False))
    cfg.refine_period = _as_int(orbit.get("period", 0), "orbit.period")
    if cfg.tol <= 0:
        raise ConfigError("orbit.tol must be positive")

    out = doc.get("output", {})
    cfg.out_dir = Path(out.get("directory", "out"))
    cache_node = doc.get("cache", {})
    if "directory" in cache_node:
        cfg.cache_dir = Path(cache_node["directory"])
    if "workers" in doc and doc["workers"] is not None:
        cfg.workers = _as_int(doc["workers"], "workers")
        if cfg.workers < 1:
            raise ConfigError("workers must be >= 1")
    cfg.expensive = bool(doc.get("expensive", False))

    if base_dir is not None:
        if not cfg.out_dir.is_absolute():
            cfg.out_dir = base_dir / cfg.out_dir
        if cfg.cache_dir is not None and not cfg.cache_dir.is_absolute():
            cfg.cache_dir = base_dir / cfg.cache_dir
    return cfg


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    """Parse and validate a YAML experiment file; ConfigError carries line info."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"config parse error in {path}{loc}: {exc}") from exc
    return parse_config(doc, base_dir=path.parent)


def resolve_workers(cfg: ExperimentConfig) -> int:
    if cfg.workers is not None:
        return cfg.workers
    env = os.environ.get(ENV_WORKERS)
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"{ENV_WORKERS} must be an integer, got {env!r}") from exc
    return os.cpu_count() or 1
