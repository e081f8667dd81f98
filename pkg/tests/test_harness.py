import json
import math
import time

import numpy as np
import pytest
import yaml
from click.testing import CliRunner

from kickedspin.cache import ResultCache
from kickedspin.cli import main
from kickedspin.config import ConfigError, load_config, parse_config
from kickedspin.datafiles import fmt_float
from kickedspin.experiments import run
from kickedspin.floquet import FloquetSpec, build_floquet, eigenphases_only, eigensystem
from kickedspin.recipes import RECIPES, recipe_configs


def write_yaml(path, doc):
    path.write_text(yaml.safe_dump(doc))
    return path


def test_float_formatting_round_trips():
    rng = np.random.default_rng(0)
    for x in rng.standard_normal(200):
        assert float(fmt_float(x)) == x


def test_config_rejects_bad_documents(tmp_path):
    with pytest.raises(ConfigError):
        parse_config({"experiment": "nope"})
    with pytest.raises(ConfigError):
        parse_config({"experiment": "sweep", "spec": {"two_j": 100},
                      "sweep": {"k_values": [1.0], "mu_values": [1.0]}})
    with pytest.raises(ConfigError):
        parse_config({"experiment": "evolve", "spec": {"two_j": 20},
                      "initial": {"theta": 4.0, "phi": 0.0}})
    with pytest.raises(ConfigError):
        parse_config({"experiment": "entangle", "spec": {"two_j": 20},
                      "initial": {"theta": 1.0, "phi": 0.0}, "dynamics": {"s": 9}})
    bad = tmp_path / "bad.yaml"
    bad.write_text("experiment: [unclosed\n")
    with pytest.raises(ConfigError, match="line"):
        load_config(bad)


def test_config_parses_full_document(tmp_path):
    doc = {
        "experiment": "otoc",
        "spec": {"two_j": 60, "k": 8.0, "mu": 3.0, "tau": 1.0},
        "initial": {"theta": 1.2, "phi": -0.5},
        "dynamics": {"kicks": 40},
        "output": {"directory": "results"},
        "cache": {"directory": "store"},
        "workers": 2,
    }
    cfg = load_config(write_yaml(tmp_path / "run.yaml", doc))
    assert cfg.kind == "otoc"
    assert cfg.spec == FloquetSpec(two_j=60, k=8.0, mu=3.0, tau=1.0)
    assert cfg.out_dir == tmp_path / "results"
    assert cfg.cache_dir == tmp_path / "store"
    assert cfg.workers == 2


def test_cache_round_trip(tmp_path):
    spec = FloquetSpec(two_j=40, k=8.0, mu=3.0)
    cache = ResultCache(tmp_path / "cache")
    eig = eigensystem(build_floquet(spec), spec=spec)
    cache.put_eigensystem(spec, eig)
    back = cache.get_eigensystem(spec)
    np.testing.assert_array_equal(back.eigenphases, eig.eigenphases)
    np.testing.assert_array_equal(back.eigenvectors, eig.eigenvectors)
    assert cache.get_eigensystem(FloquetSpec(two_j=40, k=8.1, mu=3.0)) is None
    phases = eigenphases_only(spec)
    cache.put_phases(spec, phases)
    np.testing.assert_array_equal(cache.get_phases(spec), phases)
    values = np.linspace(0, 1, 12).reshape(3, 4)
    cache.put_d2map(spec, values, q=2.0)
    np.testing.assert_array_equal(cache.get_d2map(spec, (3, 4), 2.0), values)
    assert cache.get_d2map(spec, (3, 4), 3.0) is None


def test_cache_gc_drops_oldest(tmp_path):
    cache = ResultCache(tmp_path / "cache")
    specs = [FloquetSpec(two_j=10, k=float(k), mu=1.0) for k in range(4)]
    for i, spec in enumerate(specs):
        cache.put_phases(spec, np.arange(11, dtype=float))
        path = cache._path  # noqa: SLF001 - fixing mtimes for deterministic order
        import os
        from kickedspin.cache import cache_key, KIND_PHASES
        os.utime(path(cache_key(spec, KIND_PHASES)), (1000 + i, 1000 + i))
    total = cache.total_bytes()
    per_entry = total // 4
    removed = cache.gc(max_bytes=2 * per_entry)
    assert len(removed) == 2
    assert cache.get_phases(specs[0]) is None
    assert cache.get_phases(specs[3]) is not None


def test_sweep_run_writes_outputs_and_caches(tmp_path):
    doc = {
        "experiment": "sweep",
        "spec": {"two_j": 199},
        "sweep": {"k_values": [0.5, 8.0], "mu_values": [3.0, 6.0]},
        "output": {"directory": str(tmp_path / "out")},
        "cache": {"directory": str(tmp_path / "cache")},
    }
    cfg = parse_config(doc)
    t0 = time.perf_counter()
    manifest_path = run(cfg)
    cold_s = time.perf_counter() - t0
    manifest = json.loads(manifest_path.read_text())
    outputs = {o["path"] for o in manifest["results"]["outputs"]}
    assert "sweep.csv" in outputs
    assert manifest["results"]["cache"]["misses"] == 4
    assert manifest["results"]["cache"]["hits"] == 0

    rows = (tmp_path / "out" / "sweep.csv").read_text().strip().splitlines()
    assert rows[0] == "k,mu,two_j,mean_r,n_dropped_ratios"
    assert len(rows) == 5

    # warm cache: identical data, no re-diagonalization, large speedup
    cfg2 = parse_config(doc)
    t0 = time.perf_counter()
    manifest2 = json.loads(run(cfg2).read_text())
    warm_s = time.perf_counter() - t0
    assert manifest2["results"]["cache"]["hits"] == 4
    assert manifest2["results"]["cache"]["misses"] == 0
    assert manifest2["results"]["outputs"] == manifest["results"]["outputs"]
    assert warm_s < cold_s / 5


def test_manifest_deterministic_section_reproducible(tmp_path):
    doc = {
        "experiment": "poincare",
        "spec": {"two_j": 2, "k": 1.0, "mu": 3.0},
        "classical": {"kicks": 30, "n_theta": 3, "n_phi": 3},
    }
    results = []
    for sub in ("a", "b"):
        cfg = parse_config(doc)
        cfg.out_dir = tmp_path / sub
        cfg.cache_dir = tmp_path / f"cache-{sub}"
        manifest = json.loads(run(cfg).read_text())
        manifest["results"]["config"]["out_dir"] = "X"
        manifest["results"]["config"]["cache_dir"] = "X"
        results.append(manifest["results"])
    assert results[0] == results[1]


def test_orbit_period_run_refines(tmp_path):
    doc = {
        "experiment": "orbit-period",
        "spec": {"two_j": 2, "k": 3.0, "mu": 2 * math.pi},
        "initial": {"theta": math.pi / 2 + 0.03, "phi": 0.02},
        "orbit": {"max_period": 4, "tol": 0.05, "refine": True},
        "output": {"directory": str(tmp_path)},
        "cache": {"directory": str(tmp_path / "cache")},
    }
    run(parse_config(doc))
    report = json.loads((tmp_path / "orbit.json").read_text())
    assert report["period"] == 1
    assert report["refined"]["converged"]
    assert report["refined"]["residual"] < 1e-6


def test_cli_dispatch_and_exit_codes(tmp_path):
    runner = CliRunner()
    cfg_path = tmp_path / "evolve.yaml"
    write_yaml(cfg_path, {
        "experiment": "evolve",
        "spec": {"two_j": 40, "k": 8.0, "mu": 3.0},
        "initial": {"theta": 0.3, "phi": 0.0},
        "dynamics": {"kicks": 10},
    })
    result = runner.invoke(main, ["evolve", "--config", str(cfg_path),
                                  "--out", str(tmp_path / "out"),
                                  "--cache", str(tmp_path / "cache")])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "out" / "sz.csv").exists()
    assert (tmp_path / "out" / "manifest.json").exists()

    mismatch = runner.invoke(main, ["otoc", "--config", str(cfg_path)])
    assert mismatch.exit_code == 2

    bad = tmp_path / "bad.yaml"
    bad.write_text("experiment: evolve\nspec: {two_j: -3}\n")
    broken = runner.invoke(main, ["evolve", "--config", str(bad)])
    assert broken.exit_code == 2


def test_cli_missing_config_is_config_error(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, ["sweep", "--config", str(tmp_path / "absent.yaml")])
    assert result.exit_code == 2


def test_cli_cache_info_and_gc(tmp_path):
    runner = CliRunner()
    cache = ResultCache(tmp_path / "cache")
    cache.put_phases(FloquetSpec(two_j=4, k=1.0, mu=1.0), np.arange(5, dtype=float))
    info = runner.invoke(main, ["cache", "info", "--cache", str(tmp_path / "cache")])
    assert info.exit_code == 0
    assert "entries: 1" in info.output
    gc = runner.invoke(main, ["cache", "gc", "--cache", str(tmp_path / "cache"),
                              "--max-bytes", "0"])
    assert gc.exit_code == 0
    assert "removed 1" in gc.output


def test_recipe_catalog_contract():
    assert len(RECIPES) >= 10
    for name, recipe in RECIPES.items():
        assert recipe.figure.startswith("Fig.")
        assert recipe.desk_two_j >= 2
        assert recipe.reference_two_j >= recipe.desk_two_j
        for doc in recipe_configs(name):
            parse_config(doc)  # every shipped config validates
    fig13 = recipe_configs("fig13")
    assert all(c["participation"]["two_j_list"] == [200, 400, 800, 1600] for c in fig13)


def test_recipe_expensive_escalates_spin_size():
    desk = recipe_configs("fig6")[0]["spec"]["two_j"]
    full = recipe_configs("fig6", expensive=True)[0]["spec"]["two_j"]
    assert full > desk


def test_cli_recipes_listing():
    runner = CliRunner()
    result = runner.invoke(main, ["recipes"])
    assert result.exit_code == 0
    lines = [ln for ln in result.output.splitlines() if ln.strip()]
    assert len(lines) >= 10
    assert all("Fig." in ln and "2J=" in ln for ln in lines)


def test_cli_recipes_run_small(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, ["recipes", "run", "fig12",
                                  "--out", str(tmp_path / "fig12"),
                                  "--cache", str(tmp_path / "cache")])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "fig12" / "fig12-d2map" / "fig12-d2map.csv").exists()
    assert (tmp_path / "fig12" / "fig12-poincare" / "fig12-poincare.csv").exists()


def test_worker_env_override(monkeypatch):
    from kickedspin.config import resolve_workers
    cfg = parse_config({"experiment": "poincare", "spec": {"two_j": 2}})
    monkeypatch.setenv("KICKEDSPIN_WORKERS", "3")
    assert resolve_workers(cfg) == 3
    cfg.workers = 1
    assert resolve_workers(cfg) == 1  # explicit config beats the env


def test_cache_env_override(monkeypatch, tmp_path):
    monkeypatch.setenv("KICKEDSPIN_CACHE_DIR", str(tmp_path / "envcache"))
    cache = ResultCache(None)
    assert cache.root == tmp_path / "envcache"
    assert ResultCache(tmp_path / "explicit").root == tmp_path / "explicit"


def test_sweep_cache_spot_check(monkeypatch, tmp_path):
    doc = {
        "experiment": "sweep",
        "spec": {"two_j": 199},
        "sweep": {"k_values": [2.0], "mu_values": [3.0]},
        "output": {"directory": str(tmp_path / "out")},
        "cache": {"directory": str(tmp_path / "cache")},
    }
    run(parse_config(doc))  # cold run fills the cache
    monkeypatch.setenv("KICKEDSPIN_CACHE_SPOTCHECK", "1")
    manifest = json.loads(run(parse_config(doc)).read_text())
    assert any("spot check passed" in note for note in manifest["results"]["notes"])
