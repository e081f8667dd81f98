"""Command-line interface: one subcommand per experiment plus recipes and cache."""

from __future__ import annotations

import sys
from pathlib import Path

import click
import yaml

from .cache import ResultCache
from .config import ExperimentConfig, load_config, parse_config
from .errors import ConfigError, NumericError
from .experiments import run
from .recipes import RECIPES, recipe_configs

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _apply_overrides(cfg: ExperimentConfig, out, cache, workers, expensive):
    if out is not None:
        cfg.out_dir = Path(out)
    if cache is not None:
        cfg.cache_dir = Path(cache)
    if workers is not None:
        cfg.workers = workers
    if expensive:
        cfg.expensive = True
    return cfg


def _run_config(cfg: ExperimentConfig):
    try:
        manifest = run(cfg)
    except NumericError as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)
    click.echo(f"wrote {manifest}")


def _experiment_command(kind: str, help_text: str):
    @click.command(name=kind, help=help_text)
    @click.option("--config", "config_path", required=True, type=click.Path(exists=False),
                  help="YAML experiment file")
    @click.option("--out", type=click.Path(), default=None, help="output directory override")
    @click.option("--cache", type=click.Path(), default=None, help="cache directory override")
    @click.option("--workers", type=int, default=None, help="worker count override")
    @click.option("--expensive", is_flag=True, default=False,
                  help="run at the full reference scale where the config supports it")
    def command(config_path, out, cache, workers, expensive):
        try:
            cfg = load_config(config_path)
            if cfg.kind != kind:
                raise ConfigError(
                    f"config declares experiment {cfg.kind!r} but the {kind!r} subcommand was invoked"
                )
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        _run_config(_apply_overrides(cfg, out, cache, workers, expensive))

    return command


@click.group()
def main():
    """Spectral statistics, phase-space measures, and stroboscopic dynamics of a kicked collective spin."""


_HELP = {
    "sweep": "Mean spacing ratio over a (k, mu) grid.",
    "poincare": "Classical stroboscopic trajectories from a (theta, phi) lattice.",
    "husimi": "Husimi maps of selected Floquet eigenstates.",
    "d2map": "Multifractal dimension of coherent states on a phase-space grid.",
    "avg-d2": "Sphere-averaged D2 for a list of interaction strengths.",
    "evolve": "S_z time series (optionally with Husimi snapshots).",
    "otoc": "C_zz time series with an early-growth fit report.",
    "entangle": "Entanglement entropy time series of s kept qubits.",
    "participation": "Participation-number size scaling at a phase-space point.",
    "orbit-period": "Minimal classical orbit period, optionally refined.",
}
for _kind, _help in _HELP.items():
    main.add_command(_experiment_command(_kind, _help))


@main.group(invoke_without_command=True)
@click.pass_context
def recipes(ctx):
    """List or run the shipped figure-reproduction recipes."""
    if ctx.invoked_subcommand is None:
        for name in sorted(RECIPES, key=lambda n: int(n[3:])):
            r = RECIPES[name]
            click.echo(f"{r.name:7s} {r.figure:8s} desk 2J={r.desk_two_j:<5d} "
                       f"reference 2J={r.reference_two_j:<5d} {r.est_runtime:14s} {r.description}")


@recipes.command("show")
@click.argument("name")
@click.option("--expensive", is_flag=True, default=False)
def recipes_show(name, expensive):
    """Print the expanded experiment configs of one recipe as YAML."""
    try:
        configs = recipe_configs(name, expensive=expensive)
    except KeyError as exc:
        click.echo(str(exc.args[0]), err=True)
        sys.exit(EXIT_CONFIG)
    click.echo(f"# recipe {name}: {RECIPES[name].description}")
    click.echo(yaml.safe_dump_all(configs, sort_keys=False), nl=False)


@recipes.command("run")
@click.argument("name")
@click.option("--out", type=click.Path(), required=True)
@click.option("--cache", type=click.Path(), default=None)
@click.option("--workers", type=int, default=None)
@click.option("--expensive", is_flag=True, default=False)
def recipes_run(name, out, cache, workers, expensive):
    """Execute every experiment of one recipe (outputs under --out/<label>)."""
    try:
        configs = recipe_configs(name, expensive=expensive)
    except KeyError as exc:
        click.echo(str(exc.args[0]), err=True)
        sys.exit(EXIT_CONFIG)
    for doc in configs:
        try:
            cfg = parse_config(doc)
        except ConfigError as exc:
            click.echo(f"config error in recipe {name}: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        cfg.out_dir = Path(out) / (cfg.label or cfg.kind)
        _apply_overrides(cfg, None, cache, workers, expensive)
        _run_config(cfg)


@main.group()
def cache():
    """Inspect or prune the binary result cache."""


@cache.command("info")
@click.option("--cache", "cache_dir", type=click.Path(), default=None)
def cache_info(cache_dir):
    store = ResultCache(cache_dir)
    entries = store.entries()
    click.echo(f"cache directory: {store.root}")
    click.echo(f"entries: {len(entries)}")
    click.echo(f"total bytes: {store.total_bytes()}")


@cache.command("gc")
@click.option("--cache", "cache_dir", type=click.Path(), default=None)
@click.option("--max-bytes", type=int, required=True,
              help="delete oldest records until the store fits this size")
def cache_gc(cache_dir, max_bytes):
    store = ResultCache(cache_dir)
    removed = store.gc(max_bytes)
    click.echo(f"removed {len(removed)} records; {store.total_bytes()} bytes retained")


if __name__ == "__main__":
    main()
