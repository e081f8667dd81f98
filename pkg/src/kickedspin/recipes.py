"""Figure-reproduction recipes and the shipped phase-space reference points.

Each recipe expands to one or more experiment configs at desk-scale spin
sizes (the reference figure's J is recorded alongside).  The reference
points were located numerically with the tools in this package; their
provenance is recorded next to each value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

# Initial-state catalog for mu = 3.  The model never prints coordinates for
# the marked states, so these were measured with this package's own tools:
#   * "periodic point, refined": seeded from a coarse map scan, polished by
#     the least-squares root solve in classical.refine_periodic_point to
#     residual < 1e-12 at dt = 1e-3;
#   * "D2 extremum": cell of the 100x100 D2 map at two_j = 300;
#   * "selected bulk point": chaotic-sea point chosen (seeded scan at
#     J = 200, validated at J = 400) for the cleanest early-time exponential
#     OTOC window.
REFERENCE_POINTS = {
    # k = 1 (regular regime)
    "k1_center_a": (1.025026008016733, 1.5),        # stable fixed point, refined (period 1)
    "k1_center_b": (2.075181259159772, -1.6415926535897931),  # its partner, refined
    "k1_diamond": (1.15, 1.5),                       # on a short closed orbit around k1_center_a
    "k1_circle": (0.4, 0.0),                         # on a long closed orbit (higher D2 ring)
    "k1_star": (0.658, 1.443),                       # slowest non-fixed spot ("approximately unstable")
    # k = 8 (chaotic regime)
    "k8_diamond": (1.2458, -2.135),                  # selected bulk point (exponential OTOC window)
    "k8_circle_left": (1.2850646277212987, 0.5582942875141733),   # hidden period-4 point, refined
    "k8_circle_right": (1.2850646277212057, 2.441705712486368),   # second point of the same ring
    "k8_star": (1.429, -1.665),                      # low-D2 bulk cell, no periodic orbit up to p=8
    "k8_island": (0.15, 1.5),                        # inside the north polar island
    "k8_island_center": (0.15854159060703613, 1.5),  # elliptic fixed point at the island core, refined
}


@dataclass(frozen=True)
class Recipe:
    name: str
    figure: str              # reference-figure label this recipe mirrors
    description: str
    reference_two_j: int     # spin size used by the reference figure
    desk_two_j: int          # desk-scale default (expensive flag restores reference size)
    est_runtime: str
    configs: tuple = field(default_factory=tuple)   # tuple of config dicts


def _init(point: str) -> dict:
    theta, phi = REFERENCE_POINTS[point]
    return {"theta": theta, "phi": phi}


def _dyn_config(kind: str, k: float, point: str, two_j: int, kicks: int, label: str,
                extra: dict | None = None) -> dict:
    doc = {
        "experiment": kind,
        "label": label,
        "spec": {"two_j": two_j, "k": k, "mu": 3.0, "tau": 1.0},
        "initial": _init(point),
        "dynamics": {"kicks": kicks},
    }
    if extra:
        for key, value in extra.items():
            doc.setdefault(key, {}).update(value)
    return doc


def _build_catalog() -> dict[str, Recipe]:
    twopi = 2 * math.pi
    recipes = {}

    recipes["fig1"] = Recipe(
        "fig1", "Fig. 1",
        "mean spacing ratio over the (k, mu) plane; 10x10 desk grid on k in (0,10], mu in (0, 2pi]",
        reference_two_j=2000, desk_two_j=600, est_runtime="~2 min",
        configs=({
            "experiment": "sweep", "label": "fig1",
            "spec": {"two_j": 600, "k": 1.0, "mu": 3.0},
            "sweep": {"k_values": {"start": 1.0, "stop": 10.0, "num": 10},
                      "mu_values": {"start": twopi / 10, "stop": twopi, "num": 10}},
        },),
    )
    recipes["fig2"] = Recipe(
        "fig2", "Fig. 2",
        "mean spacing ratio vs k at fixed mu = 3 and mu = 6",
        reference_two_j=2000, desk_two_j=1000, est_runtime="~4 min",
        configs=({
            "experiment": "sweep", "label": "fig2",
            "spec": {"two_j": 1000, "k": 1.0, "mu": 3.0},
            "sweep": {"k_values": {"start": 0.5, "stop": 10.0, "num": 20},
                      "mu_values": [3.0, 6.0]},
        },),
    )
    recipes["fig3"] = Recipe(
        "fig3", "Fig. 3",
        "Husimi maps (rescaled by their maxima) of randomly chosen Floquet eigenstates, "
        "regular (k=1) and chaotic (k=8) regimes",
        reference_two_j=300, desk_two_j=300, est_runtime="~1 min",
        configs=tuple(
            {
                "experiment": "husimi", "label": f"fig3-k{k:g}",
                "spec": {"two_j": 300, "k": k, "mu": 3.0},
                "grid": {"n_theta": 100, "n_phi": 100, "rescale": True},
                "husimi": {"n_random_states": 3, "seed": 7},
            }
            for k in (1.0, 8.0)
        ),
    )
    recipes["fig4"] = Recipe(
        "fig4", "Fig. 4",
        "first row: Poincare sections (20x20 initial grid, 400 kicks); "
        "second row: coherent-state D2 on a 100x100 grid; k = 1, 3, 5, 8",
        reference_two_j=300, desk_two_j=300, est_runtime="~3 min",
        configs=tuple(
            {
                "experiment": kind, "label": f"fig4-{kind}-k{k:g}",
                "spec": {"two_j": 300, "k": k, "mu": 3.0},
            }
            for k in (1.0, 3.0, 5.0, 8.0) for kind in ("poincare", "d2map")
        ),
    )
    recipes["fig5"] = Recipe(
        "fig5", "Fig. 5",
        "sphere-averaged D2 vs k for J = 100, 200, 300",
        reference_two_j=600, desk_two_j=600, est_runtime="~10 min",
        configs=tuple(
            {
                "experiment": "avg-d2", "label": f"fig5-J{two_j // 2}",
                "spec": {"two_j": two_j, "k": 1.0, "mu": 3.0},
                "avg_d2": {"k_values": {"start": 0.5, "stop": 8.0, "num": 16}},
            }
            for two_j in (200, 400, 600)
        ),
    )
    sz_points = [("k1_diamond", 1.0), ("k1_circle", 1.0), ("k1_star", 1.0),
                 ("k8_diamond", 8.0), ("k8_circle_left", 8.0), ("k8_island", 8.0)]
    recipes["fig6"] = Recipe(
        "fig6", "Fig. 6",
        "S_z(t) from the six marked coherent states (desk J = 200; reference J = 800 "
        "with --expensive)",
        reference_two_j=1600, desk_two_j=400, est_runtime="~2 min desk",
        configs=tuple(
            _dyn_config("evolve", k, point, 400, 200, f"fig6-{point}")
            for point, k in sz_points
        ),
    )
    recipes["fig7"] = Recipe(
        "fig7", "Fig. 7",
        "S_z(t) from one-site product states in both regimes",
        reference_two_j=1600, desk_two_j=400, est_runtime="~1 min desk",
        configs=tuple(
            {
                "experiment": "evolve", "label": f"fig7-k{k:g}-site{site}",
                "spec": {"two_j": 400, "k": k, "mu": 3.0},
                "initial": {"site": site},
                "dynamics": {"kicks": 200},
            }
            for k in (1.0, 8.0) for site in (1, 2)
        ),
    )
    recipes["fig8"] = Recipe(
        "fig8", "Fig. 8",
        "OTOC C_zz(t) from the six marked coherent states (desk J = 200; reference "
        "J = 100/200/800 panels with --expensive)",
        reference_two_j=1600, desk_two_j=400, est_runtime="~3 min desk",
        configs=tuple(
            _dyn_config("otoc", k, point, 400, 200, f"fig8-{point}")
            for point, k in sz_points
        ),
    )
    recipes["fig9"] = Recipe(
        "fig9", "Fig. 9",
        "OTOC from one-site product states in both regimes",
        reference_two_j=1600, desk_two_j=400, est_runtime="~2 min desk",
        configs=tuple(
            {
                "experiment": "otoc", "label": f"fig9-k{k:g}-site{site}",
                "spec": {"two_j": 400, "k": k, "mu": 3.0},
                "initial": {"site": site},
                "dynamics": {"kicks": 200},
            }
            for k in (1.0, 8.0) for site in (1, 2)
        ),
    )
    recipes["fig10"] = Recipe(
        "fig10", "Fig. 10",
        "two-qubit entanglement entropy from the six marked states (desk J = 200; "
        "reference J = 400 with --expensive)",
        reference_two_j=800, desk_two_j=400, est_runtime="~2 min desk",
        configs=tuple(
            _dyn_config("entangle", k, point, 400, 200, f"fig10-{point}",
                        extra={"dynamics": {"s": 2}})
            for point, k in sz_points
        ),
    )
    recipes["fig11"] = Recipe(
        "fig11", "Fig. 11",
        "Poincare sections rendered on the sphere (same trajectory data as fig4, "
        "3-vector columns feed the sphere scatter)",
        reference_two_j=300, desk_two_j=300, est_runtime="~2 min",
        configs=tuple(
            {
                "experiment": "poincare", "label": f"fig11-k{k:g}",
                "spec": {"two_j": 300, "k": k, "mu": 3.0},
            }
            for k in (1.0, 3.0, 5.0, 8.0)
        ),
    )
    recipes["fig12"] = Recipe(
        "fig12", "Fig. 12",
        "chaotic-regime D2 map and Poincare section with the circle/star scaling points "
        "marked (see REFERENCE_POINTS k8_circle_*, k8_star)",
        reference_two_j=300, desk_two_j=300, est_runtime="~1 min",
        configs=(
            {"experiment": "d2map", "label": "fig12-d2map",
             "spec": {"two_j": 300, "k": 8.0, "mu": 3.0}},
            {"experiment": "poincare", "label": "fig12-poincare",
             "spec": {"two_j": 300, "k": 8.0, "mu": 3.0}},
        ),
    )
    recipes["fig13"] = Recipe(
        "fig13", "Fig. 13",
        "participation-number size scaling at the star and circle points, "
        "J in {100, 200, 400, 800}",
        reference_two_j=1600, desk_two_j=1600, est_runtime="~10 min",
        configs=tuple(
            {
                "experiment": "participation", "label": f"fig13-{point}",
                "spec": {"two_j": 1600, "k": 8.0, "mu": 3.0},
                "initial": _init(point),
                "participation": {"two_j_list": [200, 400, 800, 1600]},
            }
            for point in ("k8_star", "k8_circle_left", "k8_circle_right")
        ),
    )
    recipes["fig14"] = Recipe(
        "fig14", "Fig. 14",
        "Husimi snapshots of the circle-point state at kicks 1000..1003 showing the "
        "4-cycle hopping (desk J = 300; reference J = 1000 with --expensive)",
        reference_two_j=2000, desk_two_j=600, est_runtime="~2 min desk",
        configs=({
            "experiment": "evolve", "label": "fig14",
            "spec": {"two_j": 600, "k": 8.0, "mu": 3.0},
            "initial": _init("k8_circle_left"),
            "dynamics": {"kicks": 1003, "snapshot_times": [1000, 1001, 1002, 1003]},
            "grid": {"n_theta": 100, "n_phi": 100, "rescale": True},
        },),
    )
    return recipes


RECIPES = _build_catalog()

# --expensive swaps the desk spin size for the reference one on these recipes
EXPENSIVE_TWO_J = {
    "fig6": 1600, "fig7": 1600, "fig8": 1600, "fig9": 1600, "fig10": 800, "fig14": 2000,
}


def recipe_configs(name: str, expensive: bool = False) -> list[dict]:
    if name not in RECIPES:
        raise KeyError(f"unknown recipe {name!r}; available: {', '.join(sorted(RECIPES))}")
    recipe = RECIPES[name]
    configs = [dict(c) for c in recipe.configs]
    if expensive and name in EXPENSIVE_TWO_J:
        for cfg in configs:
            cfg["spec"] = dict(cfg["spec"], two_j=EXPENSIVE_TWO_J[name])
            cfg["expensive"] = True
    return configs
