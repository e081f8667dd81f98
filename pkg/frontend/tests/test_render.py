import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from figrender.cli import main as render_main
from figrender.render import InputDataError, PlotSpec, PlotSpecError, read_table, render


def write_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(str(x) for x in r) for r in rows]
    path.write_text("\r\n".join(lines) + "\r\n")
    return path


@pytest.fixture(scope="session")
def recipe_outputs(tmp_path_factory):
    """Real data produced through the primary package's CLI surface."""
    root = tmp_path_factory.mktemp("primary-data")
    cache = root / "cache"
    cmds = [
        ["kickedspin", "recipes", "run", "fig12", "--out", str(root / "fig12"),
         "--cache", str(cache)],
    ]
    evolve_cfg = root / "evolve.yaml"
    evolve_cfg.write_text(
        "experiment: evolve\n"
        "label: island-sz\n"
        "spec: {two_j: 120, k: 8.0, mu: 3.0}\n"
        "initial: {theta: 0.15, phi: 1.5}\n"
        "dynamics: {kicks: 120}\n"
    )
    cmds.append(["kickedspin", "evolve", "--config", str(evolve_cfg),
                 "--out", str(root / "evolve"), "--cache", str(cache)])
    part_cfg = root / "part.yaml"
    part_cfg.write_text(
        "experiment: participation\n"
        "spec: {two_j: 200, k: 8.0, mu: 3.0}\n"
        "initial: {theta: 1.429, phi: -1.665}\n"
        "participation: {two_j_list: [100, 200]}\n"
    )
    cmds.append(["kickedspin", "participation", "--config", str(part_cfg),
                 "--out", str(root / "part"), "--cache", str(cache)])
    for cmd in cmds:
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
    return root


def run_render(tmp_path, doc):
    spec_path = tmp_path / "plot.json"
    spec_path.write_text(json.dumps(doc))
    return render_main(["--spec", str(spec_path)])


def test_acceptance_15_recipe_figures(recipe_outputs, tmp_path):
    """Heatmap, planar and sphere Poincare scatters, and a time series render
    from shipped-recipe CSV outputs with the documented axis orientations."""
    d2_csv = recipe_outputs / "fig12" / "fig12-d2map" / "fig12-d2map.csv"
    traj_csv = recipe_outputs / "fig12" / "fig12-poincare" / "fig12-poincare.csv"
    sz_csv = recipe_outputs / "evolve" / "island-sz.csv"
    for path in (d2_csv, traj_csv, sz_csv):
        assert path.exists()

    heat = render(PlotSpec.from_dict({"kind": "heatmap", "inputs": [str(d2_csv)],
                                      "output": str(tmp_path / "heat.png")}))
    ax = heat.axes[0]
    assert ax.get_xlabel() == "phi"      # phase-space orientation contract
    assert ax.get_ylabel() == "theta"

    plane = render(PlotSpec.from_dict({"kind": "poincare-plane", "inputs": [str(traj_csv)],
                                       "output": str(tmp_path / "plane.png")}))
    ax = plane.axes[0]
    assert ax.get_xlabel() == "phi"
    assert ax.get_ylabel() == "theta"
    np.testing.assert_allclose(ax.get_xlim(), (-np.pi, np.pi))
    np.testing.assert_allclose(ax.get_ylim(), (0.0, np.pi))

    assert run_render(tmp_path, {"kind": "poincare-sphere", "inputs": [str(traj_csv)],
                                 "output": str(tmp_path / "sphere.png")}) == 0
    assert run_render(tmp_path, {"kind": "timeseries", "inputs": [str(sz_csv)],
                                 "output": str(tmp_path / "sz.png"),
                                 "labels": ["island"]}) == 0
    for name in ("heat.png", "plane.png", "sphere.png", "sz.png"):
        assert (tmp_path / name).stat().st_size > 5000


def test_scaling_plot(recipe_outputs, tmp_path):
    part_csv = recipe_outputs / "part" / "participation.csv"
    assert run_render(tmp_path, {"kind": "scaling", "inputs": [str(part_csv)],
                                 "output": str(tmp_path / "m2.png"), "logy": True}) == 0
    assert (tmp_path / "m2.png").exists()


def test_sweep_heatmap_field_inference(tmp_path):
    csv = write_csv(tmp_path / "sweep.csv", ["k", "mu", "two_j", "mean_r", "n_dropped_ratios"],
                    [[1.0, 1.0, 100, 0.39, 0], [1.0, 2.0, 100, 0.40, 0],
                     [2.0, 1.0, 100, 0.52, 0], [2.0, 2.0, 100, 0.51, 0]])
    fig = render(PlotSpec.from_dict({"kind": "heatmap", "inputs": [str(csv)],
                                     "output": str(tmp_path / "sweep.png")}))
    ax = fig.axes[0]
    assert ax.get_xlabel() == "k"
    assert ax.get_ylabel() == "mu"


def test_empty_csv_renders_empty_axes(tmp_path):
    csv = write_csv(tmp_path / "empty.csv", ["theta", "phi", "value"], [])
    code = run_render(tmp_path, {"kind": "heatmap", "inputs": [str(csv)],
                                 "output": str(tmp_path / "empty.png")})
    assert code == 0
    assert (tmp_path / "empty.png").exists()


def test_malformed_csv_reports_row_number(tmp_path, capsys):
    csv = write_csv(tmp_path / "bad.csv", ["t", "value"], [[0, 1.0], [1, "oops"]])
    code = run_render(tmp_path, {"kind": "timeseries", "inputs": [str(csv)],
                                 "output": str(tmp_path / "bad.png")})
    assert code == 2
    assert "row 3" in capsys.readouterr().err


def test_missing_column_is_input_error(tmp_path):
    csv = write_csv(tmp_path / "cols.csv", ["a", "b"], [[1, 2]])
    with pytest.raises(InputDataError):
        render(PlotSpec.from_dict({"kind": "timeseries", "inputs": [str(csv)],
                                   "output": str(tmp_path / "x.png")}))


def test_spec_validation_errors(tmp_path):
    with pytest.raises(PlotSpecError):
        PlotSpec.from_dict({"kind": "nope", "inputs": ["x"], "output": "y"})
    with pytest.raises(PlotSpecError):
        PlotSpec.from_dict({"kind": "heatmap", "output": "y"})
    with pytest.raises(PlotSpecError):
        PlotSpec.from_dict({"kind": "heatmap", "inputs": [str(tmp_path / "absent.csv")],
                            "output": str(tmp_path / "y.png")})
    bad_json = tmp_path / "spec.json"
    bad_json.write_text("{not json")
    assert render_main(["--spec", str(bad_json)]) == 2


def test_read_table_round_trip(tmp_path):
    csv = write_csv(tmp_path / "t.csv", ["t", "value"], [[0, 0.5], [1, 0.25]])
    header, data = read_table(csv)
    assert header == ["t", "value"]
    np.testing.assert_allclose(data, [[0, 0.5], [1, 0.25]])
