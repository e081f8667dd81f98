"""Render one figure from a JSON plot spec.

Plot kinds
----------
heatmap         scattered (x, y, value) CSV pivoted onto a regular grid;
                phase-space files (theta/phi columns) draw phi horizontal,
                theta vertical
poincare-plane  trajectory CSV as a (phi, theta) scatter colored by orbit id
poincare-sphere the same trajectories as a 3-D scatter on the unit sphere
timeseries      one curve per input (t, value) CSV
scaling         participation CSV as M2 vs Hilbert-space dimension

The spec names the input CSVs, the output image path, and optional axis /
color settings.  Rendering never mutates its inputs.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

KINDS = ("heatmap", "poincare-plane", "poincare-sphere", "timeseries", "scaling")


class PlotSpecError(Exception):
    """Malformed plot spec (exit 2)."""


class InputDataError(Exception):
    """Malformed input CSV; carries the offending row number."""

    def __init__(self, path, row, message):
        super().__init__(f"{path}, row {row}: {message}")
        self.path = path
        self.row = row


@dataclass
class PlotSpec:
    kind: str
    inputs: list[Path]
    output: Path
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    xrange: tuple | None = None
    yrange: tuple | None = None
    labels: list[str] = field(default_factory=list)
    cmap: str = "viridis"
    vmin: float | None = None
    vmax: float | None = None
    logy: bool = False
    x_field: str = ""
    y_field: str = ""
    value_field: str = ""
    dpi: int = 150

    @classmethod
    def from_file(cls, path) -> "PlotSpec":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise PlotSpecError(f"cannot parse plot spec {path}: {exc}") from exc
        return cls.from_dict(doc, base_dir=path.parent)

    @classmethod
    def from_dict(cls, doc: dict, base_dir: Path | None = None) -> "PlotSpec":
        if not isinstance(doc, dict):
            raise PlotSpecError("plot spec must be a JSON object")
        kind = doc.get("kind")
        if kind not in KINDS:
            raise PlotSpecError(f"kind must be one of {KINDS}, got {kind!r}")
        raw_inputs = doc.get("inputs", doc.get("input"))
        if raw_inputs is None:
            raise PlotSpecError("plot spec needs 'inputs'")
        if isinstance(raw_inputs, (str, Path)):
            raw_inputs = [raw_inputs]
        if "output" not in doc:
            raise PlotSpecError("plot spec needs 'output'")

        def resolve(p):
            p = Path(p)
            return p if p.is_absolute() or base_dir is None else base_dir / p

        inputs = [resolve(p) for p in raw_inputs]
        for p in inputs:
            if not p.exists():
                raise PlotSpecError(f"input file does not exist: {p}")
        color = doc.get("color_scale", {})
        return cls(
            kind=kind,
            inputs=inputs,
            output=resolve(doc["output"]),
            title=doc.get("title", ""),
            xlabel=doc.get("xlabel", ""),
            ylabel=doc.get("ylabel", ""),
            xrange=tuple(doc["xrange"]) if "xrange" in doc else None,
            yrange=tuple(doc["yrange"]) if "yrange" in doc else None,
            labels=list(doc.get("labels", [])),
            cmap=color.get("cmap", "viridis"),
            vmin=color.get("vmin"),
            vmax=color.get("vmax"),
            logy=bool(doc.get("logy", False)),
            x_field=doc.get("x_field", ""),
            y_field=doc.get("y_field", ""),
            value_field=doc.get("value_field", ""),
            dpi=int(doc.get("dpi", 150)),
        )


def read_table(path: Path) -> tuple[list[str], np.ndarray]:
    """Parse a numeric CSV; raises InputDataError with the failing row number."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputDataError(path, 1, "missing header") from None
        width = len(header)
        for row_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise InputDataError(path, row_number,
                                     f"expected {width} columns, found {len(row)}")
            try:
                rows.append([float(x) for x in row])
            except ValueError as exc:
                raise InputDataError(path, row_number, str(exc)) from None
    data = np.array(rows) if rows else np.empty((0, width))
    return [h.strip() for h in header], data


def _column(header, data, name, path):
    try:
        return data[:, header.index(name)]
    except ValueError:
        raise InputDataError(path, 1, f"missing column {name!r}") from None


def _finish(fig, ax, spec: PlotSpec):
    if spec.title:
        ax.set_title(spec.title)
    if spec.xrange:
        ax.set_xlim(*spec.xrange)
    if spec.yrange:
        ax.set_ylim(*spec.yrange)
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.output, dpi=spec.dpi)
    plt.close(fig)


def _heatmap_fields(header, spec: PlotSpec, path):
    if spec.x_field:
        return spec.x_field, spec.y_field, spec.value_field
    if {"theta", "phi", "value"} <= set(header):
        return "phi", "theta", "value"        # phase-space orientation contract
    if {"k", "mu", "mean_r"} <= set(header):
        return "k", "mu", "mean_r"
    if len(header) >= 3:
        return header[0], header[1], header[2]
    raise InputDataError(path, 1, "cannot infer heatmap columns")


def render_heatmap(spec: PlotSpec):
    path = spec.inputs[0]
    header, data = read_table(path)
    x_name, y_name, v_name = _heatmap_fields(header, spec, path)
    fig, ax = plt.subplots(figsize=(6.0, 4.8))
    if data.shape[0]:
        x = _column(header, data, x_name, path)
        y = _column(header, data, y_name, path)
        v = _column(header, data, v_name, path)
        xs = np.unique(x)
        ys = np.unique(y)
        grid = np.full((ys.size, xs.size), np.nan)
        xi = np.searchsorted(xs, x)
        yi = np.searchsorted(ys, y)
        grid[yi, xi] = v
        mesh = ax.pcolormesh(xs, ys, grid, cmap=spec.cmap, vmin=spec.vmin,
                             vmax=spec.vmax, shading="nearest")
        fig.colorbar(mesh, ax=ax, label=v_name)
    ax.set_xlabel(spec.xlabel or x_name)
    ax.set_ylabel(spec.ylabel or y_name)
    _finish(fig, ax, spec)
    return fig


def _trajectory_columns(path):
    header, data = read_table(path)
    cols = {name: _column(header, data, name, path)
            for name in ("traj_id", "theta", "phi", "mx", "my", "mz")} if data.shape[0] else {}
    return cols


def render_poincare_plane(spec: PlotSpec):
    path = spec.inputs[0]
    cols = _trajectory_columns(path)
    fig, ax = plt.subplots(figsize=(6.0, 4.8))
    if cols:
        ax.scatter(cols["phi"], cols["theta"], c=cols["traj_id"], s=0.3,
                   cmap=spec.cmap, rasterized=True)
    ax.set_xlabel(spec.xlabel or "phi")
    ax.set_ylabel(spec.ylabel or "theta")
    if not spec.xrange:
        ax.set_xlim(-np.pi, np.pi)
    if not spec.yrange:
        ax.set_ylim(0.0, np.pi)
    _finish(fig, ax, spec)
    return fig


def render_poincare_sphere(spec: PlotSpec):
    path = spec.inputs[0]
    cols = _trajectory_columns(path)
    fig = plt.figure(figsize=(6.0, 6.0))
    ax = fig.add_subplot(projection="3d")
    if cols:
        ax.scatter(cols["mx"], cols["my"], cols["mz"], c=cols["traj_id"], s=0.3,
                   cmap=spec.cmap, rasterized=True)
    u = np.linspace(0, 2 * np.pi, 24)
    v = np.linspace(0, np.pi, 12)
    ax.plot_wireframe(np.outer(np.cos(u), np.sin(v)), np.outer(np.sin(u), np.sin(v)),
                      np.outer(np.ones_like(u), np.cos(v)), color="0.85", linewidth=0.3)
    ax.set_xlabel(spec.xlabel or "mx")
    ax.set_ylabel(spec.ylabel or "my")
    ax.set_zlabel("mz")
    ax.set_box_aspect((1, 1, 1))
    if spec.title:
        ax.set_title(spec.title)
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.output, dpi=spec.dpi)
    plt.close(fig)
    return fig


def render_timeseries(spec: PlotSpec):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for i, path in enumerate(spec.inputs):
        header, data = read_table(path)
        if not data.shape[0]:
            continue
        t = _column(header, data, "t", path)
        v = _column(header, data, "value", path)
        label = spec.labels[i] if i < len(spec.labels) else path.stem
        ax.plot(t, v, lw=1.0, label=label)
    if spec.logy:
        ax.set_yscale("log")
    ax.set_xlabel(spec.xlabel or "t")
    ax.set_ylabel(spec.ylabel or "value")
    if spec.inputs:
        ax.legend(fontsize=8)
    _finish(fig, ax, spec)
    return fig


def render_scaling(spec: PlotSpec):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for i, path in enumerate(spec.inputs):
        header, data = read_table(path)
        if not data.shape[0]:
            continue
        dim = _column(header, data, "dim", path)
        m2 = _column(header, data, "m2", path)
        label = spec.labels[i] if i < len(spec.labels) else path.stem
        ax.plot(dim, m2, "o-", label=label)
    if spec.logy:
        ax.set_yscale("log")
    ax.set_xlabel(spec.xlabel or "dim")
    ax.set_ylabel(spec.ylabel or "M2")
    if spec.inputs:
        ax.legend(fontsize=8)
    _finish(fig, ax, spec)
    return fig


RENDERERS = {
    "heatmap": render_heatmap,
    "poincare-plane": render_poincare_plane,
    "poincare-sphere": render_poincare_sphere,
    "timeseries": render_timeseries,
    "scaling": render_scaling,
}


def render(spec: PlotSpec):
    """Dispatch to the renderer for the spec's kind; returns the figure."""
    return RENDERERS[spec.kind](spec)
