"""Render figures from CSV tables. No physics is computed here: every
plotted number is read from the CSV, and the per-figure checksum proves
it (checksum of plotted arrays == checksum of the CSV columns)."""

from __future__ import annotations

import argparse
import hashlib
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .figspec import FigureSpec, PanelSpec, SpecError, Table, read_table

# Fixed style so repeated renders are pixel-identical.
STYLE = {
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "legend.fontsize": 8,
    "axes.titlesize": 10,
}


@dataclass
class RenderResult:
    path: Path
    checksum: str
    n_points: int
    xlabel: str = ""
    ylabel: str = ""
    annotated_peaks_hz: tuple = ()


class _Checksum:
    """Accumulates plotted values in draw order."""

    def __init__(self) -> None:
        self._hash = hashlib.sha256()
        self.n_points = 0

    def add(self, values) -> None:
        for v in values:
            self._hash.update(repr(float(v)).encode())
            self._hash.update(b",")
            self.n_points += 1

    def hexdigest(self) -> str:
        return self._hash.hexdigest()


def checksum_of_values(*arrays) -> str:
    acc = _Checksum()
    for arr in arrays:
        acc.add(arr)
    return acc.hexdigest()


def _footer_hashes(tables: list[Table]) -> str:
    hashes = []
    for table in tables:
        if "scenario_hash" in table.columns:
            for value in table.columns["scenario_hash"]:
                if value not in hashes:
                    hashes.append(value)
        elif "scenario_hash" in table.metadata:
            if table.metadata["scenario_hash"] not in hashes:
                hashes.append(table.metadata["scenario_hash"])
    return ", ".join(str(h) for h in hashes)


def _series_groups(table: Table, panel: PanelSpec):
    """Yield (label, row indices) per series, in first-appearance order."""
    if panel.series is None:
        yield None, list(range(table.n_rows))
        return
    keys = table.column(panel.series)
    seen = []
    for key in keys:
        if key not in seen:
            seen.append(key)
    for key in seen:
        label = f"{key * panel.series_scale:g} {panel.series_unit}".strip()
        yield label, [i for i, k in enumerate(keys) if k == key]


def _plot_panel(ax, tables: list[Table], panel: PanelSpec, acc: _Checksum) -> None:
    for table in tables:
        xs = table.column(panel.x)
        ys = table.column(panel.y)
        for label, idx in _series_groups(table, panel):
            x = np.asarray([xs[i] for i in idx], dtype=float)
            y = np.asarray([ys[i] for i in idx], dtype=float)
            acc.add(x)
            acc.add(y)
            style = {"marker": "o", "markersize": 3} if len(x) < 2 else {}
            ax.plot(x, np.where(np.isfinite(y), y, np.nan), label=label, **style)
    if panel.hline is not None:
        levels = []
        for table in tables:
            level = float(table.column(panel.hline)[0])
            if level not in levels:
                levels.append(level)
        for level in levels:
            acc.add([level])
            ax.axhline(
                level, color="black", linestyle="--", linewidth=1.0,
                label=panel.hline_label or panel.hline,
            )
    ax.set_xscale(panel.xscale)
    ax.set_yscale(panel.yscale)
    ax.set_xlabel(panel.xlabel or panel.x)
    ax.set_ylabel(panel.ylabel or panel.y)
    handles, _ = ax.get_legend_handles_labels()
    if handles:
        ax.legend()


def render_panels(spec: FigureSpec, out_dir) -> RenderResult:
    tables = [read_table(p) for p in spec.inputs]
    acc = _Checksum()
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(
            1, len(spec.panels), figsize=(spec.width_in, spec.height_in)
        )
        if len(spec.panels) == 1:
            axes = [axes]
        for ax, panel in zip(axes, spec.panels):
            _plot_panel(ax, tables, panel, acc)
        if spec.title:
            fig.suptitle(spec.title)
        if spec.footer_hash:
            footer = _footer_hashes(tables)
            if footer:
                fig.text(0.01, 0.01, f"scenario {footer}", fontsize=6, color="0.4")
        fig.tight_layout(rect=(0, 0.03, 1, 0.97))
        out = Path(out_dir) / spec.output
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out)
        plt.close(fig)
    first = spec.panels[0]
    return RenderResult(
        path=out,
        checksum=acc.hexdigest(),
        n_points=acc.n_points,
        xlabel=first.xlabel or first.x,
        ylabel=first.ylabel or first.y,
    )


def render_spectrum(spec: FigureSpec, out_dir) -> RenderResult:
    if len(spec.inputs) != 1:
        raise SpecError("a spectrum figure takes exactly one input CSV")
    table = read_table(spec.inputs[0])
    header = list(table.columns)
    if len(header) < 2:
        raise SpecError(f"{table.path}: expected two columns (offset, power)")
    x_name, y_name = header[0], header[1]
    x = np.asarray(table.column(x_name), dtype=float)
    y = np.asarray(table.column(y_name), dtype=float)
    acc = _Checksum()
    acc.add(x)
    acc.add(y)
    peaks = tuple(
        float(v)
        for v in table.metadata.get("peaks_hz", "").split(",")
        if v.strip()
    )
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(spec.width_in, spec.height_in))
        ax.plot(x, np.where(np.isfinite(y), y, np.nan))
        finite = y[np.isfinite(y)]
        top = float(finite.max()) if finite.size else 0.0
        for peak in peaks:
            ax.axvline(peak, color="tab:red", linestyle=":", linewidth=1.0)
            ax.annotate(
                f"{peak:+.0f}",
                xy=(peak, top),
                xytext=(0, 4),
                textcoords="offset points",
                ha="center",
                fontsize=7,
                color="tab:red",
            )
        # Axis units come from the CSV header row.
        ax.set_xlabel(x_name)
        ax.set_ylabel(y_name)
        if spec.title:
            ax.set_title(spec.title)
        if spec.footer_hash:
            footer = _footer_hashes([table])
            if footer:
                fig.text(0.01, 0.01, f"scenario {footer}", fontsize=6, color="0.4")
        fig.tight_layout(rect=(0, 0.03, 1, 1))
        out = Path(out_dir) / spec.output
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out)
        plt.close(fig)
    return RenderResult(
        path=out,
        checksum=acc.hexdigest(),
        n_points=acc.n_points,
        xlabel=x_name,
        ylabel=y_name,
        annotated_peaks_hz=peaks,
    )


def render(spec_path, out_dir) -> RenderResult:
    spec = FigureSpec.load(spec_path)
    if spec.kind == "spectrum":
        return render_spectrum(spec, out_dir)
    return render_panels(spec, out_dir)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="zedplots-render",
        description="Render a figure from zedlink CSV output per a declarative spec.",
    )
    parser.add_argument("--spec", required=True, help="figure spec (TOML)")
    parser.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)
    try:
        result = render(args.spec, args.out)
    except (SpecError, OSError) as exc:
        print(f"zedplots-render: {exc}", file=sys.stderr)
        return 2
    print(f"{result.path} values={result.n_points} sha256={result.checksum}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
