"""Declarative figure specs and the CSV tables they point at.

A spec is a small TOML file naming input CSVs and, per panel, which
columns to plot. Input paths resolve relative to the spec file, so a
spec checked in next to its CSVs renders from any working directory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib


class SpecError(ValueError):
    """A figure spec or its input CSV is unusable."""


@dataclass
class Table:
    path: Path
    columns: dict  # name -> list of float | str
    metadata: dict  # parsed from leading '# key: value' comment lines
    n_rows: int

    def column(self, name: str) -> list:
        if name not in self.columns:
            raise SpecError(f"column {name!r} missing from {self.path}")
        return self.columns[name]


def _parse_cell(cell: str):
    try:
        return float(cell)
    except ValueError:
        return cell


def read_table(path) -> Table:
    path = Path(path)
    metadata = {}
    rows = []
    with open(path, newline="") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, _, value = body.partition(":")
                    metadata[key.strip()] = value.strip()
                continue
            if line:
                rows.append(line.split(","))
    if not rows:
        raise SpecError(f"{path}: empty CSV (no header)")
    header, data = rows[0], rows[1:]
    if not data:
        raise SpecError(f"{path}: CSV has a header but no data rows")
    columns = {name: [] for name in header}
    for row in data:
        for name, cell in zip(header, row):
            columns[name].append(_parse_cell(cell))
    return Table(path=path, columns=columns, metadata=metadata, n_rows=len(data))


@dataclass
class PanelSpec:
    x: str
    y: str
    xlabel: str = ""
    ylabel: str = ""
    xscale: str = "linear"
    yscale: str = "linear"
    series: Optional[str] = None  # group rows by this column, one line each
    series_scale: float = 1.0
    series_unit: str = ""
    hline: Optional[str] = None  # column holding a constant reference level
    hline_label: str = ""


@dataclass
class FigureSpec:
    kind: str  # "panels" | "spectrum"
    title: str
    output: str
    inputs: list[Path]
    panels: list[PanelSpec] = field(default_factory=list)
    width_in: float = 10.0
    height_in: float = 4.0
    footer_hash: bool = True

    @classmethod
    def load(cls, path) -> "FigureSpec":
        path = Path(path)
        try:
            raw = tomllib.loads(path.read_text())
        except tomllib.TOMLDecodeError as exc:
            raise SpecError(f"{path}: invalid TOML: {exc}") from exc
        fig = raw.get("figure", {})
        kind = fig.get("kind", "panels")
        if kind not in ("panels", "spectrum"):
            raise SpecError(f"{path}: figure.kind must be 'panels' or 'spectrum'")
        inputs = [path.parent / p for p in raw.get("inputs", [])]
        if not inputs:
            raise SpecError(f"{path}: no inputs listed")
        panels = [PanelSpec(**p) for p in raw.get("panels", [])]
        if kind == "panels" and not panels:
            raise SpecError(f"{path}: a panels figure needs at least one [[panels]]")
        return cls(
            kind=kind,
            title=fig.get("title", ""),
            output=fig.get("output", path.stem + ".png"),
            inputs=inputs,
            panels=panels,
            width_in=float(fig.get("width_in", 10.0)),
            height_in=float(fig.get("height_in", 4.0)),
            footer_hash=bool(fig.get("footer_hash", True)),
        )
