"""Scenario evaluation, parameter sweeps, and CSV emission.

Records are ordered dicts with a fixed column set per command: sweep
inputs first, result fields next, scenario hash last. Floats are written
with repr(), so a write-read round trip reproduces every value exactly.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, SchemaError
from .linkbudget import monostatic_max_range, monostatic_received_power, ue_power_control
from .scenario import SCHEMA, Scenario

Record = dict  # ordered column -> value


@dataclass(frozen=True)
class RangeSpec:
    """Sweep range: ``points`` values from start to stop, linear or log."""

    start: float
    stop: float
    points: int
    scale: str = "linear"

    def __post_init__(self) -> None:
        if self.points < 1:
            raise ConfigError("points must be >= 1")
        if self.stop < self.start:
            raise ConfigError(f"stop {self.stop} < start {self.start}")
        if self.scale not in ("linear", "log"):
            raise ConfigError(f"scale must be 'linear' or 'log', got {self.scale!r}")
        if self.scale == "log" and self.start <= 0:
            raise ConfigError("log scale requires start > 0")

    def values(self) -> list[float]:
        if self.points == 1:
            return [self.start]
        if self.scale == "log":
            return [float(v) for v in np.geomspace(self.start, self.stop, self.points)]
        return [float(v) for v in np.linspace(self.start, self.stop, self.points)]


def evaluate_bistatic(scenario: Scenario) -> Record:
    link = scenario.bistatic_link()
    breakdown = link.breakdown(scenario.get("link", "d_ue_zed_m"))
    _, capped = ue_power_control(
        link.d_ue_bs_km,
        link.carrier_hz,
        link.bs,
        target_snr_db=link.target_snr_db,
        tx_power_max_dbm=link.ue.tx_power_max_dbm,
        subcarrier_spacing_hz=link.srs.subcarrier_spacing_hz,
        mobile_height_m=link.ue.height_m,
        out_of_band=link.out_of_band,
    )
    reading = link.reading_distance_m()
    record: Record = {
        "carrier_hz": link.carrier_hz,
        "d_ue_bs_km": link.d_ue_bs_km,
        "d_ue_zed_m": scenario.get("link", "d_ue_zed_m"),
        "power_capped": int(capped),
    }
    record.update(breakdown.as_dict())
    record["reading_distance_m"] = math.nan if reading is None else reading
    return record


def evaluate_monostatic(scenario: Scenario) -> Record:
    carrier_hz = scenario.get("carrier", "frequency_hz")
    distance = scenario.get("link", "distance_m")
    zed = scenario.zed()
    eirp = scenario.get("reader", "eirp_dbm")
    rx_gain = scenario.get("reader", "rx_gain_dbi")
    threshold = scenario.monostatic_threshold_dbm()
    received = monostatic_received_power(eirp, rx_gain, carrier_hz, zed, distance)
    return {
        "carrier_hz": carrier_hz,
        "distance_m": distance,
        "eirp_dbm": eirp,
        "reader_rx_gain_dbi": rx_gain,
        "received_power_dbm": received,
        "noise_floor_dbm": threshold - scenario.get("reader", "snr_requirement_db"),
        "threshold_dbm": threshold,
        "rx_margin_db": received - threshold,
        "max_range_m": monostatic_max_range(eirp, rx_gain, carrier_hz, zed, threshold),
    }


def evaluate_scenario(scenario: Scenario) -> Record:
    """Mode-dispatched single evaluation; the unit a sweep repeats."""
    if scenario.mode == "bistatic":
        record = evaluate_bistatic(scenario)
    else:
        record = evaluate_monostatic(scenario)
    record["scenario_hash"] = scenario.hash()
    return record


def _check_sweep_variable(scenario: Scenario, variable: str) -> None:
    section, _, key = variable.partition(".")
    if section not in SCHEMA or key not in SCHEMA[section]:
        raise ConfigError(f"unknown sweep variable {variable!r}")
    spec = SCHEMA[section][key]
    if spec.type_ not in (int, float):
        raise ConfigError(f"sweep variable {variable!r} is not numeric")
    if section not in scenario.values or key not in scenario.values[section]:
        raise ConfigError(f"{variable!r} not available in {scenario.mode} mode")


def run_sweep(
    scenario: Scenario,
    variable: str,
    spec: Optional[RangeSpec] = None,
    values: Optional[list[float]] = None,
) -> list[Record]:
    """Evaluate the scenario at each value of a numeric scenario field."""
    if (spec is None) == (values is None):
        raise ConfigError("pass either a RangeSpec or an explicit value list")
    _check_sweep_variable(scenario, variable)
    section, _, key = variable.partition(".")
    int_valued = SCHEMA[section][key].type_ is int
    points = spec.values() if spec is not None else list(values)
    if not points:
        raise ConfigError("sweep needs at least one value")
    records = []
    for value in points:
        cast = int(round(value)) if int_valued else float(value)
        point = scenario.with_value(variable, cast)
        record: Record = {variable: cast}
        record.update(evaluate_scenario(point))
        records.append(record)
    return records


def format_cell(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (np.floating,)):
        return repr(float(value))
    return str(value)


def render_csv(records: list[Record], preamble: Optional[list[str]] = None) -> str:
    if not records:
        raise SchemaError("refusing to write an empty CSV")
    columns = tuple(records[0].keys())
    for i, record in enumerate(records):
        if tuple(record.keys()) != columns:
            raise SchemaError(
                f"record {i} columns {tuple(record.keys())} differ from {columns}"
            )
    buffer = io.StringIO()
    if preamble:
        for line in preamble:
            buffer.write(f"# {line}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for record in records:
        writer.writerow([format_cell(v) for v in record.values()])
    return buffer.getvalue()


def emit_csv(records: list[Record], path, preamble: Optional[list[str]] = None) -> None:
    """Header row then data rows; identical bytes for identical records."""
    text = render_csv(records, preamble)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def read_csv(path) -> list[Record]:
    """Parse a CSV written by emit_csv, restoring numeric types."""
    with open(path, newline="") as fh:
        rows = [line for line in fh if not line.startswith("#")]
    reader = csv.reader(rows)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError(f"{path}: empty CSV") from None
    records = []
    for row in reader:
        record: Record = {}
        for key, cell in zip(header, row):
            try:
                record[key] = int(cell)
            except ValueError:
                try:
                    record[key] = float(cell)
                except ValueError:
                    record[key] = cell
        records.append(record)
    return records
