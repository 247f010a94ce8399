"""Scenario files: strict parsing, defaults, presets, and hashing.

A scenario is a named bundle of carrier, node, tag, waveform, access and
positioning parameters in TOML (or JSON with the same section layout).
Parsing is strict: unknown sections or keys are fatal, duplicate keys are
fatal, and mode-incompatible keys are rejected, because a silently
ignored typo corrupts a feasibility study.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Optional

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .errors import ConfigError
from .linkbudget import (
    BistaticLink,
    NodeProfile,
    SrsConfig,
    ZedProfile,
    monostatic_receiver_threshold,
)
from .phy import CarrierConfig, FskConfig, PhyScenario
from .positioning import ZedDeployment

REQUIRED = object()

MODES = ("bistatic", "monostatic")


@dataclass(frozen=True)
class Key:
    type_: type
    default: Any  # REQUIRED sentinel for mandatory keys
    modes: str = "both"  # "both" | "bistatic" | "monostatic"
    choices: Optional[tuple] = None

    def valid_for(self, mode: str) -> bool:
        return self.modes in ("both", mode)


# Every recognised scenario key. "auto" floats use nan as the sentinel.
SCHEMA: dict[str, dict[str, Key]] = {
    "scenario": {
        "name": Key(str, "custom"),
        "mode": Key(str, "bistatic", choices=MODES),
        "seed": Key(int, 1),
    },
    "carrier": {
        "frequency_hz": Key(float, REQUIRED),
        "bandwidth_hz": Key(float, 9e6),
        "subcarrier_spacing_hz": Key(float, 15e3, "bistatic"),
        "comb_factor": Key(int, 2, "bistatic"),
        "rx_antennas": Key(int, 2, "bistatic"),
        "pilot_occasion_rate_hz": Key(float, 4e3, "bistatic"),
        "symbols_per_zed_symbol": Key(int, 2, "bistatic"),
    },
    "bs": {
        "height_m": Key(float, 30.0, "bistatic"),
        "noise_figure_db": Key(float, 5.0, "bistatic"),
        "antenna_gain_dbi": Key(float, 0.0, "bistatic"),
    },
    "ue": {
        "tx_power_max_dbm": Key(float, 23.0, "bistatic"),
        "height_m": Key(float, 1.5, "bistatic"),
        "antenna_gain_dbi": Key(float, 0.0, "bistatic"),
    },
    "zed": {
        "modulation_loss_db": Key(float, 6.0),
        "required_effective_snr_db": Key(float, 1.5, "bistatic"),
        "leg_antenna_gain_dbi": Key(float, 0.0, "bistatic"),
        "rcs_dbsm": Key(float, REQUIRED, "monostatic"),
    },
    "reader": {
        "eirp_dbm": Key(float, 75.0, "monostatic"),
        "rx_gain_dbi": Key(float, 25.0, "monostatic"),
        "noise_figure_db": Key(float, 7.0, "monostatic"),
        "snr_requirement_db": Key(float, 5.0, "monostatic"),
    },
    "link": {
        "d_ue_bs_km": Key(float, 1.0, "bistatic"),
        "d_ue_zed_m": Key(float, 2.0, "bistatic"),
        "target_snr_db": Key(float, 15.0, "bistatic"),
        "hata_out_of_band": Key(str, "warn", "bistatic", choices=("warn", "raise")),
        "distance_m": Key(float, 100.0, "monostatic"),
    },
    "fsk": {
        "f0_hz": Key(float, 200.0, "bistatic"),
        "f1_hz": Key(float, 400.0, "bistatic"),
        "symbol_rate_hz": Key(float, 100.0, "bistatic"),
        "amplitude": Key(float, 0.5, "bistatic"),
        "code": Key(str, "none", "bistatic", choices=("none", "repetition2")),
    },
    "phy": {
        "trials": Key(int, 50, "bistatic"),
        "bits_per_trial": Key(int, 20, "bistatic"),
        # nan = derive from the link budget at the scenario distances.
        "per_re_snr_db": Key(float, math.nan, "bistatic"),
        "backscatter_relative_db": Key(float, math.nan, "bistatic"),
        "psd_symbols": Key(int, 16, "bistatic"),
        "psd_threshold_db": Key(float, 10.0, "bistatic"),
        # Illustration levels for the spectrum dump: strong enough that the
        # sideband lines clear the per-bin noise floor in a short capture.
        # nan = reuse the (budget-derived) per_re_snr_db / relative levels.
        "psd_per_re_snr_db": Key(float, 30.0, "bistatic"),
        "psd_backscatter_relative_db": Key(float, -20.0, "bistatic"),
    },
    "access": {
        "offered_load": Key(float, 1.0),
        "tags": Key(int, 10_000),
        "slots": Key(int, 100_000),
        "load_min": Key(float, 0.1),
        "load_max": Key(float, 3.0),
        "total_bandwidth_hz": Key(float, 180e3),
        "per_device_bandwidth_hz": Key(float, 1.8e3),
        "guard_hz": Key(float, 0.0),
        "modulation_order": Key(int, 2),
        "code_rate": Key(float, 0.5),
        "dedicated_symbol_rate_hz": Key(float, 4000.0),
        "plan_mode": Key(str, "reserved", choices=("reserved", "inband")),
        "dl_blocks": Key(int, 25),
        "ul_blocks": Key(int, 25),
    },
    "positioning": {
        "deployment": Key(str, "grid", "bistatic", choices=("grid", "poisson", "csv")),
        "grid_spacing_m": Key(float, 5.0, "bistatic"),
        "density_per_m2": Key(float, 0.05, "bistatic"),
        "deployment_csv": Key(str, "", "bistatic"),
        "deployment_half_width_m": Key(float, 30.0, "bistatic"),
        "arena_half_width_m": Key(float, 20.0, "bistatic"),
        "trials": Key(int, 2000, "bistatic"),
        "jitter_sigma_db": Key(float, 0.0, "bistatic"),
        "weighting": Key(str, "power", "bistatic", choices=("power", "uniform")),
    },
}


def _find_line(text: Optional[str], section: str, key: str) -> str:
    """Best-effort line locator in the raw TOML for error context."""
    if not text:
        return ""
    lines = text.splitlines()
    in_section = False
    for i, line in enumerate(lines, start=1):
        stripped = line.strip()
        if stripped.startswith("["):
            in_section = stripped == f"[{section}]"
            continue
        if in_section and re.match(rf"\s*{re.escape(key)}\s*=", line):
            return f" (line {i})"
    return ""


def _coerce(section: str, key: str, spec: Key, value: Any, text: Optional[str]) -> Any:
    where = f"{section}.{key}{_find_line(text, section, key)}"
    if spec.type_ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        value = float(value)
    elif spec.type_ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
    elif spec.type_ is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
    if spec.choices is not None and value not in spec.choices:
        raise ConfigError(f"{where}: must be one of {spec.choices}, got {value!r}")
    return value


def _load_raw(path) -> tuple[dict, Optional[str]]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"scenario file not found: {path}")
    text = path.read_text()
    if path.suffix.lower() == ".json":

        def reject_duplicates(pairs):
            d = {}
            for k, v in pairs:
                if k in d:
                    raise ConfigError(f"duplicate key {k!r} in {path.name}")
                d[k] = v
            return d

        try:
            return json.loads(text, object_pairs_hook=reject_duplicates), None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path.name}: invalid JSON: {exc}") from exc
    try:
        return tomllib.loads(text), text
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path.name}: invalid TOML: {exc}") from exc


def resolve(raw: dict, text: Optional[str] = None) -> dict:
    """Validate a raw section->key mapping and fill in defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("scenario root must be a table of sections")
    for section in raw:
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        if not isinstance(raw[section], dict):
            raise ConfigError(f"[{section}] must be a table of key = value pairs")
        for key in raw[section]:
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")
    mode = raw.get("scenario", {}).get("mode", SCHEMA["scenario"]["mode"].default)
    if mode not in MODES:
        raise ConfigError(f"scenario.mode must be one of {MODES}, got {mode!r}")
    resolved: dict[str, dict[str, Any]] = {}
    for section, keys in SCHEMA.items():
        out = {}
        for key, spec in keys.items():
            present = section in raw and key in raw[section]
            if not spec.valid_for(mode):
                if present:
                    raise ConfigError(
                        f"{section}.{key} does not apply to a {mode} scenario"
                    )
                continue
            if present:
                out[key] = _coerce(section, key, spec, raw[section][key], text)
            elif spec.default is REQUIRED:
                raise ConfigError(f"missing required key {section}.{key}")
            else:
                out[key] = spec.default
        if out:
            resolved[section] = out
    return resolved


def apply_overrides(raw: dict, overrides: list[str]) -> dict:
    """Apply --set section.key=value pairs onto the raw mapping."""
    out = {sec: dict(vals) for sec, vals in raw.items()}
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        path, _, literal = item.partition("=")
        if "." not in path:
            raise ConfigError(f"--set key must be section.key, got {path!r}")
        section, _, key = path.strip().partition(".")
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {section}.{key}")
        spec = SCHEMA[section][key]
        literal = literal.strip()
        try:
            if spec.type_ is int:
                value: Any = int(literal)
            elif spec.type_ is float:
                value = float(literal)
            else:
                value = literal
        except ValueError as exc:
            raise ConfigError(
                f"--set {section}.{key}: cannot parse {literal!r} as {spec.type_.__name__}"
            ) from exc
        out.setdefault(section, {})[key] = value
    return out


def list_presets() -> list[str]:
    files = resources.files("zedlink").joinpath("presets")
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".toml"))


def load_preset_raw(name: str) -> tuple[dict, str]:
    ref = resources.files("zedlink").joinpath("presets").joinpath(f"{name}.toml")
    if not ref.is_file():
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(list_presets())}"
        )
    text = ref.read_text()
    return tomllib.loads(text), text


@dataclass(frozen=True)
class Scenario:
    """A fully resolved scenario (defaults applied)."""

    values: dict

    # -- plumbing -----------------------------------------------------
    def get(self, section: str, key: str) -> Any:
        try:
            return self.values[section][key]
        except KeyError as exc:
            raise ConfigError(f"{section}.{key} not available in this mode") from exc

    @property
    def name(self) -> str:
        return self.get("scenario", "name")

    @property
    def mode(self) -> str:
        return self.get("scenario", "mode")

    @property
    def seed(self) -> int:
        return self.get("scenario", "seed")

    def with_value(self, path: str, value: Any) -> "Scenario":
        section, _, key = path.partition(".")
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {path}")
        out = {sec: dict(vals) for sec, vals in self.values.items()}
        if section not in out or key not in out[section]:
            raise ConfigError(f"{path} not available in {self.mode} mode")
        out[section][key] = _coerce(section, key, SCHEMA[section][key], value, None)
        return Scenario(out)

    def hash(self) -> str:
        canonical = json.dumps(self.values, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:12]

    def echo(self) -> str:
        """TOML-style rendering of the resolved scenario, defaults included."""
        lines = [f"# resolved scenario (hash {self.hash()})"]
        for section, keys in self.values.items():
            lines.append(f"[{section}]")
            for key, value in keys.items():
                if isinstance(value, str):
                    lines.append(f'{key} = "{value}"')
                elif isinstance(value, float):
                    lines.append(f"{key} = {value!r}")
                else:
                    lines.append(f"{key} = {value}")
        return "\n".join(lines)

    # -- domain objects ------------------------------------------------
    def carrier(self) -> CarrierConfig:
        return CarrierConfig(
            frequency_hz=self.get("carrier", "frequency_hz"),
            bandwidth_hz=self.get("carrier", "bandwidth_hz"),
            subcarrier_spacing_hz=self.get("carrier", "subcarrier_spacing_hz"),
            comb_factor=self.get("carrier", "comb_factor"),
            rx_antennas=self.get("carrier", "rx_antennas"),
            pilot_occasion_rate_hz=self.get("carrier", "pilot_occasion_rate_hz"),
        )

    def srs(self) -> SrsConfig:
        return self.carrier().srs(self.get("carrier", "symbols_per_zed_symbol"))

    def bs(self) -> NodeProfile:
        return NodeProfile(
            role="bs",
            antenna_gain_dbi=self.get("bs", "antenna_gain_dbi"),
            noise_figure_db=self.get("bs", "noise_figure_db"),
            height_m=self.get("bs", "height_m"),
        )

    def ue(self) -> NodeProfile:
        return NodeProfile(
            role="ue",
            tx_power_max_dbm=self.get("ue", "tx_power_max_dbm"),
            antenna_gain_dbi=self.get("ue", "antenna_gain_dbi"),
            height_m=self.get("ue", "height_m"),
        )

    def zed(self) -> ZedProfile:
        if self.mode == "bistatic":
            return ZedProfile(
                modulation_loss_db=self.get("zed", "modulation_loss_db"),
                required_effective_snr_db=self.get("zed", "required_effective_snr_db"),
                leg_antenna_gain_dbi=self.get("zed", "leg_antenna_gain_dbi"),
                rcs_dbsm=None,
            )
        return ZedProfile(
            modulation_loss_db=self.get("zed", "modulation_loss_db"),
            leg_antenna_gain_dbi=None,
            rcs_dbsm=self.get("zed", "rcs_dbsm"),
        )

    def fsk(self) -> FskConfig:
        return FskConfig(
            f0_hz=self.get("fsk", "f0_hz"),
            f1_hz=self.get("fsk", "f1_hz"),
            symbol_rate_hz=self.get("fsk", "symbol_rate_hz"),
            amplitude=self.get("fsk", "amplitude"),
            sample_rate_hz=self.get("carrier", "pilot_occasion_rate_hz"),
            subcarrier_spacing_hz=self.get("carrier", "subcarrier_spacing_hz"),
        )

    def bistatic_link(self) -> BistaticLink:
        if self.mode != "bistatic":
            raise ConfigError("this command requires a bistatic scenario")
        return BistaticLink(
            d_ue_bs_km=self.get("link", "d_ue_bs_km"),
            carrier_hz=self.get("carrier", "frequency_hz"),
            bs=self.bs(),
            ue=self.ue(),
            zed=self.zed(),
            srs=self.srs(),
            target_snr_db=self.get("link", "target_snr_db"),
            out_of_band=self.get("link", "hata_out_of_band"),
        )

    def monostatic_threshold_dbm(self) -> float:
        if self.mode != "monostatic":
            raise ConfigError("this command requires a monostatic scenario")
        return monostatic_receiver_threshold(
            self.get("carrier", "bandwidth_hz"),
            self.get("reader", "noise_figure_db"),
            self.get("reader", "snr_requirement_db"),
        )

    def phy_scenario(self) -> PhyScenario:
        """PHY run parameters; nan entries derive from the link budget."""
        per_re = self.get("phy", "per_re_snr_db")
        ratio = self.get("phy", "backscatter_relative_db")
        if math.isnan(per_re) or math.isnan(ratio):
            b = self.bistatic_link().breakdown(self.get("link", "d_ue_zed_m"))
            if math.isnan(per_re):
                per_re = b.per_re_snr_direct_db
            if math.isnan(ratio):
                ratio = b.backscatter_rx_power_dbm - b.direct_rx_power_dbm
        return PhyScenario(
            carrier=self.carrier(),
            fsk=self.fsk(),
            per_re_snr_db=per_re,
            backscatter_to_direct_db=ratio,
            code=self.get("fsk", "code"),
            bits_per_trial=self.get("phy", "bits_per_trial"),
        )

    def deployment(self) -> ZedDeployment:
        kind = self.get("positioning", "deployment")
        if kind == "grid":
            return ZedDeployment.grid(
                self.get("positioning", "grid_spacing_m"),
                self.get("positioning", "deployment_half_width_m"),
            )
        if kind == "poisson":
            return ZedDeployment.poisson(
                self.get("positioning", "density_per_m2"),
                self.get("positioning", "deployment_half_width_m"),
                seed=self.seed,
            )
        path = self.get("positioning", "deployment_csv")
        if not path:
            raise ConfigError("positioning.deployment_csv is empty")
        return ZedDeployment.from_csv(path)


def parse_scenario(
    path=None,
    preset: Optional[str] = None,
    overrides: Optional[list[str]] = None,
    seed: Optional[int] = None,
) -> Scenario:
    """Load, override, validate, and resolve a scenario."""
    if path is not None and preset is not None:
        raise ConfigError("pass either a config path or a preset name, not both")
    if preset is not None:
        raw, text = load_preset_raw(preset)
    elif path is not None:
        raw, text = _load_raw(path)
    else:
        raw, text = {}, None
    if overrides:
        raw = apply_overrides(raw, overrides)
    if seed is not None:
        raw.setdefault("scenario", {})["seed"] = int(seed)
    return Scenario(resolve(raw, text))
