"""Bistatic (sub-6 GHz) and monostatic (mmWave) backscatter link budgets.

Conventions used throughout:

* Per-resource-element SNR is defined over one subcarrier spacing of noise
  bandwidth at the receiver noise figure.
* The required SNR of a tag profile is compared against the *effective*
  SNR, i.e. after the processing gain from combining pilot resources.
  Reading the same number as a per-RE requirement would shift every
  reading distance by roughly the processing gain (~31 dB), so this
  interpretation is deliberate and documented.
* The sub-6 tag is a two-leg gain device (receive + retransmit legs,
  default 0 dBi each); the mmWave tag is characterised by its RCS.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import NamedTuple, Optional

from .errors import ConfigError, DomainError, ModeError
from .propagation import (
    HataGeometry,
    RadarGeometry,
    free_space_path_loss,
    invert_free_space_path_loss,
    noise_floor_dbm,
    okumura_hata_suburban,
    radar_backscatter_loss,
    wavelength_m,
)

# Regulatory uplink transmit-power cap applied to UE profiles.
UE_TX_POWER_CAP_DBM = 23.0


@dataclass(frozen=True)
class NodeProfile:
    """Transmit/receive parameters of a BS, UE, or radar-like reader.

    Antenna height defaults per role: 30 m for a BS or reader, 1.5 m for
    a UE (classical macro-cell values).
    """

    role: str
    tx_power_max_dbm: float = UE_TX_POWER_CAP_DBM
    antenna_gain_dbi: float = 0.0
    noise_figure_db: float = 5.0
    height_m: Optional[float] = None

    def __post_init__(self) -> None:
        if self.role not in ("bs", "ue", "reader"):
            raise ConfigError(f"role must be 'bs', 'ue' or 'reader', got {self.role!r}")
        if self.height_m is None:
            object.__setattr__(self, "height_m", 1.5 if self.role == "ue" else 30.0)
        if self.role == "ue" and self.tx_power_max_dbm > UE_TX_POWER_CAP_DBM:
            raise ConfigError(
                f"UE tx_power_max_dbm {self.tx_power_max_dbm} exceeds the "
                f"{UE_TX_POWER_CAP_DBM} dBm regulatory cap"
            )
        if self.noise_figure_db < 0:
            raise ConfigError("noise_figure_db must be >= 0")


@dataclass(frozen=True)
class ZedProfile:
    """Backscatter-tag parameters.

    Exactly one of ``leg_antenna_gain_dbi`` (bistatic sub-6 model) or
    ``rcs_dbsm`` (monostatic mmWave model) must be set.
    """

    modulation_loss_db: float = 6.0
    required_effective_snr_db: float = 1.5
    leg_antenna_gain_dbi: Optional[float] = 0.0
    rcs_dbsm: Optional[float] = None

    def __post_init__(self) -> None:
        if self.modulation_loss_db < 0:
            raise ConfigError("modulation_loss_db must be >= 0")
        if (self.leg_antenna_gain_dbi is None) == (self.rcs_dbsm is None):
            raise ConfigError(
                "exactly one of leg_antenna_gain_dbi (bistatic) or rcs_dbsm "
                "(monostatic) must be set"
            )

    @property
    def mode(self) -> str:
        return "bistatic" if self.leg_antenna_gain_dbi is not None else "monostatic"

    def require_mode(self, mode: str) -> None:
        if self.mode != mode:
            raise ModeError(
                f"{self.mode} tag profile used in a {mode} budget; set "
                f"{'leg_antenna_gain_dbi' if mode == 'bistatic' else 'rcs_dbsm'}"
            )


@dataclass(frozen=True)
class SrsConfig:
    """Uplink sounding layout that a single tag symbol spans.

    ``bandwidth_hz`` is the occupied bandwidth (e.g. a 10 MHz LTE channel
    occupies 600 x 15 kHz = 9 MHz); the pilot comb divides it evenly.
    """

    bandwidth_hz: float = 9e6
    subcarrier_spacing_hz: float = 15e3
    comb_factor: int = 2
    rx_antennas: int = 2
    symbols_per_zed_symbol: int = 2

    def __post_init__(self) -> None:
        if self.bandwidth_hz <= 0 or self.subcarrier_spacing_hz <= 0:
            raise ConfigError("bandwidth_hz and subcarrier_spacing_hz must be > 0")
        if self.comb_factor < 1 or self.rx_antennas < 1 or self.symbols_per_zed_symbol < 1:
            raise ConfigError("comb_factor, rx_antennas, symbols_per_zed_symbol must be >= 1")
        n_sc = math.floor(self.bandwidth_hz / self.subcarrier_spacing_hz)
        if n_sc < 1:
            raise ConfigError("bandwidth narrower than one subcarrier")
        if n_sc % self.comb_factor != 0:
            raise ConfigError(
                f"{n_sc} subcarriers do not divide evenly into comb-{self.comb_factor}"
            )

    @property
    def n_subcarriers(self) -> int:
        return math.floor(self.bandwidth_hz / self.subcarrier_spacing_hz)

    @property
    def pilot_count(self) -> int:
        return self.n_subcarriers // self.comb_factor

    @property
    def combined_resources(self) -> int:
        return self.pilot_count * self.rx_antennas * self.symbols_per_zed_symbol


@dataclass(frozen=True)
class LinkBudgetBreakdown:
    """Auditable ledger of one bistatic budget evaluation (all dB/dBm)."""

    tx_power_dbm: float
    direct_loss_db: float
    direct_rx_power_dbm: float
    per_re_snr_direct_db: float
    ue_zed_loss_db: float
    zed_bs_loss_db: float
    backscatter_rx_power_dbm: float
    per_re_snr_backscatter_db: float
    processing_gain_db: float
    effective_snr_db: float
    margin_db: float

    def recompute_effective_snr_db(self) -> float:
        """Effective SNR recomputed from the breakdown's own fields."""
        return self.per_re_snr_backscatter_db + self.processing_gain_db

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


# Shipped sounding layouts: a 10 MHz LTE channel occupies 600 x 15 kHz
# subcarriers (9 MHz), a 20 MHz channel 1200 (18 MHz). With comb-2, two
# rx antennas and two sounding symbols per tag symbol these combine
# 1200 / 2400 resources (30.8 / 33.8 dB).
SRS_PRESET_10MHZ = SrsConfig(bandwidth_hz=9e6)
SRS_PRESET_20MHZ = SrsConfig(bandwidth_hz=18e6)


class PowerControl(NamedTuple):
    power_dbm: float
    capped: bool


def per_re_noise_dbm(subcarrier_spacing_hz: float, noise_figure_db: float) -> float:
    """Noise power in one resource element (one subcarrier spacing)."""
    return noise_floor_dbm(subcarrier_spacing_hz, noise_figure_db)


def _hata_ue_bs(
    d_km: float, carrier_hz: float, bs: NodeProfile, mobile_height_m: float,
    out_of_band: str,
) -> float:
    return okumura_hata_suburban(
        carrier_hz,
        HataGeometry(d_km, bs.height_m, mobile_height_m),
        out_of_band=out_of_band,
    )


def ue_power_control(
    d_ue_bs_km: float,
    carrier_hz: float,
    bs: NodeProfile,
    target_snr_db: float = 15.0,
    tx_power_max_dbm: float = UE_TX_POWER_CAP_DBM,
    subcarrier_spacing_hz: float = 15e3,
    mobile_height_m: float = 1.5,
    out_of_band: str = "warn",
) -> PowerControl:
    """Closed-loop uplink power needed for ``target_snr_db`` per RE at the BS.

    Returns the commanded power and whether the cap was hit.
    """
    noise = per_re_noise_dbm(subcarrier_spacing_hz, bs.noise_figure_db)
    loss = _hata_ue_bs(d_ue_bs_km, carrier_hz, bs, mobile_height_m, out_of_band)
    wanted = noise + target_snr_db + loss
    if wanted >= tx_power_max_dbm:
        return PowerControl(tx_power_max_dbm, True)
    return PowerControl(wanted, False)


def srs_snr_at_bs(
    d_ue_bs_km: float,
    carrier_hz: float,
    bs: NodeProfile,
    ue: NodeProfile,
    target_snr_db: float = 15.0,
    subcarrier_spacing_hz: float = 15e3,
    out_of_band: str = "warn",
) -> float:
    """Per-RE SNR of the sounding signal at the BS under power control.

    Flat at the target while uncapped; beyond the cap distance it decays
    with the incremental path loss.
    """
    power, _ = ue_power_control(
        d_ue_bs_km,
        carrier_hz,
        bs,
        target_snr_db=target_snr_db,
        tx_power_max_dbm=ue.tx_power_max_dbm,
        subcarrier_spacing_hz=subcarrier_spacing_hz,
        mobile_height_m=ue.height_m,
        out_of_band=out_of_band,
    )
    noise = per_re_noise_dbm(subcarrier_spacing_hz, bs.noise_figure_db)
    loss = _hata_ue_bs(d_ue_bs_km, carrier_hz, bs, ue.height_m, out_of_band)
    return power - loss - noise


def processing_gain_db(cfg: SrsConfig) -> float:
    """Coherent-combining gain: 10*log10(pilots x antennas x symbols)."""
    n = cfg.combined_resources
    if n < 1:
        raise ConfigError("SRS configuration yields no combinable resources")
    return 10.0 * math.log10(n)


def bistatic_backscatter_snr(
    d_ue_bs_km: float,
    d_ue_zed_m: float,
    carrier_hz: float,
    bs: NodeProfile,
    ue: NodeProfile,
    zed: ZedProfile,
    srs: SrsConfig,
    target_snr_db: float = 15.0,
    out_of_band: str = "warn",
) -> LinkBudgetBreakdown:
    """Full bistatic chain with the tag equidistant from the BS.

    The UE-tag leg is line-of-sight (Friis); both the UE-BS and tag-BS
    legs use the suburban Hata model at the same distance.
    """
    zed.require_mode("bistatic")
    if d_ue_zed_m <= 0:
        raise DomainError(f"d_ue_zed_m must be > 0, got {d_ue_zed_m}")
    power, _ = ue_power_control(
        d_ue_bs_km,
        carrier_hz,
        bs,
        target_snr_db=target_snr_db,
        tx_power_max_dbm=ue.tx_power_max_dbm,
        subcarrier_spacing_hz=srs.subcarrier_spacing_hz,
        mobile_height_m=ue.height_m,
        out_of_band=out_of_band,
    )
    noise = per_re_noise_dbm(srs.subcarrier_spacing_hz, bs.noise_figure_db)
    direct_loss = _hata_ue_bs(d_ue_bs_km, carrier_hz, bs, ue.height_m, out_of_band)
    direct_rx = power - direct_loss
    ue_zed_loss = free_space_path_loss(carrier_hz, d_ue_zed_m)
    # Equidistant geometry: the tag-BS leg sees the same macro loss.
    zed_bs_loss = direct_loss
    backscatter_rx = (
        power
        - ue_zed_loss
        + 2.0 * zed.leg_antenna_gain_dbi
        - zed.modulation_loss_db
        - zed_bs_loss
    )
    gain = processing_gain_db(srs)
    per_re_back = backscatter_rx - noise
    effective = per_re_back + gain
    return LinkBudgetBreakdown(
        tx_power_dbm=power,
        direct_loss_db=direct_loss,
        direct_rx_power_dbm=direct_rx,
        per_re_snr_direct_db=direct_rx - noise,
        ue_zed_loss_db=ue_zed_loss,
        zed_bs_loss_db=zed_bs_loss,
        backscatter_rx_power_dbm=backscatter_rx,
        per_re_snr_backscatter_db=per_re_back,
        processing_gain_db=gain,
        effective_snr_db=effective,
        margin_db=effective - zed.required_effective_snr_db,
    )


def max_zed_reading_distance(
    d_ue_bs_km: float,
    carrier_hz: float,
    bs: NodeProfile,
    ue: NodeProfile,
    zed: ZedProfile,
    srs: SrsConfig,
    target_snr_db: float = 15.0,
    out_of_band: str = "warn",
) -> Optional[float]:
    """Largest UE-tag distance (m) with non-negative margin.

    Found by inverting the Friis loss on the UE-tag leg; returns None when
    even a vanishing separation cannot close the budget.
    """
    zed.require_mode("bistatic")
    direct_snr = srs_snr_at_bs(
        d_ue_bs_km,
        carrier_hz,
        bs,
        ue,
        target_snr_db=target_snr_db,
        subcarrier_spacing_hz=srs.subcarrier_spacing_hz,
        out_of_band=out_of_band,
    )
    loss_budget_db = (
        direct_snr
        + 2.0 * zed.leg_antenna_gain_dbi
        - zed.modulation_loss_db
        + processing_gain_db(srs)
        - zed.required_effective_snr_db
    )
    if not math.isfinite(loss_budget_db):
        return None
    distance = invert_free_space_path_loss(loss_budget_db, carrier_hz)
    if not math.isfinite(distance) or distance <= 0.0:
        return None
    return distance


@dataclass(frozen=True)
class BistaticLink:
    """A bound bistatic scenario: geometry plus all node profiles."""

    d_ue_bs_km: float
    carrier_hz: float
    bs: NodeProfile
    ue: NodeProfile
    zed: ZedProfile
    srs: SrsConfig
    target_snr_db: float = 15.0
    out_of_band: str = "warn"

    def breakdown(self, d_ue_zed_m: float) -> LinkBudgetBreakdown:
        return bistatic_backscatter_snr(
            self.d_ue_bs_km,
            d_ue_zed_m,
            self.carrier_hz,
            self.bs,
            self.ue,
            self.zed,
            self.srs,
            target_snr_db=self.target_snr_db,
            out_of_band=self.out_of_band,
        )

    def reading_distance_m(self) -> Optional[float]:
        return max_zed_reading_distance(
            self.d_ue_bs_km,
            self.carrier_hz,
            self.bs,
            self.ue,
            self.zed,
            self.srs,
            target_snr_db=self.target_snr_db,
            out_of_band=self.out_of_band,
        )


def monostatic_receiver_threshold(
    bandwidth_hz: float, noise_figure_db: float, snr_requirement_db: float
) -> float:
    """Minimum detectable received power: noise floor plus required SNR."""
    return noise_floor_dbm(bandwidth_hz, noise_figure_db) + snr_requirement_db


def monostatic_received_power(
    eirp_dbm: float,
    reader_rx_gain_dbi: float,
    carrier_hz: float,
    zed: ZedProfile,
    distance_m: float,
) -> float:
    """Backscattered power at the co-located reader."""
    zed.require_mode("monostatic")
    loss = radar_backscatter_loss(carrier_hz, RadarGeometry(distance_m, zed.rcs_dbsm))
    return eirp_dbm + reader_rx_gain_dbi - loss - zed.modulation_loss_db


def monostatic_max_range(
    eirp_dbm: float,
    reader_rx_gain_dbi: float,
    carrier_hz: float,
    zed: ZedProfile,
    threshold_dbm: float,
) -> float:
    """Largest range (m) with received power above the threshold.

    Closed-form inversion of the d^4 radar spreading law.
    """
    zed.require_mode("monostatic")
    loss_budget_db = (
        eirp_dbm + reader_rx_gain_dbi - zed.modulation_loss_db - threshold_dbm
    )
    lam = wavelength_m(carrier_hz)
    sigma_m2 = 10.0 ** (zed.rcs_dbsm / 10.0)
    d4 = lam**2 * sigma_m2 / (4.0 * math.pi) ** 3 * 10.0 ** (loss_budget_db / 10.0)
    return d4**0.25
