"""Ambient pilot grid: the OFDM resources the tag modulation rides on.

The grid stores one column per pilot occasion (a sounding OFDM symbol),
not every OFDM symbol of the frame; tag symbols are orders of magnitude
slower than the OFDM symbol rate, so only the pilot occasions matter to
the receiver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..linkbudget import SrsConfig


@dataclass(frozen=True)
class CarrierConfig:
    """Carrier and pilot layout shared by the budgets and the PHY grids.

    ``bandwidth_hz`` is the occupied bandwidth (600 x 15 kHz for a 10 MHz
    LTE channel). Pilot occasions repeat at ``pilot_occasion_rate_hz``.
    """

    frequency_hz: float
    bandwidth_hz: float = 9e6
    subcarrier_spacing_hz: float = 15e3
    comb_factor: int = 2
    rx_antennas: int = 2
    pilot_occasion_rate_hz: float = 4e3

    def __post_init__(self) -> None:
        if self.frequency_hz <= 0 or self.bandwidth_hz <= 0:
            raise ConfigError("frequency_hz and bandwidth_hz must be > 0")
        if self.subcarrier_spacing_hz <= 0 or self.pilot_occasion_rate_hz <= 0:
            raise ConfigError("spacings and rates must be > 0")
        if self.comb_factor < 1 or self.rx_antennas < 1:
            raise ConfigError("comb_factor and rx_antennas must be >= 1")
        n_sc = math.floor(self.bandwidth_hz / self.subcarrier_spacing_hz)
        if n_sc < 1 or n_sc % self.comb_factor != 0:
            raise ConfigError(
                f"{n_sc} subcarriers incompatible with comb-{self.comb_factor}"
            )

    @property
    def n_subcarriers(self) -> int:
        return math.floor(self.bandwidth_hz / self.subcarrier_spacing_hz)

    @property
    def pilots_per_symbol(self) -> int:
        return self.n_subcarriers // self.comb_factor

    def srs(self, symbols_per_zed_symbol: int = 2) -> SrsConfig:
        """Budget-side view of the same sounding layout."""
        return SrsConfig(
            bandwidth_hz=self.bandwidth_hz,
            subcarrier_spacing_hz=self.subcarrier_spacing_hz,
            comb_factor=self.comb_factor,
            rx_antennas=self.rx_antennas,
            symbols_per_zed_symbol=symbols_per_zed_symbol,
        )


@dataclass
class PilotGrid:
    """Complex resource grid indexed (subcarrier, occasion, antenna)."""

    samples: np.ndarray
    carrier: CarrierConfig
    pilot_mask: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.samples.ndim != 3:
            raise ConfigError("samples must be (subcarrier, occasion, antenna)")
        n_sc, _, n_ant = self.samples.shape
        if n_sc != self.carrier.n_subcarriers:
            raise ConfigError(
                f"grid has {n_sc} subcarriers, carrier defines "
                f"{self.carrier.n_subcarriers}"
            )
        if n_ant not in (1, self.carrier.rx_antennas):
            raise ConfigError(
                f"antenna axis {n_ant} matches neither 1 (tx) nor "
                f"{self.carrier.rx_antennas} (rx)"
            )
        if self.pilot_mask.shape != (n_sc,):
            raise ConfigError("pilot_mask must have one flag per subcarrier")
        if int(self.pilot_mask.sum()) != self.carrier.pilots_per_symbol:
            raise ConfigError("pilot_mask inconsistent with the comb factor")

    @property
    def n_occasions(self) -> int:
        return self.samples.shape[1]

    @property
    def n_antennas(self) -> int:
        return self.samples.shape[2]

    @property
    def pilot_count(self) -> int:
        return int(self.pilot_mask.sum())

    @property
    def duration_s(self) -> float:
        return self.n_occasions / self.carrier.pilot_occasion_rate_hz


def occasions_per_symbol(carrier: CarrierConfig, symbol_rate_hz: float) -> int:
    """Pilot occasions spanned by one tag symbol; must come out integer."""
    if symbol_rate_hz <= 0:
        raise ConfigError("symbol_rate_hz must be > 0")
    ratio = carrier.pilot_occasion_rate_hz / symbol_rate_hz
    if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
        raise ConfigError(
            f"pilot occasion rate {carrier.pilot_occasion_rate_hz} Hz is not an "
            f"integer multiple of the tag symbol rate {symbol_rate_hz} Hz"
        )
    return int(round(ratio))


def synthesize_ambient_frame(
    carrier: CarrierConfig, n_zed_symbols: int, symbol_rate_hz: float = 100.0
) -> PilotGrid:
    """Unit-power pilots on the comb for ``n_zed_symbols`` tag symbols."""
    if n_zed_symbols < 0:
        raise ConfigError("n_zed_symbols must be >= 0")
    per_symbol = occasions_per_symbol(carrier, symbol_rate_hz)
    n_occ = n_zed_symbols * per_symbol
    n_sc = carrier.n_subcarriers
    mask = np.zeros(n_sc, dtype=bool)
    mask[:: carrier.comb_factor] = True
    samples = np.zeros((n_sc, n_occ, 1), dtype=np.complex128)
    samples[mask, :, :] = 1.0
    return PilotGrid(samples=samples, carrier=carrier, pilot_mask=mask)
