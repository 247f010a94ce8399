"""Large-scale path-loss and thermal-noise primitives.

Losses are returned in dB, powers in dBm; conversions to linear units
happen only inside formulas. All functions are pure.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import DomainError, ModelValidityError

SPEED_OF_LIGHT_M_S = 299_792_458.0
THERMAL_NOISE_DBM_PER_HZ = -174.0

# Classical empirical window of the Hata model.
HATA_FREQ_WINDOW_MHZ = (150.0, 1500.0)


class HataValidityWarning(UserWarning):
    """Okumura-Hata evaluated outside 150-1500 MHz (extrapolated)."""


def _check_positive(name: str, value: float) -> float:
    if not (value > 0.0) or not math.isfinite(value):
        raise DomainError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def wavelength_m(frequency_hz: float) -> float:
    """Free-space wavelength for a carrier frequency."""
    _check_positive("frequency_hz", frequency_hz)
    return SPEED_OF_LIGHT_M_S / frequency_hz


@dataclass(frozen=True)
class HataGeometry:
    """Macro-cell geometry for the Okumura-Hata model.

    Heights default to the classical macro-cell setup (30 m base station,
    1.5 m mobile).
    """

    distance_km: float
    base_height_m: float = 30.0
    mobile_height_m: float = 1.5

    def __post_init__(self) -> None:
        _check_positive("distance_km", self.distance_km)
        if not 1.0 <= self.base_height_m <= 200.0:
            raise DomainError(
                f"base_height_m must lie in [1, 200] m, got {self.base_height_m}"
            )
        if not 0.5 <= self.mobile_height_m <= 10.0:
            raise DomainError(
                f"mobile_height_m must lie in [0.5, 10] m, got {self.mobile_height_m}"
            )


@dataclass(frozen=True)
class RadarGeometry:
    """Monostatic geometry: range plus target radar cross-section in dBsm."""

    distance_m: float
    rcs_dbsm: float

    def __post_init__(self) -> None:
        _check_positive("distance_m", self.distance_m)
        if not math.isfinite(self.rcs_dbsm):
            raise DomainError(f"rcs_dbsm must be finite, got {self.rcs_dbsm!r}")


def free_space_path_loss(frequency_hz: float, distance_m: float) -> float:
    """Friis free-space loss: 20*log10(4*pi*d*f/c) dB."""
    _check_positive("frequency_hz", frequency_hz)
    _check_positive("distance_m", distance_m)
    return 20.0 * math.log10(4.0 * math.pi * distance_m * frequency_hz / SPEED_OF_LIGHT_M_S)


def _hata_mobile_correction(f_mhz: float, mobile_height_m: float) -> float:
    # Small/medium-city correction a(hm).
    return (1.1 * math.log10(f_mhz) - 0.7) * mobile_height_m - (
        1.56 * math.log10(f_mhz) - 0.8
    )


def _check_hata_window(frequency_hz: float, out_of_band: str) -> None:
    f_mhz = frequency_hz / 1e6
    low, high = HATA_FREQ_WINDOW_MHZ
    if low <= f_mhz <= high:
        return
    if out_of_band == "raise":
        raise ModelValidityError(
            f"Okumura-Hata is specified for {low:.0f}-{high:.0f} MHz; "
            f"got {f_mhz:.1f} MHz (pass out_of_band='warn' to extrapolate)"
        )
    if out_of_band == "warn":
        warnings.warn(
            f"Okumura-Hata extrapolated outside {low:.0f}-{high:.0f} MHz "
            f"({f_mhz:.1f} MHz)",
            HataValidityWarning,
            stacklevel=3,
        )
        return
    raise DomainError(f"out_of_band must be 'warn' or 'raise', got {out_of_band!r}")


def okumura_hata_urban(
    frequency_hz: float, geometry: HataGeometry, out_of_band: str = "warn"
) -> float:
    """Okumura-Hata urban loss with the small/medium-city mobile correction."""
    _check_positive("frequency_hz", frequency_hz)
    _check_hata_window(frequency_hz, out_of_band)
    f_mhz = frequency_hz / 1e6
    a_hm = _hata_mobile_correction(f_mhz, geometry.mobile_height_m)
    log_hb = math.log10(geometry.base_height_m)
    return (
        69.55
        + 26.16 * math.log10(f_mhz)
        - 13.82 * log_hb
        - a_hm
        + (44.9 - 6.55 * log_hb) * math.log10(geometry.distance_km)
    )


def okumura_hata_suburban(
    frequency_hz: float, geometry: HataGeometry, out_of_band: str = "warn"
) -> float:
    """Suburban variant: urban loss minus 2*(log10(f_MHz/28))^2 + 5.4 dB."""
    urban = okumura_hata_urban(frequency_hz, geometry, out_of_band=out_of_band)
    f_mhz = frequency_hz / 1e6
    return urban - 2.0 * math.log10(f_mhz / 28.0) ** 2 - 5.4


def cost231_hata_suburban(frequency_hz: float, geometry: HataGeometry) -> float:
    """COST-231 extension of Hata (1500-2000 MHz), medium-city/suburban C_m = 0."""
    _check_positive("frequency_hz", frequency_hz)
    f_mhz = frequency_hz / 1e6
    a_hm = _hata_mobile_correction(f_mhz, geometry.mobile_height_m)
    log_hb = math.log10(geometry.base_height_m)
    return (
        46.3
        + 33.9 * math.log10(f_mhz)
        - 13.82 * log_hb
        - a_hm
        + (44.9 - 6.55 * log_hb) * math.log10(geometry.distance_km)
    )


def hata_distance_slope_db_per_decade(base_height_m: float) -> float:
    """Distance slope (44.9 - 6.55*log10(hb)) dB per decade of km."""
    _check_positive("base_height_m", base_height_m)
    return 44.9 - 6.55 * math.log10(base_height_m)


def invert_okumura_hata_suburban(
    loss_db: float,
    frequency_hz: float,
    base_height_m: float = 30.0,
    mobile_height_m: float = 1.5,
    out_of_band: str = "warn",
) -> float:
    """Distance (km) at which the suburban Hata loss equals ``loss_db``."""
    ref = okumura_hata_suburban(
        frequency_hz,
        HataGeometry(1.0, base_height_m, mobile_height_m),
        out_of_band=out_of_band,
    )
    slope = hata_distance_slope_db_per_decade(base_height_m)
    return 10.0 ** ((loss_db - ref) / slope)


def noise_floor_dbm(bandwidth_hz: float, noise_figure_db: float = 0.0) -> float:
    """Thermal noise floor: -174 + 10*log10(B) + NF dBm."""
    _check_positive("bandwidth_hz", bandwidth_hz)
    return THERMAL_NOISE_DBM_PER_HZ + 10.0 * math.log10(bandwidth_hz) + noise_figure_db


def radar_backscatter_loss(frequency_hz: float, geometry: RadarGeometry) -> float:
    """Two-way monostatic spreading loss including RCS.

    Returns -10*log10(lambda^2 * sigma / ((4*pi)^3 * d^4)); antenna gains
    and the tag's modulation loss are accounted for by the caller.
    """
    lam = wavelength_m(frequency_hz)
    sigma_m2 = 10.0 ** (geometry.rcs_dbsm / 10.0)
    return -10.0 * math.log10(
        lam**2 * sigma_m2 / ((4.0 * math.pi) ** 3 * geometry.distance_m**4)
    )


def invert_free_space_path_loss(loss_db: float, frequency_hz: float) -> float:
    """Distance (m) at which the Friis loss equals ``loss_db``."""
    _check_positive("frequency_hz", frequency_hz)
    return (
        10.0 ** (loss_db / 20.0)
        * SPEED_OF_LIGHT_M_S
        / (4.0 * math.pi * frequency_hz)
    )
