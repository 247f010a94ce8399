"""Tag-side modulation and the composite two-path channel.

The tag switches its reflection coefficient between +a and -a as a square
wave whose toggle frequency encodes the bit (slow FSK). Shifts are kept
far below the subcarrier spacing, so the backscatter appears to the
receiver as a slow perturbation of the channel response.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DomainError
from .grid import PilotGrid

# Shift frequencies must stay at or below this fraction of the spacing.
MAX_SHIFT_TO_SPACING = 0.1


@dataclass(frozen=True)
class FskConfig:
    """Two-tone reflection switching parameters.

    The validation pins the sampling to exact integer half-periods and
    whole cycles per symbol so the discrete tone templates are exactly
    orthogonal and the reflection state is continuous at bit boundaries.
    """

    f0_hz: float = 200.0
    f1_hz: float = 400.0
    symbol_rate_hz: float = 100.0
    amplitude: float = 0.5
    sample_rate_hz: float = 4e3
    subcarrier_spacing_hz: float = 15e3

    def __post_init__(self) -> None:
        if not 0.0 < self.amplitude <= 1.0:
            raise ConfigError(f"amplitude must lie in (0, 1], got {self.amplitude}")
        if self.f0_hz <= 0 or self.f1_hz <= 0 or self.f0_hz == self.f1_hz:
            raise ConfigError("shift frequencies must be positive and distinct")
        if self.symbol_rate_hz <= 0 or self.sample_rate_hz <= 0:
            raise ConfigError("symbol_rate_hz and sample_rate_hz must be > 0")
        max_shift = max(self.f0_hz, self.f1_hz)
        if max_shift > MAX_SHIFT_TO_SPACING * self.subcarrier_spacing_hz:
            raise ConfigError(
                f"shift {max_shift} Hz is not << the {self.subcarrier_spacing_hz} Hz "
                f"subcarrier spacing (ratio must be <= {MAX_SHIFT_TO_SPACING})"
            )
        spacing = min(self.f0_hz, self.f1_hz, abs(self.f1_hz - self.f0_hz))
        if self.symbol_rate_hz > spacing:
            raise ConfigError(
                f"symbol_rate_hz {self.symbol_rate_hz} exceeds the minimum tone "
                f"spacing {spacing} Hz"
            )
        for name, f in (("f0_hz", self.f0_hz), ("f1_hz", self.f1_hz)):
            cycles = f / self.symbol_rate_hz
            if abs(cycles - round(cycles)) > 1e-9:
                raise ConfigError(f"{name} must fit whole cycles into one symbol")
            half = self.sample_rate_hz / (2.0 * f)
            if abs(half - round(half)) > 1e-9:
                raise ConfigError(
                    f"{name} must have an integer half-period in samples at "
                    f"{self.sample_rate_hz} Hz"
                )
        s0, s1 = self.templates()
        if abs(float(s0 @ s1)) > 1e-9:
            warnings.warn(
                "FSK tone templates are not orthogonal; the noncoherent "
                "detector will be suboptimal",
                UserWarning,
                stacklevel=2,
            )

    @property
    def samples_per_symbol(self) -> int:
        n = self.sample_rate_hz / self.symbol_rate_hz
        if abs(n - round(n)) > 1e-9 or round(n) < 1:
            raise ConfigError("sample rate must be an integer multiple of symbol rate")
        return int(round(n))

    def _tone_pattern(self, f_hz: float) -> np.ndarray:
        half = int(round(self.sample_rate_hz / (2.0 * f_hz)))
        n = np.arange(self.samples_per_symbol)
        return np.where((n // half) % 2 == 0, 1.0, -1.0)

    def templates(self) -> np.ndarray:
        """Unit-amplitude one-symbol tone patterns, shape (2, L)."""
        return np.stack([self._tone_pattern(self.f0_hz), self._tone_pattern(self.f1_hz)])

    @property
    def code_rate_unity_data_rate_bps(self) -> float:
        return self.symbol_rate_hz  # binary FSK: one bit per symbol


@dataclass(frozen=True)
class ZedWaveform:
    """Reflection-coefficient sequence sampled at the pilot occasion rate."""

    chips: np.ndarray  # values in {+a, -a}
    config: FskConfig
    bits: np.ndarray

    @property
    def n_samples(self) -> int:
        return self.chips.shape[0]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.config.sample_rate_hz


def zed_fsk_waveform(bits, config: FskConfig) -> ZedWaveform:
    """Square-wave switching at f0 for bit 0, f1 for bit 1.

    Each bit spans whole tone cycles (enforced by FskConfig), so the
    reflection state is continuous across bit boundaries.
    """
    bit_arr = np.asarray(bits, dtype=np.int8).reshape(-1)
    if bit_arr.size and not np.isin(bit_arr, (0, 1)).all():
        raise DomainError("bits must be 0 or 1")
    if bit_arr.size == 0:
        return ZedWaveform(np.zeros(0), config, bit_arr)
    chips = config.amplitude * config.templates()[bit_arr].reshape(-1)
    return ZedWaveform(chips, config, bit_arr)


@dataclass(frozen=True)
class ChannelPair:
    """Direct and backscatter composite gains per (subcarrier, antenna)."""

    h_direct: np.ndarray
    h_backscatter: np.ndarray

    def __post_init__(self) -> None:
        if self.h_direct.shape != self.h_backscatter.shape or self.h_direct.ndim != 2:
            raise ConfigError("h_direct and h_backscatter must share a 2-D shape")

    @property
    def n_subcarriers(self) -> int:
        return self.h_direct.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.h_direct.shape[1]

    @classmethod
    def flat(
        cls,
        n_subcarriers: int,
        n_antennas: int,
        direct_gain: complex = 1.0 + 0.0j,
        backscatter_gain: complex = 0.0j,
    ) -> "ChannelPair":
        """Frequency-flat channel, appropriate at desk-scale path delays."""
        shape = (n_subcarriers, n_antennas)
        return cls(
            h_direct=np.full(shape, direct_gain, dtype=np.complex128),
            h_backscatter=np.full(shape, backscatter_gain, dtype=np.complex128),
        )

    @classmethod
    def from_power_ratio(
        cls,
        n_subcarriers: int,
        n_antennas: int,
        backscatter_to_direct_db: float,
        modulation_amplitude: float,
        phase_rad: float = 0.0,
    ) -> "ChannelPair":
        """Flat channel whose *modulated component* sits at the given ratio.

        The budget's backscatter power already includes the modulation
        loss -20*log10(a); the composite gain here excludes it because the
        chips carry the amplitude a.
        """
        if not 0.0 < modulation_amplitude <= 1.0:
            raise ConfigError("modulation_amplitude must lie in (0, 1]")
        mag = 10.0 ** (backscatter_to_direct_db / 20.0) / modulation_amplitude
        gain = mag * np.exp(1j * phase_rad)
        return cls.flat(n_subcarriers, n_antennas, 1.0 + 0.0j, gain)


def apply_backscatter_channel(
    grid: PilotGrid,
    channel: ChannelPair,
    waveform: ZedWaveform,
    per_re_snr_db: float,
    seed=None,
    rng: np.random.Generator | None = None,
) -> PilotGrid:
    """Receive y = (h_d + h_b * c(t)) * x + n per resource element.

    Noise is complex white with power set ``per_re_snr_db`` below the mean
    direct-path pilot power; pass ``math.inf`` for a noiseless pass.
    Deterministic for a fixed seed.
    """
    if channel.n_subcarriers != grid.carrier.n_subcarriers:
        raise ConfigError(
            f"channel has {channel.n_subcarriers} subcarriers, grid has "
            f"{grid.carrier.n_subcarriers}"
        )
    if grid.n_antennas != 1:
        raise ConfigError("expected a transmit-side grid with a single antenna axis")
    if waveform.n_samples != grid.n_occasions:
        raise ConfigError(
            f"waveform spans {waveform.n_samples} occasions, grid has "
            f"{grid.n_occasions}"
        )
    x = grid.samples[:, :, 0]
    h_d = channel.h_direct[:, None, :]
    h_b = channel.h_backscatter[:, None, :]
    c = waveform.chips[None, :, None]
    y = (h_d + h_b * c) * x[:, :, None]
    if not math.isinf(per_re_snr_db):
        mask = grid.pilot_mask
        direct_power = float(
            np.mean(np.abs(channel.h_direct[mask, :][:, None, :] * x[mask, :, None]) ** 2)
        )
        if direct_power <= 0.0:
            raise DomainError("direct path carries no power; SNR is undefined")
        sigma2 = direct_power / 10.0 ** (per_re_snr_db / 10.0)
        if rng is None:
            rng = np.random.default_rng(seed)
        noise = math.sqrt(sigma2 / 2.0) * (
            rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)
        )
        y = y + noise
    return PilotGrid(samples=y, carrier=grid.carrier, pilot_mask=grid.pilot_mask.copy())
