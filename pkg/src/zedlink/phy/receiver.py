"""Receiver side: direct-channel estimation and slow-FSK detection.

Once the direct channel is estimated per tag-symbol window, the tag
modulation survives as a small residual riding on the pilot estimates.
Averaging over pilot subcarriers and antennas realizes the combining gain
of the link budget; tone correlation over the symbol adds the rest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ConfigError, EstimationError, InsufficientDataError
from .grid import PilotGrid
from .waveform import FskConfig


@dataclass
class ChannelEstimate:
    """Direct-channel estimate plus the per-occasion residual sequence."""

    h_direct: np.ndarray  # (n_pilot_subcarriers, n_antennas), frame mean
    pilot_indices: np.ndarray
    combined: np.ndarray  # per-occasion estimate, pilot REs and antennas averaged
    residual: np.ndarray  # combined minus its window mean
    window_occasions: int


def estimate_direct_channel(
    grid: PilotGrid,
    pilot_value: complex = 1.0 + 0.0j,
    window_occasions: Optional[int] = None,
) -> ChannelEstimate:
    """Per-RE least squares on the pilots, averaged per symbol window.

    The residual is the coherently combined (pilot REs x antennas)
    per-occasion estimate minus its window mean; window-mean subtraction
    removes the static direct path and anything else the equalizer would
    track.
    """
    mask = grid.pilot_mask
    if not mask.any():
        raise EstimationError("grid contains no pilot resource elements")
    if pilot_value == 0:
        raise EstimationError("pilot value must be non-zero")
    n_occ = grid.n_occasions
    if n_occ == 0:
        raise EstimationError("grid contains no occasions")
    window = n_occ if window_occasions is None else int(window_occasions)
    if window < 1 or n_occ % window != 0:
        raise ConfigError(
            f"window of {window} occasions does not tile the {n_occ}-occasion frame"
        )
    h_hat = grid.samples[mask, :, :] / pilot_value  # (n_pilot, n_occ, n_ant)
    combined = h_hat.mean(axis=(0, 2))
    window_means = combined.reshape(-1, window).mean(axis=1)
    residual = combined - np.repeat(window_means, window)
    return ChannelEstimate(
        h_direct=h_hat.mean(axis=1),
        pilot_indices=np.nonzero(mask)[0],
        combined=combined,
        residual=residual,
        window_occasions=window,
    )


@dataclass
class DetectionReport:
    """Decided bits with per-symbol tone energies and an SNR estimate."""

    bits: np.ndarray
    stat_energy: np.ndarray  # (n_symbols, 2): |correlation|^2 against f0, f1
    effective_snr_db: float
    bit_errors: Optional[int] = None

    @property
    def n_symbols(self) -> int:
        return self.bits.shape[0]

    @property
    def ber(self) -> Optional[float]:
        if self.bit_errors is None or self.n_symbols == 0:
            return None
        return self.bit_errors / self.n_symbols


def _snr_estimate_db(energy: np.ndarray) -> float:
    # Winner branch holds signal + noise energy, loser branch noise only.
    win = energy.max(axis=1).mean()
    lose = energy.min(axis=1).mean()
    if lose <= 0.0:
        return math.inf if win > 0.0 else -math.inf
    ratio = (win - lose) / lose
    return 10.0 * math.log10(ratio) if ratio > 0.0 else -math.inf


def detect_zed_symbols(
    residual: np.ndarray,
    config: FskConfig,
    expected_bits=None,
) -> DetectionReport:
    """Noncoherent binary FSK on the residual sequence.

    Correlates each genie-synchronized symbol against the two tone
    templates and picks the larger energy. Trailing samples short of a
    full symbol are dropped.
    """
    residual = np.asarray(residual).reshape(-1)
    length = config.samples_per_symbol
    if residual.shape[0] < length:
        raise InsufficientDataError(
            f"residual holds {residual.shape[0]} samples, one symbol needs {length}"
        )
    n_symbols = residual.shape[0] // length
    z = residual[: n_symbols * length].reshape(n_symbols, length) @ config.templates().T
    energy = np.abs(z) ** 2
    bits = (energy[:, 1] > energy[:, 0]).astype(np.int8)
    errors = None
    if expected_bits is not None:
        expected = np.asarray(expected_bits, dtype=np.int8).reshape(-1)
        if expected.shape[0] != n_symbols:
            raise ConfigError(
                f"{expected.shape[0]} reference bits for {n_symbols} detected symbols"
            )
        errors = int(np.count_nonzero(bits != expected))
    return DetectionReport(
        bits=bits,
        stat_energy=energy,
        effective_snr_db=_snr_estimate_db(energy),
        bit_errors=errors,
    )
